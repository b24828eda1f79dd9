"""Agent-level control policies: the coordination scheme and its baselines.

The coordination policies (leader signals through the plant, follower
decodes) maintain a per-rollout CoordinationState; everything they need to
share is deterministic given the common state trajectory, so one update is
computed and shared by both agents. Baselines are stateless maps of
(x_t, x_*).

Offsets follow the follower's current estimate for BOTH agents: the leader
also uses D_t^l x_hat rather than its exact D_t^l x_*, which keeps the
channel output free of message-dependent bias and the error covariance in
closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from enum import Enum

import numpy as np

from .channel import (ChannelMode, ChannelSetup, MessageState, channel_output,
                      cov_update_fa, cov_update_ua, decode_fa, decode_ua,
                      encode_fa, encode_ua, fa_decode_operator,
                      fa_encode_operator, fa_setup, ua_decode_operator,
                      ua_encode_operator, ua_setup, virtual_output)
from .errors import DimensionMismatch, ValidationError
from .gains import GainSchedule, backward_riccati, leader_only_gains
from .model import SystemModel
from .power.schedules import PowerSchedule, heuristic_schedule


class PolicyKind(Enum):
    EX_COMM = "ex-comm"
    LEADER_ONLY = "leader-only"
    NO_COMM = "no-comm"
    IM_COMM_FA = "im-comm-fa"
    IM_COMM_UA = "im-comm-ua"


@dataclass
class CoordinationState:
    """Live state of one coordinated rollout."""

    msg: MessageState
    t: int
    gains: GainSchedule
    setup: ChannelSetup
    power: PowerSchedule
    model: SystemModel
    block_order: list[int]

    def current_block(self) -> int | None:
        if self.setup.mode is ChannelMode.FULLY_ACTUATED:
            return None
        return self.block_order[self.t % self.setup.tau]


def compute_inputs(state: CoordinationState, x_t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Leader and follower inputs at the current step.

    Offsets c_t = D_t x_hat split by rows; only the leader adds the signal.
    """
    t = state.t
    g = state.gains
    lam = state.power.lam(t)
    if state.setup.mode is ChannelMode.FULLY_ACTUATED:
        s = encode_fa(state.msg, lam, state.setup)
    else:
        s = encode_ua(state.msg, lam, state.current_block(), state.setup)
    x_hat = state.msg.x_star_hat
    v = -g.K_l(t) @ x_t + g.D_l(t) @ x_hat + s
    q = -g.K_f(t) @ x_t + g.D_f(t) @ x_hat
    return v, q


def observe_and_update(state: CoordinationState, x_t: np.ndarray,
                       x_next: np.ndarray) -> None:
    """Shared post-transition update: decode, refine the estimate, advance t."""
    t = state.t
    lam = state.power.lam(t)
    y = channel_output(x_next, x_t, state.gains, t, state.msg.x_star_hat,
                       state.model)
    if state.setup.mode is ChannelMode.FULLY_ACTUATED:
        e_hat = decode_fa(y, state.msg, lam, state.setup)
        Sigma_next = cov_update_fa(state.msg.Sigma, lam, state.setup)
    else:
        k = state.current_block()
        e_hat = decode_ua(virtual_output(y, state.setup), state.msg, lam, k,
                          state.setup)
        Sigma_next = cov_update_ua(state.msg.Sigma, lam, k, state.setup)
    state.msg.apply_estimate(e_hat, Sigma_next)
    state.t = t + 1


def baseline_inputs(kind: PolicyKind, gains: GainSchedule, t: int,
                    x_t: np.ndarray, x_star: np.ndarray,
                    d2: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Inputs of the non-coordinating policies.

    EX_COMM: both agents know the target. LEADER_ONLY: gains must be the
    leader-alone schedule; the follower applies zero (d2 sizes it).
    NO_COMM: the follower never learns the target and regulates toward the
    origin; the leader keeps its own true-target offset.
    """
    if kind is PolicyKind.EX_COMM:
        u = -gains.K[t] @ x_t + gains.D[t] @ x_star
        return u[: gains.d1], u[gains.d1:]
    if kind is PolicyKind.LEADER_ONLY:
        if d2 is None:
            raise DimensionMismatch("leader-only inputs need the follower width d2")
        v = -gains.K[t] @ x_t + gains.D[t] @ x_star
        return v, np.zeros(d2)
    if kind is PolicyKind.NO_COMM:
        v = -gains.K_l(t) @ x_t + gains.D_l(t) @ x_star
        q = -gains.K_f(t) @ x_t
        return v, q
    raise ValidationError(f"{kind} is not a baseline policy")


@dataclass(frozen=True)
class _StepOps:
    """Per-step operators of a coordination policy, shared by all rollouts.

    The encode/decode gains depend only on (t, Lambda_t, Sigma_t), and
    Sigma_t follows a noise-free recursion; hoisting them out of the
    rollout loop removes every eigendecomposition from the hot path.
    """

    enc: np.ndarray      # e -> leader signal s
    dec_y: np.ndarray    # raw channel output y -> estimate of e
    Abar: np.ndarray     # A - B K_t
    BD: np.ndarray       # B D_t
    sigma_trace: float


@dataclass(frozen=True)
class PreparedPolicy:
    """Schedules and channel data computed once, shared across rollouts."""

    kind: PolicyKind
    model: SystemModel
    gains: GainSchedule
    setup: ChannelSetup | None = None
    power: PowerSchedule | None = None
    block_order: list[int] | None = field(default=None)

    @property
    def tracks_sigma(self) -> bool:
        return self.kind in (PolicyKind.IM_COMM_FA, PolicyKind.IM_COMM_UA)

    @cached_property
    def step_ops(self) -> tuple[list[_StepOps], float] | None:
        """Operator table (one entry per step) plus the terminal Tr(Sigma_n)."""
        if not self.tracks_sigma:
            return None
        model, gains, setup, power = self.model, self.gains, self.setup, self.power
        if power.n < model.n:
            raise ValidationError(
                f"power schedule has {power.n} steps, horizon needs {model.n}")
        order = self.block_order
        if order is None:
            order = (list(range(setup.tau))
                     if setup.mode is ChannelMode.UNDER_ACTUATED else [0])
        Sigma = model.Sigma0.copy()
        ops = []
        for t in range(model.n):
            lam = power.lam(t)
            if setup.mode is ChannelMode.FULLY_ACTUATED:
                enc = fa_encode_operator(Sigma, lam, setup)
                dec_y = fa_decode_operator(Sigma, lam, setup)
                Sigma_next = cov_update_fa(Sigma, lam, setup)
            else:
                k = order[t % setup.tau]
                enc = ua_encode_operator(Sigma, lam, k, setup)
                dec_y = (ua_decode_operator(Sigma, lam, k, setup)
                         @ setup.svd.Gamma0[:, : setup.r].T)
                Sigma_next = cov_update_ua(Sigma, lam, k, setup)
            ops.append(_StepOps(enc=enc, dec_y=dec_y,
                                Abar=model.A - model.B @ gains.K[t],
                                BD=model.B @ gains.D[t],
                                sigma_trace=float(np.trace(Sigma))))
            Sigma = Sigma_next
        return ops, float(np.trace(Sigma))

    def start(self, x_star: np.ndarray) -> "RolloutPolicy":
        return RolloutPolicy(self, np.asarray(x_star, dtype=float))


class RolloutPolicy:
    """Per-rollout mutable view of a prepared policy.

    Coordination rollouts run on the precomputed operator table; the
    module-level compute_inputs/observe_and_update realize the same maps on
    a general CoordinationState.
    """

    def __init__(self, prepared: PreparedPolicy, x_star: np.ndarray):
        self.prepared = prepared
        self.x_star = x_star
        self.e: np.ndarray | None = None
        if prepared.tracks_sigma:
            self.e = x_star.copy()
            self.x_hat = np.zeros_like(x_star)
            self.ops, self.final_trace = prepared.step_ops
            self.t = 0

    def inputs(self, t: int, x_t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.e is None:
            return baseline_inputs(self.prepared.kind, self.prepared.gains, t,
                                   x_t, self.x_star,
                                   d2=self.prepared.model.d2)
        g = self.prepared.gains
        s = self.ops[t].enc @ self.e
        v = -g.K_l(t) @ x_t + g.D_l(t) @ self.x_hat + s
        q = -g.K_f(t) @ x_t + g.D_f(t) @ self.x_hat
        return v, q

    def observe(self, t: int, x_t: np.ndarray, x_next: np.ndarray) -> None:
        if self.e is None:
            return
        op = self.ops[t]
        y = x_next - op.Abar @ x_t - op.BD @ self.x_hat
        e_hat = op.dec_y @ y
        self.e = self.e - e_hat
        self.x_hat = self.x_hat + e_hat
        self.t = t + 1

    def sigma_trace(self) -> float:
        """Follower's target uncertainty Tr(Sigma_t).

        Constant for the baselines: zero once the target is shared
        (ex-comm), the full prior trace when there is no channel at all.
        """
        if self.e is not None:
            return (self.ops[self.t].sigma_trace if self.t < len(self.ops)
                    else self.final_trace)
        if self.prepared.kind is PolicyKind.EX_COMM:
            return 0.0
        return float(np.trace(self.prepared.model.Sigma0))


def make_policy(kind: PolicyKind, model: SystemModel, *,
                power: PowerSchedule | None = None, theta: float = 0.88,
                Q: np.ndarray | None = None,
                block_order: list[int] | None = None) -> PreparedPolicy:
    """Build a PreparedPolicy, deriving default schedules where needed."""
    if kind is PolicyKind.LEADER_ONLY:
        return PreparedPolicy(kind=kind, model=model,
                              gains=leader_only_gains(model))
    gains = backward_riccati(model)
    if kind in (PolicyKind.EX_COMM, PolicyKind.NO_COMM):
        return PreparedPolicy(kind=kind, model=model, gains=gains)
    if kind is PolicyKind.IM_COMM_FA:
        if not model.leader_fully_actuated():
            raise ValidationError("im-comm-fa requires rank(B1) = d0")
        setup = fa_setup(model.B1, model.W, Q=Q)
        if power is None:
            power = heuristic_schedule(theta, model.n, model.d0)
        return PreparedPolicy(kind=kind, model=model, gains=gains, setup=setup,
                              power=power)
    if kind is PolicyKind.IM_COMM_UA:
        setup = ua_setup(model.B1, model.W)
        if power is None:
            power = heuristic_schedule(theta, model.n, setup.r)
        return PreparedPolicy(kind=kind, model=model, gains=gains, setup=setup,
                              power=power, block_order=block_order)
    raise ValidationError(f"unknown policy kind {kind}")
