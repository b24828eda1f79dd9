"""Efficient scalar power design: Lambda_t = a_t H^-1.

With this input shape the contraction is isotropic, Sigma_t = b_t Sigma0
with b_{t+1} = b_t/(1+a_t), and the surrogate cost collapses to a
one-dimensional optimal control problem

    J = sum_t  c1_t a_t + c2_t sqrt(a_t b_t) + c3_t b_t   (+ schedule-free terms)

whose adjoint gradient dJ/da_t is exactly the per-step stationarity
expression

    g_t = c1_t + c2_t sqrt(b_t)/(2 sqrt(a_t)) - b_t theta_{t+1}/(1+a_t)^2,
    theta_t = c3_t + c2_t sqrt(a_t)/(2 sqrt(b_t)) + theta_{t+1}/(1+a_t).

The production solver therefore minimizes J directly (L-BFGS on log a,
then per-step root polishing), which lands on a trajectory satisfying
every stationarity equation by construction. A single backward sweep from
a guessed terminal (b_n, theta_n) is NOT used: on realistic systems the
stationarity root vanishes once b grows past (2 c1/|c2|)^2, so the sweep
either dies or returns a near-zero schedule inconsistent with b_0 = 1.

The terminal-accuracy condition b_n = epsilon is enforced, when it binds,
through the terminal costate theta_n = nu >= 0 (the constraint multiplier),
bisected until b_n matches epsilon.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from ..channel import ChannelSetup
from ..errors import NoRootFound
from ..gains import GainSchedule
from ..linalg import psd_sqrt
from ..model import SystemModel
from .pmp import costate_Z, offset_feedback_seq
from .schedules import PowerSchedule, ScheduleMode

A_FLOOR = 1e-12
A_CEIL = 1e6
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ConstantsTable:
    """Schedule-independent constants of the scalar problem.

    Q_a/Q_b/Q_ab weight the covariance transition, r_a/r_b/r_ab the stage
    cost; c1/c2/c3 are the reduced per-step coefficients after absorbing
    the Z-costates.
    """

    Q_a: np.ndarray
    Q_b: list[np.ndarray]
    Q_ab: list[np.ndarray]
    r_a: float
    r_b: np.ndarray
    r_ab: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    c3: np.ndarray
    H: np.ndarray
    thetaZ: list[np.ndarray]


def scalar_constants(gains: GainSchedule, setup: ChannelSetup,
                     model: SystemModel,
                     thetaZ: list[np.ndarray] | None = None) -> ConstantsTable:
    """Assemble the constant tables for the scalar solver."""
    n = model.n
    if thetaZ is None:
        thetaZ = costate_Z(gains, model)
    L = offset_feedback_seq(gains, model)
    U, H = setup.eig.U, setup.eig.H
    Q, Q1 = setup.Q, setup.Q1
    G, G1 = model.G, model.G1
    Itil = model.leader_embed
    S0 = model.Sigma0
    S0_12 = psd_sqrt(S0)
    UHinv = (U / H) @ U.T
    UHm12 = (U / np.sqrt(H)) @ U.T

    Q_a = Q1 @ UHinv @ Q1.T
    r_a = float(np.trace(Q.T @ G1 @ Q @ UHinv))
    Q_b, Q_ab = [], []
    r_b = np.empty(n)
    r_ab = np.empty(n)
    c1 = np.empty(n)
    c2 = np.empty(n)
    c3 = np.empty(n)
    for t in range(n):
        K, D = gains.K[t], gains.D[t]
        Abar = model.A - model.B @ K
        BD = model.B @ D
        Qb = BD @ S0 @ L[t + 1].T + Abar @ L[t] @ S0 @ BD.T
        X = Q1 @ UHm12 @ S0_12 @ L[t + 1].T
        Qab = X + X.T
        Q_b.append(Qb)
        Q_ab.append(Qab)
        r_b[t] = float(np.trace(D.T @ G @ (D @ S0 + 2.0 * K @ L[t] @ S0)))
        r_ab[t] = float(np.trace((D + K @ L[t]).T @ G @ Itil @ Q @ UHm12 @ S0_12))
        c1[t] = r_a + float(np.trace(thetaZ[t + 1] @ Q_a.T))
        c2[t] = float(np.trace(thetaZ[t + 1] @ Qab.T)) - 2.0 * r_ab[t]
        c3[t] = r_b[t] - float(np.trace(thetaZ[t + 1] @ Qb.T))
    return ConstantsTable(Q_a=Q_a, Q_b=Q_b, Q_ab=Q_ab, r_a=r_a, r_b=r_b,
                          r_ab=r_ab, c1=c1, c2=c2, c3=c3, H=H.copy(),
                          thetaZ=thetaZ)


def _b_forward(a: np.ndarray) -> np.ndarray:
    b = np.empty(a.size + 1)
    b[0] = 1.0
    for t in range(a.size):
        b[t + 1] = b[t] / (1.0 + a[t])
    return b


def _reduced_cost(a: np.ndarray, c: ConstantsTable, nu: float) -> float:
    b = _b_forward(a)
    total = float(np.sum(c.c1 * a + c.c2 * np.sqrt(a * b[:-1]) + c.c3 * b[:-1]))
    return total + nu * b[-1]


def stationarity_residuals(a: np.ndarray, c: ConstantsTable,
                           nu: float = 0.0) -> np.ndarray:
    """g_t along the trajectory implied by a (b forward from 1, theta backward)."""
    b = _b_forward(a)
    theta = nu
    g = np.empty(a.size)
    for t in range(a.size - 1, -1, -1):
        g[t] = (c.c1[t] + c.c2[t] * np.sqrt(b[t]) / (2.0 * np.sqrt(a[t]))
                - b[t] * theta / (1.0 + a[t]) ** 2)
        theta = (c.c3[t] + c.c2[t] * np.sqrt(a[t]) / (2.0 * np.sqrt(b[t]))
                 + theta / (1.0 + a[t]))
    return g


def theta_b_sequence(a: np.ndarray, c: ConstantsTable, nu: float = 0.0) -> np.ndarray:
    """Costates theta_{b,t} backward from theta_{b,n} = nu."""
    b = _b_forward(a)
    theta = np.empty(a.size + 1)
    theta[-1] = nu
    for t in range(a.size - 1, -1, -1):
        theta[t] = (c.c3[t] + c.c2[t] * np.sqrt(a[t]) / (2.0 * np.sqrt(b[t]))
                    + theta[t + 1] / (1.0 + a[t]))
    return theta


def _solve_for_nu(c: ConstantsTable, nu: float, a0: np.ndarray) -> np.ndarray:
    """Minimize the reduced objective for a fixed terminal costate nu.

    Two stages in log coordinates: L-BFGS gets near the optimum, then a
    trust-region root solve of the stationarity system polishes the
    residuals to machine precision. Root-finding on the gradient of a
    smooth scalar function is well conditioned near its minimum; jumping
    straight into it from a cold start is not, hence the two stages.
    """
    u0 = np.log(np.clip(a0, A_FLOOR, A_CEIL))
    res = scipy.optimize.minimize(
        lambda u: _reduced_cost(np.exp(u), c, nu), u0,
        jac=lambda u: stationarity_residuals(np.exp(u), c, nu) * np.exp(u),
        method="L-BFGS-B",
        bounds=[(np.log(A_FLOOR), np.log(A_CEIL))] * a0.size,
        options=dict(maxiter=5000, ftol=1e-18, gtol=1e-14))
    sol = scipy.optimize.root(
        lambda u: stationarity_residuals(np.exp(u), c, nu), res.x,
        method="hybr", options=dict(xtol=1e-14))
    a = np.exp(sol.x)
    resid = stationarity_residuals(a, c, nu)
    if np.abs(resid).max() > RESIDUAL_TOL:
        # keep whichever stage did better before reporting failure
        a_lbfgs = np.exp(res.x)
        if (np.abs(stationarity_residuals(a_lbfgs, c, nu)).max()
                < np.abs(resid).max()):
            a, resid = a_lbfgs, stationarity_residuals(a_lbfgs, c, nu)
    if np.abs(resid).max() > RESIDUAL_TOL:
        worst = int(np.abs(resid).argmax())
        raise NoRootFound(
            f"stationarity system not solvable to {RESIDUAL_TOL:g} on "
            f"[{A_FLOOR:g}, {A_CEIL:g}]; worst residual {resid[worst]:.3e} "
            f"at t={worst}")
    return a


def scalar_backward_solve(constants: ConstantsTable, epsilon: float,
                          model: SystemModel, setup: ChannelSetup,
                          gains: GainSchedule | None = None) -> PowerSchedule:
    """Solve the scalar power problem with terminal-accuracy target epsilon.

    Returns the unconstrained optimum when it already reaches b_n <=
    epsilon; otherwise bisects the terminal costate multiplier nu until
    b_n = epsilon. Either way the returned trajectory satisfies every
    stationarity equation to ~1e-10 and carries b forward from b_0 = 1.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    c = constants
    n = c.c1.size
    # myopic initializer: per-step optimum ignoring the b-coupling
    a0 = np.clip(c.c2 ** 2 / (4.0 * c.c1 ** 2) * 0.5, 1e-6, 1e2)

    a_free = _solve_for_nu(c, 0.0, a0)
    b_free = _b_forward(a_free)
    nu = 0.0
    a = a_free
    if b_free[-1] > epsilon:
        # the accuracy target binds: grow nu until b_n drops below epsilon,
        # then bisect (b_n is monotone decreasing in the terminal penalty)
        lo, hi = 0.0, 1.0
        a_hi = a_free
        for _ in range(200):
            a_hi = _solve_for_nu(c, hi, a_hi)
            if _b_forward(a_hi)[-1] <= epsilon:
                break
            hi *= 4.0
        else:
            raise NoRootFound("terminal multiplier search failed to bracket epsilon")
        a = a_hi
        for _ in range(120):
            mid = 0.5 * (lo + hi)
            a_mid = _solve_for_nu(c, mid, a)
            if _b_forward(a_mid)[-1] > epsilon:
                lo = mid
            else:
                hi = mid
                a = a_mid
            if hi - lo < 1e-12 * max(1.0, hi):
                break
        nu = hi
        a = _solve_for_nu(c, nu, a)

    resid = stationarity_residuals(a, c, nu)
    if np.abs(resid).max() > 1e-8:
        warnings.warn(f"stationarity residual {np.abs(resid).max():.2e} above 1e-8")
    b = _b_forward(a)
    Lambda = [a[t] / c.H for t in range(n)]
    return PowerSchedule(mode=ScheduleMode.SCALAR, Lambda=Lambda, a=a, b=b,
                         terminal_multiplier=nu, stationarity_residuals=resid)


def solve_scalar_power(gains: GainSchedule, setup: ChannelSetup,
                       model: SystemModel, epsilon: float = 1e-3) -> PowerSchedule:
    """Convenience wrapper: constants + solve in one call."""
    constants = scalar_constants(gains, setup, model)
    return scalar_backward_solve(constants, epsilon, model, setup, gains)
