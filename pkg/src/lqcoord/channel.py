"""The plant as a channel: signal construction, decoding, and error covariance.

The leader embeds the follower's current estimation error e_t into its input
through an additive zero-mean term s_t; subtracting every follower-computable
quantity from the observed transition leaves y_t = B1 s_t + w_t, a Gaussian
channel with perfect feedback (both agents can form y_t). The conditional-mean
decoder then contracts the error covariance by an exactly computable factor
per step.

Two regimes:

- fully actuated (rank B1 = d0): one channel use spans every message
  coordinate. Signals use a projection Q with full-rank B1 Q, and power is
  allocated in the eigenbasis U of (B1 Q)' W^-1 (B1 Q) = U diag(H) U'.
- under-actuated (rank B1 = r < d0): the SVD of B1 exposes an r-dimensional
  virtual channel; r message coordinates are sent per step, cycling through
  d0/r blocks with period tau.

All covariance math follows the closed-form contraction: with per-direction
power lam and gain h, the posterior variance factor is 1/(1 + lam*h).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (IndexOutOfRange, NonIntegerPeriod, RankDeficient,
                     SigmaNearSingular, SingularInnovation)
from .linalg import (EigenPair, SvdFactors, check_symmetric,
                     numerical_rank, pinv_sqrt, psd_sqrt, sym_eig, sym_part,
                     svd_factor)
from .model import SystemModel


class ChannelMode(Enum):
    FULLY_ACTUATED = "fully_actuated"
    UNDER_ACTUATED = "under_actuated"


def choose_projection(B1: np.ndarray) -> np.ndarray:
    """Default projection: identity when square, B1' when d1 > d0.

    Requires rank(B1) = d0; the returned Q keeps B1 Q full rank so no
    message direction is lost.
    """
    B1 = np.asarray(B1, dtype=float)
    d0, d1 = B1.shape
    if numerical_rank(B1) < d0:
        raise RankDeficient("B1 is not full row rank; use the under-actuated setup")
    Q = np.eye(d0) if d0 == d1 else B1.T
    if numerical_rank(B1 @ Q) < d0:
        raise RankDeficient("B1 Q lost rank; supply a custom projection")
    return Q


@dataclass(frozen=True)
class ChannelSetup:
    """Immutable per-system channel data shared by every rollout.

    Fully actuated: Q, Q1 = B1 Q and the eigenpair (U, H). Under-actuated:
    SVD factors of B1, the rotated-noise blocks Wbar1/Wbar3, the virtual
    channel eigenpair (U1, Pi1), period tau, and Utau = diag(U1, ..., U1).
    """

    mode: ChannelMode
    B1: np.ndarray
    W: np.ndarray
    # fully actuated fields
    Q: np.ndarray | None = None
    eig: EigenPair | None = None
    # under-actuated fields
    svd: SvdFactors | None = None
    Wbar1: np.ndarray | None = None
    Wbar2: np.ndarray | None = None
    Wbar3: np.ndarray | None = None
    virt: EigenPair | None = None
    tau: int = 0

    @property
    def d0(self) -> int:
        return self.B1.shape[0]

    @property
    def d1(self) -> int:
        return self.B1.shape[1]

    @property
    def r(self) -> int:
        return self.svd.r if self.svd is not None else self.d0

    @property
    def Q1(self) -> np.ndarray:
        return self.B1 @ self.Q

    @property
    def psi(self) -> float:
        """Smallest channel-gain eigenvalue (fully actuated)."""
        return self.eig.psi

    @property
    def pi(self) -> float:
        """Smallest virtual-channel gain eigenvalue (under-actuated)."""
        return self.virt.psi

    @property
    def Utau(self) -> np.ndarray:
        return np.kron(np.eye(self.tau), self.virt.U)

    def S_of(self, lam: np.ndarray) -> np.ndarray:
        """Signal covariance U diag(lam) U' in the channel eigenbasis."""
        U = self.eig.U if self.mode is ChannelMode.FULLY_ACTUATED else self.virt.U
        return sym_part((U * lam) @ U.T)

    def S_sqrt_of(self, lam: np.ndarray) -> np.ndarray:
        U = self.eig.U if self.mode is ChannelMode.FULLY_ACTUATED else self.virt.U
        return sym_part((U * np.sqrt(lam)) @ U.T)


def fa_setup(B1: np.ndarray, W: np.ndarray, Q: np.ndarray | None = None) -> ChannelSetup:
    """Channel data for a fully actuated leader."""
    B1 = np.asarray(B1, dtype=float)
    W = check_symmetric(np.asarray(W, dtype=float), name="W")
    if Q is None:
        Q = choose_projection(B1)
    else:
        Q = np.asarray(Q, dtype=float)
        if numerical_rank(B1 @ Q) < B1.shape[0]:
            raise RankDeficient("B1 Q is rank deficient for the supplied projection")
    Q1 = B1 @ Q
    gain = sym_eig(Q1.T @ np.linalg.solve(W, Q1))
    return ChannelSetup(mode=ChannelMode.FULLY_ACTUATED, B1=B1, W=W, Q=Q, eig=gain)


def ua_setup(B1: np.ndarray, W: np.ndarray) -> ChannelSetup:
    """Channel data for an under-actuated leader (rank B1 = r < d0, d0 % r = 0)."""
    B1 = np.asarray(B1, dtype=float)
    W = check_symmetric(np.asarray(W, dtype=float), name="W")
    factors = svd_factor(B1)
    d0 = B1.shape[0]
    r = factors.r
    if r >= d0:
        raise RankDeficient("B1 is full rank; use the fully actuated setup")
    if d0 % r != 0:
        raise NonIntegerPeriod(f"d0={d0} is not a multiple of rank r={r}")
    Wbar = factors.Gamma0.T @ W @ factors.Gamma0
    Wbar1 = sym_part(Wbar[:r, :r])
    Wbar2 = sym_part(Wbar[r:, r:])
    Wbar3 = Wbar[:r, r:]
    Psi1 = np.diag(factors.Psi1)
    virt = sym_eig(Psi1 @ np.linalg.solve(Wbar1, Psi1))
    return ChannelSetup(mode=ChannelMode.UNDER_ACTUATED, B1=B1, W=W, svd=factors,
                        Wbar1=Wbar1, Wbar2=Wbar2, Wbar3=Wbar3, virt=virt,
                        tau=d0 // r)


def projection_matrix(k: int, r: int, d0: int) -> np.ndarray:
    """r x d0 selector with I_r in columns k*r .. (k+1)*r - 1."""
    if not 0 <= k < d0 // r:
        raise IndexOutOfRange(f"block index {k} outside 0..{d0 // r - 1}")
    P = np.zeros((r, d0))
    P[:, k * r:(k + 1) * r] = np.eye(r)
    return P


@dataclass
class MessageState:
    """Live estimation state of one rollout: error, covariance, estimate.

    e + x_star_hat = x_* holds exactly at every step (the update below is a
    telescoping split of the target).
    """

    e: np.ndarray
    Sigma: np.ndarray
    x_star_hat: np.ndarray

    @classmethod
    def initial(cls, x_star: np.ndarray, Sigma0: np.ndarray) -> "MessageState":
        x_star = np.asarray(x_star, dtype=float)
        return cls(e=x_star.copy(), Sigma=np.asarray(Sigma0, dtype=float).copy(),
                   x_star_hat=np.zeros_like(x_star))

    def apply_estimate(self, e_hat: np.ndarray, Sigma_next: np.ndarray) -> None:
        self.e = self.e - e_hat
        self.x_star_hat = self.x_star_hat + e_hat
        self.Sigma = Sigma_next


def _validate_sigma(Sigma: np.ndarray) -> np.ndarray:
    Sigma = check_symmetric(Sigma, name="Sigma")
    w = np.linalg.eigvalsh(Sigma)
    scale = max(1.0, abs(w).max())
    if w.min() < -1e-10 * scale:
        raise SigmaNearSingular(f"Sigma has a negative eigenvalue {w.min():.3e}")
    return Sigma


# --- fully actuated -------------------------------------------------------

def fa_encode_operator(Sigma: np.ndarray, lam: np.ndarray,
                       setup: ChannelSetup) -> np.ndarray:
    """Matrix mapping e_t to the signal: Q S^(1/2) Sigma^(-1/2).

    Directions of Sigma below the pseudo-inverse cutoff are already known
    to the follower and get zero gain.
    """
    return setup.Q @ setup.S_sqrt_of(lam) @ pinv_sqrt(Sigma)


def fa_decode_operator(Sigma: np.ndarray, lam: np.ndarray,
                       setup: ChannelSetup) -> np.ndarray:
    """Matrix mapping y_t to the conditional-mean estimate of e_t."""
    S = setup.S_of(lam)
    Q1 = setup.Q1
    normal = sym_part(Q1 @ S @ Q1.T + setup.W)
    try:
        inv = np.linalg.inv(normal)
    except np.linalg.LinAlgError as exc:
        raise SingularInnovation("B1 Q S Q' B1' + W is singular") from exc
    return psd_sqrt(Sigma) @ setup.S_sqrt_of(lam) @ Q1.T @ inv


def encode_fa(msg: MessageState, lam: np.ndarray, setup: ChannelSetup) -> np.ndarray:
    """Leader's signal s_t = Q S^(1/2) Sigma^(-1/2) e_t."""
    Sigma = _validate_sigma(msg.Sigma)
    return fa_encode_operator(Sigma, lam, setup) @ msg.e


def channel_output(x_next: np.ndarray, x_t: np.ndarray, gains, t: int,
                   x_star_hat: np.ndarray, model: SystemModel) -> np.ndarray:
    """Residual transition y_t = x_{t+1} - (A - B K_t) x_t - B D_t x_hat.

    Every subtracted term is computable by the follower, so y_t is common
    information; algebraically it equals B1 s_t + w_t.
    """
    A, B = model.A, model.B
    return x_next - (A - B @ gains.K[t]) @ x_t - B @ gains.D[t] @ x_star_hat


def decode_fa(y: np.ndarray, msg: MessageState, lam: np.ndarray,
              setup: ChannelSetup) -> np.ndarray:
    """Conditional-mean estimate of e_t from y_t = B1 s_t + w_t."""
    Sigma = _validate_sigma(msg.Sigma)
    return fa_decode_operator(Sigma, lam, setup) @ y


def contraction_fa(lam: np.ndarray, setup: ChannelSetup) -> np.ndarray:
    """V_t = U (I + lam*H)^-1 U', the per-step covariance contraction."""
    U, H = setup.eig.U, setup.eig.H
    return sym_part((U / (1.0 + lam * H)) @ U.T)


def cov_update_fa(Sigma: np.ndarray, lam: np.ndarray, setup: ChannelSetup) -> np.ndarray:
    """Sigma_{t+1} = Sigma^(1/2) V_t Sigma^(1/2)."""
    Sigma = _validate_sigma(Sigma)
    S12 = psd_sqrt(Sigma)
    return sym_part(S12 @ contraction_fa(lam, setup) @ S12)


def noise_gain_fa(Sigma: np.ndarray, lam: np.ndarray, setup: ChannelSetup) -> np.ndarray:
    """Coefficient of w_t in the error recursion:

    e_{t+1} = Sigma^(1/2) V Sigma^(-1/2) e_t - [this] w_t.
    """
    S12sig = psd_sqrt(_validate_sigma(Sigma))
    V = contraction_fa(lam, setup)
    return S12sig @ V @ setup.S_sqrt_of(lam) @ setup.Q.T @ setup.B1.T @ np.linalg.inv(setup.W)


# --- under-actuated -------------------------------------------------------

def ua_encode_operator(Sigma: np.ndarray, lam: np.ndarray, k: int,
                       setup: ChannelSetup) -> np.ndarray:
    """Matrix mapping e_t to the full d1-dimensional leader signal."""
    Pk = projection_matrix(k, setup.r, setup.d0)
    virt = setup.S_sqrt_of(lam) @ Pk @ pinv_sqrt(Sigma)
    padded = np.vstack([virt, np.zeros((setup.d1 - setup.r, setup.d0))])
    return setup.svd.Gamma1 @ padded


def ua_decode_operator(Sigma: np.ndarray, lam: np.ndarray, k: int,
                       setup: ChannelSetup) -> np.ndarray:
    """Matrix mapping the r-dimensional virtual output to the estimate of e_t."""
    Pk = projection_matrix(k, setup.r, setup.d0)
    S = setup.S_of(lam)
    Psi1 = np.diag(setup.svd.Psi1)
    normal = sym_part(Psi1 @ S @ Psi1 + setup.Wbar1)
    try:
        inv = np.linalg.inv(normal)
    except np.linalg.LinAlgError as exc:
        raise SingularInnovation("Psi1 S Psi1 + Wbar1 is singular") from exc
    return psd_sqrt(Sigma) @ Pk.T @ setup.S_sqrt_of(lam) @ Psi1 @ inv


def encode_ua(msg: MessageState, lam: np.ndarray, k: int,
              setup: ChannelSetup) -> np.ndarray:
    """Signal for block k: s_t = Gamma1 [S^(1/2) P_k Sigma^(-1/2) e_t; 0]."""
    Sigma = _validate_sigma(msg.Sigma)
    return ua_encode_operator(Sigma, lam, k, setup) @ msg.e


def virtual_output(y: np.ndarray, setup: ChannelSetup) -> np.ndarray:
    """First r coordinates of Gamma0' y; the rest carry no signal."""
    return (setup.svd.Gamma0.T @ y)[: setup.r]


def decode_ua(y_virt: np.ndarray, msg: MessageState, lam: np.ndarray, k: int,
              setup: ChannelSetup) -> np.ndarray:
    """Conditional-mean estimate of e_t from the virtual channel output."""
    Sigma = _validate_sigma(msg.Sigma)
    return ua_decode_operator(Sigma, lam, k, setup) @ y_virt


def contraction_ua(lam: np.ndarray, k: int, setup: ChannelSetup) -> np.ndarray:
    """Vbar_t^(k) = Utau (I + P_k' lam*Pi P_k)^-1 Utau'.

    Identity outside block k: only the transmitted coordinates contract.
    """
    r, d0 = setup.r, setup.d0
    if not 0 <= k < setup.tau:
        raise IndexOutOfRange(f"block index {k} outside 0..{setup.tau - 1}")
    diag = np.ones(d0)
    diag[k * r:(k + 1) * r] = 1.0 / (1.0 + lam * setup.virt.H)
    Utau = setup.Utau
    return sym_part((Utau * diag) @ Utau.T)


def cov_update_ua(Sigma: np.ndarray, lam: np.ndarray, k: int,
                  setup: ChannelSetup) -> np.ndarray:
    """Sigma_{t+1} = Sigma^(1/2) Vbar_t^(k) Sigma^(1/2)."""
    Sigma = _validate_sigma(Sigma)
    S12 = psd_sqrt(Sigma)
    return sym_part(S12 @ contraction_ua(lam, k, setup) @ S12)


def noise_gain_ua(Sigma: np.ndarray, lam: np.ndarray, k: int,
                  setup: ChannelSetup) -> np.ndarray:
    """Coefficient of the virtual noise w~_t in the error recursion."""
    S12sig = psd_sqrt(_validate_sigma(Sigma))
    Pk = projection_matrix(k, setup.r, setup.d0)
    Vbar = contraction_ua(lam, k, setup)
    Psi1 = np.diag(setup.svd.Psi1)
    return S12sig @ Vbar @ Pk.T @ setup.S_sqrt_of(lam) @ Psi1 @ np.linalg.inv(setup.Wbar1)
