"""Benchmark systems: one fully actuated, one under-actuated.

Matrix entries are fixed reference values for the regression experiments;
the initial-state covariance is not part of the published settings and
defaults to the identity (overridable through configs). Horizon defaults
to 30 steps.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .model import SystemModel

DEFAULT_HORIZON = 30

FULLY_ACTUATED = "fully-actuated-vi-a"
UNDER_ACTUATED = "under-actuated-vi-b"

# per-preset named target states used in the cost-comparison figures
TARGETS = {
    FULLY_ACTUATED: {
        "A": np.array([-1.0, 2.0, 2.0, -2.0]),
        "B": np.array([3.0, -1.0, 2.0, 1.0]),
        "C": np.array([1.0, -2.0, -3.0, 3.0]),
    },
    UNDER_ACTUATED: {
        "A": np.array([-1.0, 2.0, 2.0, -2.0]),
        "B": np.array([1.0, -1.0, -2.0, 3.0]),
        "C": np.array([2.0, -2.0, 3.0, 2.0]),
    },
}


def fully_actuated_model(n: int = DEFAULT_HORIZON) -> SystemModel:
    return SystemModel(
        A=np.array([[1.5, 0.2, 0.0, 0.7],
                    [0.0, 0.5, 0.5, 0.3],
                    [0.2, 0.0, 1.9, 0.4],
                    [0.3, 0.0, 0.3, 1.7]]),
        B1=np.array([[1.0, 2.0, 0.0, 0.0],
                     [0.0, 0.0, 1.0, 0.0],
                     [0.0, 1.2, 0.0, 0.0],
                     [0.0, 0.0, 0.0, 1.3]]),
        B2=np.array([[0.0, 0.0],
                     [1.0, 0.0],
                     [2.0, 0.0],
                     [0.0, 3.0]]),
        W=0.1 * np.eye(4),
        F=np.diag([2.0, 1.0, 1.0, 2.0]),
        Fn=10.0 * np.eye(4),
        G1=np.diag([2.0, 2.0, 4.0, 6.0]),
        G2=np.diag([2.0, 2.0]),
        Sigma0=5.0 * np.eye(4),
        X0=np.eye(4),
        n=n,
        name=FULLY_ACTUATED,
    )


def under_actuated_model(n: int = DEFAULT_HORIZON) -> SystemModel:
    return SystemModel(
        A=np.array([[1.5, 0.2, 0.0, 0.0],
                    [0.0, 2.2, 0.5, 0.3],
                    [0.0, 0.2, 0.9, 0.4],
                    [0.2, 0.0, 0.3, 0.7]]),
        B1=np.array([[1.0, 0.0],
                     [0.0, 0.0],
                     [0.0, 1.2],
                     [0.0, 0.0]]),
        B2=np.array([[0.0, 0.0],
                     [1.0, 0.0],
                     [0.0, 0.0],
                     [0.0, 1.5]]),
        W=0.1 * np.eye(4),
        F=np.diag([2.0, 1.0, 1.0, 2.0]),
        Fn=10.0 * np.eye(4),
        G1=np.diag([2.0, 2.0]),
        G2=np.diag([3.0, 3.0]),
        Sigma0=5.0 * np.eye(4),
        X0=np.eye(4),
        n=n,
        name=UNDER_ACTUATED,
    )


def load_preset(name: str, n: int | None = None) -> SystemModel:
    horizon = DEFAULT_HORIZON if n is None else n
    if name == FULLY_ACTUATED:
        return fully_actuated_model(horizon)
    if name == UNDER_ACTUATED:
        return under_actuated_model(horizon)
    raise ValidationError(f"unknown preset '{name}' "
                          f"(expected {FULLY_ACTUATED} or {UNDER_ACTUATED})")
