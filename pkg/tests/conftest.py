import numpy as np
import pytest

import lqcoord as lq
from lqcoord.model import SystemModel


@pytest.fixture(scope="session")
def fa_model():
    return lq.fully_actuated_model(n=30)


@pytest.fixture(scope="session")
def ua_model():
    return lq.under_actuated_model(n=30)


@pytest.fixture(scope="session")
def fa_gains(fa_model):
    return lq.backward_riccati(fa_model)


@pytest.fixture(scope="session")
def ua_gains(ua_model):
    return lq.backward_riccati(ua_model)


@pytest.fixture(scope="session")
def fa_channel(fa_model):
    return lq.fa_setup(fa_model.B1, fa_model.W)


@pytest.fixture(scope="session")
def ua_channel(ua_model):
    return lq.ua_setup(ua_model.B1, ua_model.W)


def random_pd(rng, d, scale=1.0):
    R = rng.standard_normal((d, d))
    return scale * (R @ R.T + 0.5 * d * np.eye(d))


def random_system(rng, d0, d1, d2, n, tries=50):
    """Random controllable system with PD noise and priors."""
    for _ in range(tries):
        try:
            return SystemModel(
                A=rng.standard_normal((d0, d0)),
                B1=rng.standard_normal((d0, d1)),
                B2=rng.standard_normal((d0, d2)),
                W=np.diag(rng.uniform(0.05, 0.4, d0)),
                F=np.diag(rng.uniform(0.2, 2.0, d0)),
                Fn=np.diag(rng.uniform(1.0, 6.0, d0)),
                G1=np.diag(rng.uniform(0.5, 2.5, d1)),
                G2=np.diag(rng.uniform(0.5, 2.5, d2)),
                Sigma0=random_pd(rng, d0),
                X0=np.diag(rng.uniform(0.2, 1.5, d0)),
                n=n)
        except Exception:
            continue
    raise RuntimeError("failed to sample a valid system")
