import numpy as np
import pytest

from cfswipt.oracles import build_instance
from cfswipt.ris_channel import build_correlation_model
from cfswipt.scattering import random_scattering
from cfswipt.topology import build_config, generate_topology

DESK_OVERRIDES = {
    "M": 4, "L": 8, "K": 2, "J": 2, "N_H": 4, "N_V": 2,
    "area_side": 450.0, "ris_link_gain_db": 68.0, "rho_d": 0.5,
}


def make_instance(seed=0, theta_kind="random", **overrides):
    """Small validation instance: topology, correlation, design, tables."""
    cfg = build_config({**DESK_OVERRIDES, **overrides})
    rng = np.random.default_rng(seed)
    net = generate_topology(cfg, rng)
    corr = build_correlation_model(cfg, net)
    if theta_kind == "random":
        theta = random_scattering(cfg.N, rng)
    elif theta_kind == "none":
        theta = None
    else:
        raise ValueError(theta_kind)
    return build_instance(cfg, net, corr, theta)


@pytest.fixture
def desk_instance():
    return make_instance(seed=0)
