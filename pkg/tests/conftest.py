import numpy as np
import pytest

from alma.model import MmlsbmInstance, assemble_ground_truth, planted_connectivity
from alma.sampling import sample_adjacency, sample_instance, substream


def make_truth(seed, n=30, L=12, m=2, k=2, p_max=0.7, alpha=0.5):
    inst = sample_instance(n, L, m, k, p_max, alpha, substream(seed, 0))
    return inst, assemble_ground_truth(inst)


def checkerboard_truth():
    """Two groups over the same community partition, different rates.

    The group slices then share their eigenspaces exactly, so a rotation
    mixing the groups is invisible to the tangent projector.
    """
    n, L = 30, 12
    shared = np.arange(n) % 3
    inst = MmlsbmInstance(
        n=n,
        L=L,
        M=2,
        K=(3, 3),
        layer_labels=np.array([0] * 6 + [1] * 6),
        memberships=(shared.copy(), shared.copy()),
        B=(planted_connectivity(3, 0.8, 0.5), planted_connectivity(3, 0.6, 0.3)),
        p_max=0.8,
    )
    return inst, assemble_ground_truth(inst)


def make_noisy(seed, **kw):
    inst, gt = make_truth(seed, **kw)
    adj = sample_adjacency(gt, substream(seed, 1))
    return inst, gt, adj


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
