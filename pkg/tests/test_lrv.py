import numpy as np
import pytest
from scipy.signal import lfilter

from cointmonitor import lrv


def test_autocov_hand_values():
    assert lrv.autocov([1, 1, 1, 1], 0) == 1.0
    assert lrv.autocov([1, 1, 1, 1], 1) == pytest.approx(3 / 4)
    assert lrv.autocov([1, -1, 1, -1], 1) == pytest.approx(-3 / 4)


def test_autocov_lag_out_of_range():
    with pytest.raises(ValueError):
        lrv.autocov([1.0, 2.0], 2)


def test_bartlett_hand_values():
    e = np.array([1.0, -1.0, 1.0, -1.0])
    assert lrv.bartlett_lrv(e, 0).sigma2 == pytest.approx(lrv.autocov(e, 0))
    est = lrv.bartlett_lrv(e, 1)
    assert est.sigma2 == pytest.approx(0.25)
    assert est.H == 1
    np.testing.assert_allclose(est.rho_hat, [1.0, -0.75])


@pytest.mark.parametrize("m,H", [(100, 2), (50, 1), (1, 1), (64, 2), (729, 3), (63, 1)])
def test_default_bandwidth(m, H):
    assert lrv.default_bandwidth(m) == H


def test_iid_consistency():
    e = np.random.default_rng(0).standard_normal(100_000)
    assert lrv.bartlett_lrv(e).sigma2 == pytest.approx(1.0, abs=0.05)


def test_degenerate_raises():
    with pytest.raises(lrv.DegenerateVarianceError):
        lrv.bartlett_lrv(np.zeros(50))


def test_nonnegative_over_many_vectors():
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        e = rng.standard_normal(rng.integers(5, 40)) * rng.uniform(0.1, 3)
        H = int(rng.integers(0, e.size))
        rho = np.array([lrv.autocov(e, l) for l in range(H + 1)])
        s2 = rho[0] + 2 * np.dot(1 - np.arange(1, H + 1) / (H + 1), rho[1:])
        assert s2 >= -1e-12


def test_scale_equivariance():
    e = np.random.default_rng(2).standard_normal(200)
    assert lrv.bartlett_lrv(3.0 * e, 4).sigma2 == pytest.approx(9.0 * lrv.bartlett_lrv(e, 4).sigma2, rel=1e-12)


def test_ar1_consistency_trend():
    rho = 0.5
    target = 1.0 / (1 - rho) ** 2
    rng = np.random.default_rng(3)
    med = []
    for m in (200, 800, 3200):
        errs = [abs(lrv.bartlett_lrv(lfilter([1.0], [1.0, -rho], rng.standard_normal(m))).sigma2 - target)
                for _ in range(200)]
        med.append(np.median(errs))
    assert med[0] > med[1] > med[2]
