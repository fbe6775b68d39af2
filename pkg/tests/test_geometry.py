import numpy as np
import pytest
from scipy.stats import chisquare

from cfmimo.geometry import Disk, NetworkRealization, Square, distances, sample_ppp, sample_uniform_fixed


def test_areas():
    assert Disk(500.0).area() == pytest.approx(np.pi * 500**2)
    assert Square(1000.0).area() == pytest.approx(1e6)


def test_invalid_regions():
    with pytest.raises(ValueError):
        Disk(0.0)
    with pytest.raises(ValueError):
        Square(-1.0)


def test_ppp_zero_intensity_always_empty():
    rng = np.random.default_rng(0)
    for _ in range(50):
        assert sample_ppp(Disk(500.0), 0.0, 1, rng).n_aps == 0


def test_ppp_count_moments_disk():
    # E[L] = lambda * pi * rho^2 ~= 785.4; Poisson equidispersion
    rng = np.random.default_rng(1)
    region = Disk(500.0)
    counts = np.array([sample_ppp(region, 1e-3, 1, rng).n_aps for _ in range(10_000)])
    expect = 1e-3 * region.area()
    assert abs(counts.mean() - expect) / expect < 0.01
    assert abs(counts.var(ddof=1) - expect) / expect < 0.03


def test_ppp_count_mean_square():
    rng = np.random.default_rng(2)
    counts = [sample_ppp(Square(1000.0), 1e-4, 1, rng).n_aps for _ in range(20_000)]
    assert abs(np.mean(counts) - 100.0) / 100.0 < 0.01


def test_positions_inside_region():
    rng = np.random.default_rng(3)
    for region in (Disk(200.0), Square(300.0)):
        real = sample_ppp(region, 1e-3, 2, rng)
        real.validate()
        assert region.contains(real.ap_positions).all()


def test_quadrant_uniformity_chi2():
    # counts per quadrant of a fixed draw pool should be uniform at the 1% level
    rng = np.random.default_rng(4)
    pts = Disk(500.0).sample(40_000, rng)
    quadrant = (pts[:, 0] > 0).astype(int) * 2 + (pts[:, 1] > 0).astype(int)
    _, pvalue = chisquare(np.bincount(quadrant, minlength=4))
    assert pvalue > 0.01


def test_fixed_count_sampling():
    rng = np.random.default_rng(5)
    real = sample_uniform_fixed(Square(1000.0), 100, 1, rng)
    assert real.n_aps == 100 and real.n_antennas == 100
    real5 = sample_uniform_fixed(Square(1000.0), 20, 5, rng)
    assert real5.n_antennas == 100
    assert sample_uniform_fixed(Disk(10.0), 0, 1, rng).n_aps == 0


def test_distances_examples():
    region = Square(100.0)
    real = NetworkRealization(np.array([[3.0, 4.0]]), 1, region)
    assert distances(real, (0.0, 0.0))[0] == pytest.approx(5.0)
    real0 = NetworkRealization(np.array([[0.0, 0.0]]), 1, region)
    assert distances(real0, (0.0, 0.0))[0] == 0.0
    real2 = NetworkRealization(np.array([[1.0, 0.0], [0.0, 2.0]]), 1, region)
    np.testing.assert_allclose(distances(real2, (0.0, 0.0)), [1.0, 2.0])


def test_distances_equivariance_and_translation():
    rng = np.random.default_rng(6)
    pts = rng.normal(size=(40, 2))
    region = Square(1e6)
    user = np.array([0.3, -0.7])
    base = distances(NetworkRealization(pts, 1, region), user)
    perm = rng.permutation(40)
    permuted = distances(NetworkRealization(pts[perm], 1, region), user)
    np.testing.assert_allclose(permuted, base[perm])
    shift = np.array([12.5, -3.25])
    shifted = distances(NetworkRealization(pts + shift, 1, region), user + shift)
    np.testing.assert_allclose(shifted, base, rtol=1e-9, atol=1e-9)


def test_negative_intensity_rejected():
    with pytest.raises(ValueError):
        sample_ppp(Disk(10.0), -1.0, 1, np.random.default_rng(0))
