import numpy as np
import pytest

from fraclayer._accel import HAVE_NUMBA, set_backend
from fraclayer.core import GridFunction, SpectralMeasure
from fraclayer.operator import (
    OperatorSpec,
    apply_L,
    backend_consistency,
    classical_laplacian,
    frac_laplacian_quadrature,
    frac_laplacian_spectral,
)


def arctan_layer(x):
    return (2.0 / np.pi) * np.arctan(x)


def test_annihilates_constants():
    u = GridFunction.constant(0.7, 50.0, 1001, tail="constant")
    out = frac_laplacian_quadrature(u, 0.5)
    assert np.max(np.abs(out)) <= 1e-12 * 0.7


def test_single_node_value(arctan_grid):
    full = frac_laplacian_quadrature(arctan_grid, 0.5)
    one = frac_laplacian_quadrature(arctan_grid, 0.5, x_index=2048)
    assert one == full[2048]


def test_half_laplacian_closed_form(arctan_grid):
    # the harmonic extension arg(1 + lambda + i x) gives
    # (-Lap)^(1/2) u = (2/pi) x / (1 + x^2) = (1/pi) sin(pi u)
    out = frac_laplacian_quadrature(arctan_grid, 0.5)
    x = arctan_grid.x
    exact = np.sin(np.pi * arctan_grid.values) / np.pi
    mask = np.abs(x) <= 10.0
    assert np.max(np.abs(out[mask] - exact[mask])) < 1e-4


def test_spectral_symbol_exact():
    u = GridFunction.from_callable(lambda x: np.cos(2 * x), np.pi, 256, tail="periodic")
    for s in (0.1, 0.5, 0.9):
        out = frac_laplacian_spectral(u, s)
        np.testing.assert_allclose(out.values, 2.0 ** (2 * s) * u.values, atol=1e-11)


def test_spectral_kills_constants():
    u = GridFunction.constant(1.0, np.pi, 128, tail="zero").with_values(np.ones(128))
    up = GridFunction(1, np.pi, 128, np.ones(128), "periodic")
    out = frac_laplacian_spectral(up, 0.4)
    assert np.max(np.abs(out.values)) < 1e-14


def test_spectral_linearity_two_modes():
    up = GridFunction.from_callable(lambda x: np.cos(x) + np.cos(3 * x), np.pi, 512, tail="periodic")
    out = frac_laplacian_spectral(up, 0.3)
    exact = np.cos(up.x) + 3.0 ** 0.6 * np.cos(3 * up.x)
    np.testing.assert_allclose(out.values, exact, atol=1e-11)


def test_linearity_quadrature():
    X, n = 30.0, 401
    a = GridFunction.from_callable(lambda x: np.exp(-x * x / 4), X, n, tail="zero")
    b = GridFunction.from_callable(lambda x: np.exp(-(x - 1) ** 2 / 3), X, n, tail="zero")
    al, be = 1.7, -0.6
    combo = GridFunction(1, X, n, al * a.values + be * b.values, "zero")
    lhs = frac_laplacian_quadrature(combo, 0.6)
    rhs = al * frac_laplacian_quadrature(a, 0.6) + be * frac_laplacian_quadrature(b, 0.6)
    np.testing.assert_allclose(lhs, rhs, atol=1e-13)


def test_translation_equivariance_periodic():
    up = GridFunction.from_callable(lambda x: np.cos(x) + 0.3 * np.sin(2 * x), np.pi, 256, tail="periodic")
    spec = OperatorSpec(SpectralMeasure.single(0.4), backend="spectral")
    out = apply_L(spec, up).values
    shifted = GridFunction(1, np.pi, 256, np.roll(up.values, 17), "periodic")
    out_shifted = apply_L(spec, shifted).values
    np.testing.assert_allclose(out_shifted, np.roll(out, 17), atol=1e-12)


def test_even_profile_gives_even_output():
    u = GridFunction.from_callable(lambda x: np.exp(-x * x / 9), 40.0, 801, tail="zero")
    out = frac_laplacian_quadrature(u, 0.35)
    np.testing.assert_allclose(out, out[::-1], atol=1e-13)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_symbol_monotonicity_in_frequency(s):
    n = 1024
    for k in (1, 2, 4):
        up = GridFunction.from_callable(lambda x, k=k: np.cos(k * x), np.pi, n, tail="periodic")
        out = frac_laplacian_spectral(up, s)
        amp = np.max(np.abs(out.values))
        assert amp == pytest.approx(float(k) ** (2 * s), rel=1e-10)


def test_apply_L_unit_frequency_mixture():
    m = SpectralMeasure.from_config([[0.3, 0.5], [0.7, 0.5]])
    spec = OperatorSpec(m, delta=0.0, backend="spectral")
    up = GridFunction.from_callable(np.cos, np.pi, 256, tail="periodic")
    out = apply_L(spec, up)
    # |xi| = 1 makes every atom act as the identity
    np.testing.assert_allclose(out.values, up.values, atol=1e-12)


def test_apply_L_delta_one_is_classical():
    m = SpectralMeasure.single(0.5)
    spec = OperatorSpec(m, delta=1.0, backend="spectral")
    k = 3
    n = 512
    up = GridFunction.from_callable(lambda x: np.cos(k * x), np.pi, n, tail="periodic")
    out = apply_L(spec, up)
    err = np.max(np.abs(out.values - k * k * up.values))
    assert err < k ** 4 * up.h ** 2  # second-order finite differences


def test_apply_L_quadrature_layer(arctan_grid):
    spec = OperatorSpec(SpectralMeasure.single(0.5))
    out = apply_L(spec, arctan_grid)
    exact = np.sin(np.pi * arctan_grid.values) / np.pi
    mask = np.abs(arctan_grid.x) <= 10
    assert np.max(np.abs(out.values[mask] - exact[mask])) < 1e-4


def test_apply_L_with_lap_mass():
    m = SpectralMeasure.from_config([[0.5, 0.8]], lap_mass=0.2)
    spec = OperatorSpec(m, backend="spectral")
    k = 2
    up = GridFunction.from_callable(lambda x: np.cos(k * x), np.pi, 1024, tail="periodic")
    out = apply_L(spec, up)
    expected = 0.8 * k ** (2 * 0.5) * up.values + 0.2 * k * k * up.values
    assert np.max(np.abs(out.values - expected)) < 2e-3


@pytest.mark.parametrize("s", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_backend_consistency_single_mode(s):
    up = GridFunction.from_callable(np.cos, np.pi, 2048, tail="periodic")
    assert backend_consistency(up, s) < 1e-3


def test_backend_consistency_multimode():
    up = GridFunction.from_callable(lambda x: np.cos(x) + 0.3 * np.cos(5 * x), np.pi, 2048, tail="periodic")
    assert backend_consistency(up, 0.25) < 1e-3


def test_backend_consistency_constant_is_zero():
    up = GridFunction(1, np.pi, 256, np.ones(256), "periodic")
    assert backend_consistency(up, 0.5) == 0.0


def test_classical_laplacian_quadratic():
    u = GridFunction.from_callable(lambda x: x * x, 5.0, 201, tail="constant")
    out = classical_laplacian(u)
    np.testing.assert_allclose(out[1:-1], -2.0, atol=1e-9)


def test_domain_errors():
    u = GridFunction.constant(0.0, 10.0, 101, tail="zero")
    with pytest.raises(ValueError):
        frac_laplacian_quadrature(u, 0.99)
    up = GridFunction(1, np.pi, 64, np.zeros(64), "periodic")
    with pytest.raises(ValueError):
        frac_laplacian_quadrature(up, 0.5)
    with pytest.raises(ValueError):
        frac_laplacian_spectral(u, 0.5)
    with pytest.raises(ValueError):
        OperatorSpec(SpectralMeasure.single(0.5), delta=1.5)


@pytest.mark.skipif(not HAVE_NUMBA, reason="needs both backends")
def test_numpy_fallback_matches_numba(arctan_grid):
    try:
        r_nb = frac_laplacian_quadrature(arctan_grid, 0.3)
        set_backend("numpy")
        r_np = frac_laplacian_quadrature(arctan_grid, 0.3)
    finally:
        set_backend("numba")
    np.testing.assert_allclose(r_np, r_nb, atol=1e-13)
