import numpy as np
import pytest
from hypothesis import given, strategies as st

from bandgap_lab.bands import BandSet, dist_to_bands
from bandgap_lab.errors import DegenerateGapError, InputError
from bandgap_lab.jacobi import (
    FiniteBandOperator,
    PeriodicJacobiSpec,
    band_edges,
    discriminant,
    discriminant_coeffs,
    monodromy,
    sampled_grid,
    truncate,
)
from oracles import FROZEN, period2_discriminant, period2_edges

FREE = PeriodicJacobiSpec.free()
P2 = PeriodicJacobiSpec((1.0, 1.0), (1.0, -1.0))

coeff = st.floats(0.3, 2.5)
diag = st.floats(-2.0, 2.0)
specs = st.integers(1, 5).flatmap(
    lambda m: st.tuples(st.lists(coeff, min_size=m, max_size=m), st.lists(diag, min_size=m, max_size=m))
).map(lambda ab: PeriodicJacobiSpec(tuple(ab[0]), tuple(ab[1])))


def test_free_monodromy_at_zero():
    assert np.array_equal(monodromy(FREE, 0.0), np.array([[0, -1], [1, 0]], dtype=complex))


def test_monodromy_is_unimodular():
    rng = np.random.default_rng(1)
    for _ in range(100):
        m = int(rng.integers(1, 7))
        spec = PeriodicJacobiSpec(tuple(rng.uniform(0.3, 2, m)), tuple(rng.uniform(-2, 2, m)))
        lam = complex(rng.uniform(-4, 4), rng.uniform(-1, 1))
        assert abs(np.linalg.det(monodromy(spec, lam)) - 1) <= 1e-12 * max(1.0, np.abs(monodromy(spec, lam)).max() ** 2)


def test_two_identical_cells_square_the_monodromy():
    one = PeriodicJacobiSpec((1.3,), (0.4,))
    two = PeriodicJacobiSpec((1.3, 1.3), (0.4, 0.4))
    for lam in (0.3, -1.7 + 0.2j, 2.5):
        m1 = monodromy(one, lam)
        np.testing.assert_allclose(monodromy(two, lam), m1 @ m1, atol=1e-13)


def test_discriminant_examples():
    assert discriminant(FREE, 0.0) == 0
    assert discriminant(FREE, 2.0) == 2
    assert discriminant(P2, 0.0).real == pytest.approx(FROZEN["period2_disc_at_0"], abs=1e-14)
    for lam in np.linspace(-3, 3, 13):
        assert discriminant(P2, lam).real == pytest.approx(period2_discriminant(1, lam), abs=1e-12)


@given(specs, st.floats(-4, 4), st.integers(0, 4))
def test_discriminant_invariant_under_rotation(spec, lam, shift):
    d0 = discriminant(spec, lam)
    d1 = discriminant(spec.rotated(shift % spec.period), lam)
    assert abs(d0 - d1) <= 1e-9 * max(1.0, abs(d0))


@given(specs, st.floats(-4, 4))
def test_discriminant_polynomial_matches_transfer_product(spec, lam):
    poly = np.polynomial.polynomial.polyval(lam, discriminant_coeffs(spec))
    d = discriminant(spec, lam).real
    assert abs(poly - d) <= 1e-9 * max(1.0, abs(d))


def test_free_band_edges():
    assert band_edges(FREE).edges == pytest.approx((-2.0, 2.0), abs=1e-10)
    # cross-check against the numerical range of a large section
    w = np.linalg.eigvalsh(truncate(FiniteBandOperator.periodic(FREE), 1000))
    assert w.min() > -2 and w.max() < 2 and w.max() > 2 - 1e-4


def test_period_two_band_edges():
    assert band_edges(P2).edges == pytest.approx(FROZEN["period2_edges"], abs=1e-8)
    assert band_edges(P2).edges == pytest.approx(period2_edges(1), abs=1e-8)


@given(specs, st.floats(0.2, 5.0))
def test_band_edges_scale_with_coefficients(spec, t):
    try:
        e = band_edges(spec)
    except DegenerateGapError:
        return
    et = band_edges(spec.scaled(t))
    np.testing.assert_allclose(et.edges, t * np.asarray(e.edges), atol=1e-7 * t * max(1, e.span))


@given(specs)
def test_discriminant_is_two_in_modulus_at_edges(spec):
    try:
        e = band_edges(spec)
    except DegenerateGapError:
        return
    d = np.abs(discriminant(spec, np.asarray(e.edges)).real)
    np.testing.assert_allclose(d, 2.0, atol=1e-6)


def test_closed_gap_is_reported():
    # identical cells doubled: every interior gap of the period-2 description is closed
    with pytest.raises(DegenerateGapError):
        band_edges(PeriodicJacobiSpec((1.0, 1.0), (0.0, 0.0)))


def test_truncation_examples():
    free = FiniteBandOperator.periodic(FREE)
    assert np.array_equal(truncate(free, 2), np.array([[0.0, 1.0], [1.0, 0.0]]))
    sampled = FiniteBandOperator.sampled_bands(BandSet((-2.0, 2.0)), 3)
    m = truncate(sampled)
    assert m.shape == (3, 3)
    assert np.count_nonzero(m - np.diag(np.diag(m))) == 0
    assert np.all(np.abs(np.diag(m)) <= 2)


@given(specs, st.integers(2, 60))
def test_truncations_are_real_symmetric(spec, n):
    if n < spec.period:
        return
    m = truncate(FiniteBandOperator.periodic(spec), n)
    assert np.isrealobj(m) and np.array_equal(m, m.T)


@pytest.mark.parametrize("spec", [FREE, P2])
def test_section_spectrum_approaches_bands(spec):
    op = FiniteBandOperator.periodic(spec)
    d200 = dist_to_bands(np.linalg.eigvalsh(truncate(op, 200)), op.bands).max()
    d400 = dist_to_bands(np.linalg.eigvalsh(truncate(op, 400)), op.bands).max()
    assert d200 <= 0.2
    assert d400 <= d200


def test_sampled_spectrum_lies_on_bands():
    bands = BandSet((-2.0, -0.5, 0.7, 2.0))
    grid = sampled_grid(bands, 101)
    assert grid.size == 101
    assert np.all(dist_to_bands(grid, bands) == 0)
    w = np.linalg.eigvalsh(truncate(FiniteBandOperator.sampled_bands(bands, 5), 40))
    assert np.all(dist_to_bands(w, bands) <= 1e-12)


def test_operator_json_round_trip_and_errors():
    op = FiniteBandOperator.periodic(P2)
    assert FiniteBandOperator.from_json(op.to_json()) == op
    s = FiniteBandOperator.sampled_bands(BandSet((-1.0, 1.0)), 4)
    assert FiniteBandOperator.from_json(s.to_json()) == s
    with pytest.raises(InputError):
        FiniteBandOperator.from_json({"a": [1.0]})
    with pytest.raises(InputError):
        FiniteBandOperator.from_json({"a": [1.0, 1.0], "b": [0.0, 0.0], "period": 3})
    with pytest.raises(InputError):
        PeriodicJacobiSpec((1.0, -1.0), (0.0, 0.0))
    with pytest.raises(InputError):
        truncate(FiniteBandOperator.periodic(P2), 1)
