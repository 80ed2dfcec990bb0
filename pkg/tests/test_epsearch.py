import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ep3chiral.cmatrix import CubicCoeffs, char_poly, cubic_roots
from ep3chiral.errors import DegenerateStructureError, DivergenceError, StructuralInfeasibilityError
from ep3chiral.epsearch import (
    discriminant,
    ep3_conditions,
    locate_ep2,
    locate_ep3,
    triple_root_residual,
)
from ep3chiral.model import Family, ep2_control, special_family
from ep3chiral.puiseux import verify_energy_expansion

unit_disc = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)


def coeffs_from_roots(r):
    a, b, c = r
    return CubicCoeffs(-(a + b + c), a * b + a * c + b * c, -a * b * c)


def test_triple_root_residual_examples(e013):
    assert triple_root_residual((-6, 12, -8)) == (0, 0)
    _, f, _ = e013
    r1, r2 = triple_root_residual(char_poly(f.H0))
    assert abs(r1) <= 1e-12 and abs(r2) <= 1e-12
    r1, r2 = triple_root_residual(char_poly(f.at(0.1)))
    assert 1e-3 <= abs(r2) <= 1
    # frozen oracle values at lam = 0.1
    assert r1 == pytest.approx(-0.01, abs=1e-14)
    assert r2 == pytest.approx(0.03 + 0.0592592592593j, abs=1e-12)


def test_discriminant_examples():
    assert discriminant(coeffs_from_roots((1, 2, 3))) == pytest.approx(4)
    assert discriminant(coeffs_from_roots((1, 1, 3))) == 0
    c = coeffs_from_roots((2, 2, 2))
    assert discriminant(c) == 0 and triple_root_residual(c) == (0, 0)
    assert discriminant((0, 1)) == -4


@settings(max_examples=300, deadline=None)
@given(unit_disc, unit_disc, unit_disc)
def test_discriminant_factorization(a, b, c):
    co = CubicCoeffs(a, b, c)
    r = cubic_roots(co)
    prod = np.prod([(r[i] - r[j]) ** 2 for i, j in itertools.combinations(range(3), 2)])
    scale = max(1.0, abs(a), abs(b), abs(c)) ** 6
    assert abs(discriminant(co) - prod) <= 1e-8 * scale


def test_residual_root_equivalence():
    rng = np.random.default_rng(5)
    for k in range(400):
        z = complex(*rng.uniform(-1, 1, 2))
        if k % 2:
            roots = (z, z, z)
        else:
            roots = tuple(z + 0.3 * complex(*rng.uniform(-1, 1, 2)) for _ in range(3))
        c = coeffs_from_roots(roots)
        res = max(abs(x) for x in triple_root_residual(c))
        r = cubic_roots(c)
        spread = max(abs(r[i] - r[j]) for i, j in itertools.combinations(range(3), 2))
        assert (res <= 1e-10) == (spread <= 1e-5)


def test_locate_ep2_control():
    loc = locate_ep2(ep2_control(), 0.4j)
    assert abs(loc.lambda_c - 0.5j) <= 1e-10
    assert abs(loc.E_c - 0.5) <= 1e-8
    assert loc.validated and loc.order == 2
    loc = locate_ep2(ep2_control(), -0.4j)
    assert abs(loc.lambda_c + 0.5j) <= 1e-10


def test_locate_ep2_quadratic():
    h = locate_ep2(ep2_control(), 0.4j).history
    tail = h[-4:]
    for a, b in zip(tail[:-1], tail[1:]):
        assert b <= 1.0 * a**2


def test_locate_ep2_constant_family():
    f = Family(np.diag([0.0, 1.0]), np.zeros((2, 2)))
    with pytest.raises(DivergenceError):
        locate_ep2(f, 0.3)


def test_locate_ep2_flags_triple_root(e013):
    _, f, _ = e013
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        loc = locate_ep2(f, 0.0)
    assert loc.order == 3 and any("triple" in str(x.message) for x in w)


def test_ep3_conditions_shape(e013):
    f = special_family((0, 1, 3), (1, -1), tunable=True)
    c = ep3_conditions(f, 0.1, f.tuning.values)
    assert c.order == 3 and c.residual.shape == (2,) and c.jacobian.shape == (4, 6)


def test_locate_ep3_from_exact_start():
    f = special_family((0, 1, 3), (1, -1), tunable=True)
    loc = locate_ep3(f, 0, f.tuning.values)
    assert loc.iterations <= 1 and loc.validated
    assert loc.final_residual <= 1e-10


def test_locate_ep3_perturbed_lands_on_an_ep3():
    # six real unknowns against four conditions: the solver returns some EP3
    # near the start, not necessarily the constructed one
    f = special_family((0, 1, 3), (1, -1), tunable=True)
    rng = np.random.default_rng(0)
    for _ in range(5):
        p0 = f.tuning.values * (1 + 0.05 * rng.choice([-1, 1], 4))
        loc = locate_ep3(f, 0, p0)
        assert loc.validated and loc.final_residual <= 1e-10
        assert abs(loc.lambda_c) <= 0.05


def test_locate_ep3_fixed_lambda_recovers_couplings():
    f = special_family((0, 1, 3), (1, -1), tunable=True)
    rng = np.random.default_rng(1)
    for _ in range(5):
        p0 = f.tuning.values * (1 + 0.05 * rng.choice([-1, 1], 4))
        loc = locate_ep3(f, 0, p0, fix_lambda=True)
        s2 = complex(*loc.tuning_at_solution[:2])
        assert abs(abs(s2) - 1 / np.sqrt(27)) <= 1e-8
        assert loc.lambda_c == 0


def test_locate_ep3_degenerate():
    f = special_family((0, 2, 4), (1, 1), tunable=True)
    with pytest.raises(DegenerateStructureError):
        locate_ep3(f, 0, [0.0, 0.0, 0.0, 2.0])


def test_locate_ep3_needs_tuning(e013):
    _, f, _ = e013
    with pytest.raises(StructuralInfeasibilityError):
        locate_ep3(f, 0)


def test_located_ep3_feeds_puiseux():
    f = special_family((0, 1, 3), (1, -1), tunable=True)
    loc = locate_ep3(f, 0, f.tuning.values * 1.03)
    g = f.retune(loc.tuning_at_solution)
    en = verify_energy_expansion(g, center=loc.lambda_c)
    for fit in en.fits:
        assert fit.exponent == pytest.approx(1 / 3, abs=0.01)
