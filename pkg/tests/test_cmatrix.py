import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_csym
from ep3chiral.cmatrix import (
    CubicCoeffs,
    as_csym,
    char_coeffs,
    char_poly,
    completeness_defect,
    cubic_roots,
    eig_residual,
    eigensystem,
    pairwise_products,
    poly_eval,
    quadratic_roots,
    t_product,
    trace_error,
)
from ep3chiral.errors import DefectiveMatrixError, DimensionError, NotSymmetricError

unit_disc = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)


def test_char_poly_diag():
    assert char_poly(np.diag([1, 2, 3])) == (-6, 11, -6)


def test_char_poly_zero():
    assert char_poly(np.zeros((3, 3))) == (0, 0, 0)


def test_char_poly_ep3_block(e013):
    _, f, _ = e013
    c = char_poly(f.H0)
    want = (-4, 16 / 3, -64 / 27)
    assert max(abs(a - b) for a, b in zip(c, want)) <= 1e-12


def test_char_poly_rejects_2x2():
    with pytest.raises(DimensionError):
        char_poly(np.eye(2))


def test_cubic_roots_of_unity():
    roots = cubic_roots(CubicCoeffs(0, 0, -1))
    want = [cmath.exp(2j * cmath.pi * k / 3) for k in range(3)]
    for w in want:
        assert min(abs(r - w) for r in roots) <= 1e-14


def test_cubic_roots_123():
    roots = sorted(cubic_roots(CubicCoeffs(-6, 11, -6)), key=lambda z: z.real)
    assert np.allclose(roots, [1, 2, 3], atol=1e-14)


def test_cubic_triple_root_is_exact():
    roots = cubic_roots(CubicCoeffs(-4, 16 / 3, -64 / 27))
    assert all(r == roots[0] for r in roots)
    assert abs(roots[0] - 4 / 3) <= 1e-14


def test_cubic_double_root_accurate():
    # Cardano alone only gets sqrt(eps) here
    roots = sorted(cubic_roots(char_poly(np.diag([2.0, 2.0, 3.0]))), key=lambda z: z.real)
    assert np.allclose(roots, [2, 2, 3], atol=1e-14)


def test_cubic_residual_random():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(10_000):
        c = rng.uniform(-1, 1, (3, 2)) @ np.array([1, 1j])
        c = c / np.maximum(1.0, np.abs(c))
        for r in cubic_roots(CubicCoeffs(*c)):
            worst = max(worst, abs(poly_eval(CubicCoeffs(*c), r)))
    assert worst <= 1e-9


@settings(max_examples=200, deadline=None)
@given(unit_disc, unit_disc, unit_disc)
def test_cubic_roots_reproduce_coefficients(a, b, c):
    roots = cubic_roots(CubicCoeffs(a, b, c))
    assert abs(-sum(roots) - a) <= 1e-9
    assert abs(-np.prod(roots) - c) <= 1e-9
    assert roots == cubic_roots(CubicCoeffs(a, b, c))


@settings(max_examples=200, deadline=None)
@given(unit_disc, unit_disc)
def test_quadratic_roots(b, k):
    r = quadratic_roots((b, k))
    assert abs(r[0] + r[1] + b) <= 1e-12
    for x in r:
        assert abs(x * x + b * x + k) <= 1e-10


def test_t_product_examples():
    assert t_product([1, 1j], [1, 1j]) == 0
    assert t_product([1, 0, 0], [0, 1, 0]) == 0
    v = np.array([-2j / np.sqrt(3), 1 / np.sqrt(3), 1])
    assert abs(t_product(v, v)) <= 1e-15


def test_t_product_length_mismatch():
    with pytest.raises(DimensionError):
        t_product([1, 2], [1, 2, 3])


def test_as_csym():
    with pytest.raises(NotSymmetricError):
        as_csym([[0, 1], [2, 0]])
    assert np.array_equal(as_csym([[0, 1], [3, 0]], symmetrize=True), [[0, 2], [2, 0]])
    with pytest.raises(DimensionError):
        as_csym(np.eye(4))


def test_eigensystem_diag():
    es = eigensystem(np.diag([1.0, 2.0, 3.0]))
    order = np.argsort(es.values.real)
    assert np.allclose(es.values[order], [1, 2, 3])
    assert np.allclose(np.abs(es.vectors[order]), np.eye(3))
    assert np.allclose(es.t_norms, 1)


def test_eigensystem_2x2_imaginary():
    es = eigensystem([[0, 1j], [1j, 0]])
    assert sorted(es.values, key=lambda z: z.imag) == pytest.approx([-1j, 1j])
    assert eig_residual(es) <= 1e-14


def test_eigensystem_at_ep3(e013):
    _, f, _ = e013
    es = eigensystem(f.H0)
    assert np.all(es.condition_flags[~np.eye(3, dtype=bool)])
    v = es.vectors[0] / es.vectors[0][2]
    assert np.allclose(v, [-2j / np.sqrt(3), 1 / np.sqrt(3), 1], atol=1e-10)
    assert np.allclose(es.t_norms, 0, atol=1e-12)


def test_eigensystem_semisimple_gets_basis():
    es = eigensystem(np.diag([2.0, 2.0, 3.0]))
    G = pairwise_products(es.vectors)
    assert abs(np.linalg.det(es.vectors)) > 0.5
    assert np.allclose(G, np.diag(np.diag(G)), atol=1e-12)


def test_trace_and_residual_random():
    rng = np.random.default_rng(2)
    for _ in range(2000):
        es = eigensystem(random_csym(rng, 3 if rng.random() < 0.5 else 2))
        assert trace_error(es) <= 1e-10
        assert eig_residual(es) <= 1e-10 * (1 + np.linalg.norm(es.matrix))


def test_biorthogonality_random():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        G = pairwise_products(eigensystem(random_csym(rng, 3)).vectors)
        assert np.max(np.abs(G - np.diag(np.diag(G)))) <= 1e-9


def test_completeness_random():
    rng = np.random.default_rng(4)
    checked = 0
    for _ in range(2000):
        es = eigensystem(random_csym(rng, 3))
        if np.min(np.abs(es.t_norms)) >= 1e-6:
            assert completeness_defect(es) <= 1e-9
            checked += 1
    assert checked > 1900


def test_completeness_examples(e013):
    _, f, _ = e013
    assert completeness_defect(eigensystem(np.diag([1.0, 2.0, 3.0]))) <= 1e-14
    assert completeness_defect(eigensystem(f.at(1.0))) <= 1e-9
    with pytest.raises(DefectiveMatrixError):
        completeness_defect(eigensystem(f.at(1e-12)))


def test_completeness_degrades_near_ep(e013):
    # the sum loses ~eps/|N|^2 as the bilinear norms vanish
    _, f, _ = e013
    d4 = completeness_defect(eigensystem(f.at(1e-4)))
    d6 = completeness_defect(eigensystem(f.at(1e-6)))
    assert d4 <= 1e-9
    assert d6 > d4


def test_char_coeffs_2x2():
    assert char_coeffs([[0, 0.5j], [0.5j, 1]]) == pytest.approx((-1, 0.25))
