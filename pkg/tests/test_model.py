import cmath
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ep3chiral.cmatrix import char_poly, eigenvalues, t_product
from ep3chiral.errors import InvalidParamsError, SingularConfigurationError
from ep3chiral.model import (
    GenericFamilyParams,
    SpecialFamilyParams,
    build_generic,
    build_special,
    energy_coeff_cubed,
    ep3_couplings,
    ep3_reference,
    ep_vector,
    first_order_energy_coeff,
    phi1_reference,
    rotation,
    special_family,
    validate_ep3,
)

angles = st.tuples(*[st.floats(-np.pi, np.pi, allow_nan=False)] * 3)


@settings(max_examples=100, deadline=None)
@given(angles)
def test_rotation_orthogonal(a):
    U = rotation(a)
    assert np.allclose(U.T @ U, np.eye(3), atol=1e-12)


def test_generic_identity_rotation():
    f = build_generic(GenericFamilyParams((0, 1, 2), (1, 2, 3), (0, 0, 0)))
    assert np.allclose(f.H1, np.diag([1, 2, 3]))
    assert np.allclose(f.H0, np.diag([0, 1, 2]))


@settings(max_examples=50, deadline=None)
@given(angles, st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_generic_isotropic(a, c):
    f = build_generic(GenericFamilyParams((0, 1, 2), (c, c, c), a))
    assert np.allclose(f.H1, c * np.eye(3), atol=1e-12 * (1 + abs(c)))


def test_generic_rank_one():
    f = build_generic(GenericFamilyParams((0, 1, 2), (1, 0, 0), (np.pi / 2, 0, 0)))
    assert np.array_equal(f.H1, f.H1.T)
    vals = sorted(eigenvalues(f.H1), key=lambda z: z.real)
    assert np.allclose(vals, [0, 0, 1], atol=1e-12)


def test_generic_tuning_roundtrip():
    p = GenericFamilyParams((0, 1, 2), (1, 2, 3), (0.1, 0.2, 0.3))
    f = build_generic(p, tune=("e1_im", "angle2"))
    assert list(f.tuning.values) == [0.0, 0.2]
    g = f.retune([0.5, 0.2])
    assert g.H0[0, 0] == 0.5j
    assert np.allclose(g.H1, f.H1)
    with pytest.raises(InvalidParamsError):
        build_generic(p, tune=("x1",))


def test_couplings_e013(e013):
    p, _, _ = e013
    assert abs(p.s2 - 1 / np.sqrt(27)) <= 1e-12
    assert abs(p.s3 + 8j / np.sqrt(27)) <= 1e-12
    assert p.E_c == 4 / 3


def test_couplings_signs_share_char_poly():
    ref = char_poly(build_special(ep3_couplings(0, 1, 3, 1, 1)).H0)
    for s2, s3 in itertools.product((1, -1), repeat=2):
        c = char_poly(build_special(ep3_couplings(0, 1, 3, s2, s3)).H0)
        assert max(abs(a - b) for a, b in zip(c, ref)) <= 1e-12


def test_couplings_degenerate_e024():
    p = ep3_couplings(0, 2, 4)
    assert p.s2 == 0 and abs(abs(p.s3) - 2) <= 1e-12 and p.E_c == 2
    assert p.degenerate
    assert not validate_ep3(build_special(p).H0, p.E_c)


def test_couplings_singular():
    with pytest.raises(SingularConfigurationError):
        ep3_couplings(1, 1, 3)
    with pytest.raises(InvalidParamsError):
        ep3_couplings(0, 1, 3, 2, 1)


def test_build_special_examples(e013):
    p, f, _ = e013
    assert np.allclose(f.H0[0], [0, 0, -1.5396007178j])
    assert np.allclose(eigenvalues(f.H0), [4 / 3] * 3, atol=1e-12)
    assert sorted(eigenvalues(f.H1), key=lambda z: z.real) == pytest.approx([-1, 0, 1])


def test_build_special_rejects_bad_params():
    bad = SpecialFamilyParams((0, 1, 3), 1, 1, 0.3, -1.5396007178j, 4 / 3)
    with pytest.raises(InvalidParamsError):
        build_special(bad)
    p = ep3_couplings(0, 1, 3)
    with pytest.raises(InvalidParamsError):
        build_special(SpecialFamilyParams(p.e, 1, 1, p.s2, p.s3, 1.0))


def test_validate_ep3(e013):
    p, f, _ = e013
    assert validate_ep3(f.H0, p.E_c)
    assert not validate_ep3(2.5 * np.eye(3), 2.5)
    assert not validate_ep3(f.H0, p.E_c + 1e-3)


def test_ep_vector(e013):
    p, f, v = e013
    assert np.allclose(v, [-1.1547005384j, 0.5773502692, 1], atol=1e-9)
    assert np.max(np.abs((f.H0 - p.E_c * np.eye(3)) @ v)) <= 1e-9
    assert abs(t_product(v, v)) <= 1e-12
    with pytest.raises(SingularConfigurationError):
        ep_vector(1, 1, 3)


def test_a1_magnitude():
    assert abs(first_order_energy_coeff(0, 1, 3)) == pytest.approx(2 ** (4 / 3) / 3, rel=1e-12)
    assert first_order_energy_coeff(1, 2, 0) == 0  # -2e1 + e2 + e3 = 0


def test_a1_cubed_matches_closed_form(e013, e013_plus):
    # only the sign pairing (+,+) reproduces the principal-branch a1**3
    a1 = first_order_energy_coeff(0, 1, 3)
    assert abs(energy_coeff_cubed(e013_plus[1], 4 / 3) - a1**3) <= 1e-12
    assert abs(energy_coeff_cubed(e013[1], 4 / 3) + a1**3) <= 1e-12


def test_phi1_reference(e013):
    _, _, v = e013
    phis = [phi1_reference(0, 1, 3, j, 1, -1) for j in (1, 2, 3)]
    for ph in phis:
        assert ph[2] == 0
        assert abs(t_product(v, ph)) <= 1e-10
    assert np.allclose(phis[1][:2] / phis[0][:2], cmath.exp(2j * np.pi / 3))
    with pytest.raises(InvalidParamsError):
        phi1_reference(0, 1, 3, 4)


def test_ep3_reference_invariants(e013):
    ref = ep3_reference(e013[0])
    assert abs(t_product(ref.psi_ep, ref.psi_ep)) <= 1e-10
    assert abs(t_product(ref.psi_ep, ref.phi1_base)) <= 1e-10


def test_random_special_models_validate():
    rng = np.random.default_rng(11)
    n = 0
    while n < 100:
        e = rng.uniform(-3, 3, 3) + 1j * rng.uniform(-3, 3, 3)
        if abs(e[0] - e[1]) <= 0.1:
            continue
        n += 1
        signs = tuple(int(s) for s in rng.choice([1, -1], 2))
        p = ep3_couplings(*e, *signs)
        assert 3 * p.E_c == pytest.approx(sum(e), abs=1e-12)
        f = build_special(p)
        assert validate_ep3(f.H0, p.E_c) or p.s2 * p.s3 == 0
        v = ep_vector(*e, *signs)
        assert abs(t_product(v, v)) <= 1e-9


def test_tunable_special():
    f = special_family((0, 1, 3), (1, -1), tunable=True)
    assert f.tuning.names == ("s2_re", "s2_im", "s3_re", "s3_im")
    g = f.retune(f.tuning.values)
    assert np.allclose(g.H0, f.H0)
