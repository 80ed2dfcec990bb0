"""Matrix pencils ``H0 + lam * H1`` and the closed-form EP3 construction.

Two families are provided: the generic one, ``H0 = diag(e)`` and
``H1 = U diag(o) U^T`` with a real rotation ``U``, and the special coupled
three-level model whose couplings ``s2, s3`` are chosen so that ``H0`` alone
is a 3x3 Jordan block at ``E_c = (e1 + e2 + e3) / 3``.
"""
from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .cmatrix import adjugate, as_csym, char_poly, t_product
from .errors import (
    DimensionError,
    InconsistentBranchError,
    InvalidParamsError,
    SingularConfigurationError,
)

SWAP12 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)


@dataclass(frozen=True)
class Tuning:
    """Named real parameters and the rule turning them into ``(H0, H1)``."""

    names: tuple[str, ...]
    values: np.ndarray
    rule: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class Family:
    H0: np.ndarray
    H1: np.ndarray
    meta: dict = field(default_factory=dict)
    tuning: Tuning | None = None

    def __post_init__(self):
        H0 = as_csym(self.H0, atol=1e-12)
        H1 = as_csym(self.H1, atol=1e-12)
        if H0.shape != H1.shape:
            raise DimensionError("H0 and H1 must have the same dimension")
        object.__setattr__(self, "H0", H0)
        object.__setattr__(self, "H1", H1)

    @property
    def dim(self) -> int:
        return self.H0.shape[0]

    def at(self, lam: complex) -> np.ndarray:
        return self.H0 + complex(lam) * self.H1

    def retune(self, p: Sequence[float]) -> "Family":
        if self.tuning is None:
            raise InvalidParamsError("family has no tuning parameters")
        p = np.asarray(p, dtype=float)
        H0, H1 = self.tuning.rule(p)
        return replace(self, H0=H0, H1=H1, tuning=replace(self.tuning, values=p))


@dataclass(frozen=True)
class GenericFamilyParams:
    e: tuple[complex, complex, complex]
    o: tuple[complex, complex, complex]
    angles: tuple[float, float, float]


@dataclass(frozen=True)
class SpecialFamilyParams:
    e: tuple[complex, complex, complex]
    sign_s2: int
    sign_s3: int
    s2: complex
    s3: complex
    E_c: complex

    @property
    def degenerate(self) -> bool:
        """One coupling vanishes: triple eigenvalue but the wrong Jordan structure."""
        e1, e2, e3 = self.e
        return (e1 - 2 * e2 + e3) == 0 or (-2 * e1 + e2 + e3) == 0


@dataclass(frozen=True)
class EP3Reference:
    E_c: complex
    a1: complex
    psi_ep: np.ndarray
    phi1_base: np.ndarray


def rotation(angles: Sequence[float]) -> np.ndarray:
    """Real orthogonal ``Rz(a) @ Ry(b) @ Rx(c)``."""
    a, b, c = (float(x) for x in angles)
    Rz = np.array([[np.cos(a), -np.sin(a), 0], [np.sin(a), np.cos(a), 0], [0, 0, 1]])
    Ry = np.array([[np.cos(b), 0, np.sin(b)], [0, 1, 0], [-np.sin(b), 0, np.cos(b)]])
    Rx = np.array([[1, 0, 0], [0, np.cos(c), -np.sin(c)], [0, np.sin(c), np.cos(c)]])
    return Rz @ Ry @ Rx


def _generic_matrices(e, o, angles):
    U = rotation(angles)
    H1 = U @ np.diag(np.asarray(o, dtype=complex)) @ U.T
    return np.diag(np.asarray(e, dtype=complex)), (H1 + H1.T) / 2


def build_generic(p: GenericFamilyParams, tune: Sequence[str] = ()) -> Family:
    """Generic family; ``tune`` names real parameters to expose for EP search.

    Allowed names: ``e{k}_re``, ``e{k}_im``, ``o{k}_re``, ``o{k}_im``,
    ``angle{k}`` for k = 1, 2, 3.
    """
    H0, H1 = _generic_matrices(p.e, p.o, p.angles)
    tuning = None
    if tune:
        base = {"e": list(map(complex, p.e)), "o": list(map(complex, p.o)), "angle": list(map(float, p.angles))}
        for name in tune:
            _read_generic(base, name)

        def rule(x, names=tuple(tune)):
            d = {k: list(v) for k, v in base.items()}
            for name, val in zip(names, x):
                _write_generic(d, name, val)
            return _generic_matrices(d["e"], d["o"], d["angle"])

        tuning = Tuning(tuple(tune), np.array([_read_generic(base, n) for n in tune]), rule)
    return Family(H0, H1, {"kind": "generic", "params": p}, tuning)


def _parse_name(name: str):
    for key in ("angle", "e", "o"):
        if name.startswith(key):
            rest = name[len(key):]
            idx, _, part = rest.partition("_")
            if idx in ("1", "2", "3") and part in (("",) if key == "angle" else ("re", "im")):
                return key, int(idx) - 1, part
    raise InvalidParamsError(f"unknown tuning parameter {name!r}")


def _read_generic(d, name):
    key, k, part = _parse_name(name)
    v = d[key][k]
    return float(v) if key == "angle" else getattr(complex(v), "real" if part == "re" else "imag")


def _write_generic(d, name, val):
    key, k, part = _parse_name(name)
    if key == "angle":
        d[key][k] = float(val)
    else:
        z = complex(d[key][k])
        d[key][k] = complex(val, z.imag) if part == "re" else complex(z.real, val)


def _csqrt(z) -> complex:
    # principal root; +0.0 clears a signed-zero imaginary part that would
    # otherwise put the result on the wrong side of the branch cut
    z = complex(z)
    return cmath.sqrt(complex(z.real + 0.0, z.imag + 0.0))


def _cpow(z, a: float) -> complex:
    z = complex(z)
    z = complex(z.real + 0.0, z.imag + 0.0)
    return 0j if z == 0 else cmath.exp(a * cmath.log(z))


def _check_e(e1, e2, e3):
    e1, e2, e3 = complex(e1), complex(e2), complex(e3)
    if e1 == e2:
        raise SingularConfigurationError("e1 == e2: the coupling formulas divide by e1 - e2")
    return e1, e2, e3


def ep3_couplings(e1, e2, e3, sign_s2: int = 1, sign_s3: int = 1) -> SpecialFamilyParams:
    """Couplings making ``H0`` a single 3x3 Jordan block (principal roots times signs)."""
    e1, e2, e3 = _check_e(e1, e2, e3)
    if sign_s2 not in (1, -1) or sign_s3 not in (1, -1):
        raise InvalidParamsError("sign selectors must be +1 or -1")
    d12 = e1 - e2
    s2 = sign_s2 * _csqrt(-((e1 - 2 * e2 + e3) ** 3) / (27 * d12))
    s3 = sign_s3 * _csqrt((-2 * e1 + e2 + e3) ** 3 / (27 * d12))
    return SpecialFamilyParams((e1, e2, e3), sign_s2, sign_s3, s2, s3, (e1 + e2 + e3) / 3)


def _special_h0(e, s2, s3) -> np.ndarray:
    e1, e2, e3 = e
    return np.array([[e1, 0, s3], [0, e2, s2], [s3, s2, e3]], dtype=complex)


def build_special(p: SpecialFamilyParams, tunable: bool = False) -> Family:
    """``H0 = [[e1,0,s3],[0,e2,s2],[s3,s2,e3]]``, ``H1`` swaps levels 1 and 2.

    With ``tunable`` the couplings are exposed as four real parameters
    ``(s2_re, s2_im, s3_re, s3_im)``.
    """
    e1, e2, e3 = p.e
    d12 = e1 - e2
    if d12 == 0:
        raise InvalidParamsError("e1 == e2")
    want2 = -((e1 - 2 * e2 + e3) ** 3) / (27 * d12)
    want3 = (-2 * e1 + e2 + e3) ** 3 / (27 * d12)
    for s, want in ((p.s2, want2), (p.s3, want3)):
        if abs(s * s - want) > 1e-12 * max(1.0, abs(want)):
            raise InvalidParamsError("couplings do not satisfy the EP3 conditions")
    if p.E_c != (e1 + e2 + e3) / 3:
        raise InvalidParamsError("E_c must equal the mean of e")
    tuning = None
    if tunable:
        def rule(x, e=p.e):
            return _special_h0(e, complex(x[0], x[1]), complex(x[2], x[3])), SWAP12.copy()

        tuning = Tuning(("s2_re", "s2_im", "s3_re", "s3_im"),
                        np.array([p.s2.real, p.s2.imag, p.s3.real, p.s3.imag]), rule)
    return Family(_special_h0(p.e, p.s2, p.s3), SWAP12.copy(), {"kind": "special", "params": p}, tuning)


def special_family(e, signs=(1, 1), tunable: bool = False) -> Family:
    return build_special(ep3_couplings(*e, *signs), tunable=tunable)


def validate_ep3(H0, E_c: complex, tol: float = 1e-8) -> bool:
    """True iff ``H0`` has char. polynomial ``(E - E_c)**3`` and ``rank(H0 - E_c) == 2``."""
    A = np.asarray(H0, dtype=complex)
    if A.shape != (3, 3):
        raise DimensionError("validate_ep3 needs a 3x3 matrix")
    E_c = complex(E_c)
    c = char_poly(A)
    scale = max(1.0, float(np.linalg.norm(A)))
    want = (-3 * E_c, 3 * E_c**2, -(E_c**3))
    if any(abs(x - y) > tol * scale**k for k, (x, y) in enumerate(zip(c, want), start=1)):
        return False
    sv = np.linalg.svd(A - E_c * np.eye(3), compute_uv=False)
    small = sv <= tol * scale
    return bool(small[2] and not small[1])


def ep_vector(e1, e2, e3, sign_s2: int = 1, sign_s3: int = 1) -> np.ndarray:
    """Coalesced eigenvector of the special ``H0``, gauged to third component 1.

    The component square roots are principal; their signs are fixed by trying
    all four combinations against ``(H0 - E_c) v = 0``.
    """
    e1, e2, e3 = _check_e(e1, e2, e3)
    p = ep3_couplings(e1, e2, e3, sign_s2, sign_s3)
    B = _special_h0(p.e, p.s2, p.s3) - p.E_c * np.eye(3)
    den = _csqrt(3 * (e1 - e2))
    x = _csqrt(-2 * e1 + e2 + e3) / den
    y = 1j * _csqrt(e1 - 2 * e2 + e3) / den
    best, best_res = None, np.inf
    for sx, sy in itertools.product((1, -1), repeat=2):
        v = np.array([sx * x, sy * y, 1], dtype=complex)
        res = float(np.max(np.abs(B @ v)))
        if res < best_res:
            best, best_res = v, res
    if best_res > 1e-6 * max(1.0, float(np.linalg.norm(B))):
        raise InconsistentBranchError(f"no sign combination solves (H0 - E_c) v = 0 (residual {best_res:.2e})")
    return best


def first_order_energy_coeff(e1, e2, e3) -> complex:
    """Leading splitting coefficient from the closed form, principal branches.

    Only ``abs()`` of the result is branch independent.  The phase that is
    consistent with a given pencil comes from :func:`energy_coeff_cubed`.
    """
    e1, e2, e3 = _check_e(e1, e2, e3)
    num = 2 ** (1 / 3) * _csqrt(-(-2 * e1 + e2 + e3) * (e1 - 2 * e2 + e3))
    return num / (3 * _cpow(e1 - e2, 1 / 3))


def energy_coeff_cubed(f: Family, E_c: complex, lam_c: complex = 0) -> complex:
    """Exact ``a1**3`` for an EP3 of the pencil at ``(lam_c, E_c)``.

    Near a triple root ``det(E - H) ~ (E - E_c)**3 - (lam - lam_c) tr(adj(E_c - H_c) H1)``,
    so every sheet obeys ``(E - E_c)**3 ~ a1**3 (lam - lam_c)`` with this value.
    """
    A = complex(E_c) * np.eye(f.dim) - f.at(lam_c)
    return complex(np.trace(adjugate(A) @ f.H1))


def phi1_reference(e1, e2, e3, j: int, sign_s2: int = 1, sign_s3: int = 1) -> np.ndarray:
    """First-order eigenvector correction on sheet ``j`` (third component 0).

    Principal roots are used for the magnitudes; the relative sign of the two
    nonzero components is chosen so that ``(H0 - E_c) phi`` is parallel to
    :func:`ep_vector` (same signs), which also makes ``psi_ep @ phi == 0``.
    """
    if j not in (1, 2, 3):
        raise InvalidParamsError("sheet index j must be 1, 2 or 3")
    e1, e2, e3 = _check_e(e1, e2, e3)
    p = ep3_couplings(e1, e2, e3, sign_s2, sign_s3)
    psi = ep_vector(e1, e2, e3, sign_s2, sign_s3)
    B = _special_h0(p.e, p.s2, p.s3) - p.E_c * np.eye(3)
    den = np.sqrt(3) * _cpow(e1 - e2, 5 / 6)
    x = 1j * 2 ** (1 / 3) * _csqrt(e1 - 2 * e2 + e3) / den
    y = -(2 ** (1 / 3)) * _csqrt(-2 * e1 + e2 + e3) / den
    best, best_res = None, np.inf
    for sy in (1, -1):
        v = np.array([x, sy * y, 0], dtype=complex)
        w = B @ v
        # distance of (H0 - E_c) v from the line spanned by psi
        coef = np.vdot(psi, w) / np.vdot(psi, psi)
        res = float(np.linalg.norm(w - coef * psi))
        if res < best_res:
            best, best_res = v, res
    return best * cmath.exp(2j * (j - 1) * cmath.pi / 3)


def ep3_reference(p: SpecialFamilyParams) -> EP3Reference:
    e1, e2, e3 = p.e
    return EP3Reference(
        E_c=p.E_c,
        a1=first_order_energy_coeff(e1, e2, e3),
        psi_ep=ep_vector(e1, e2, e3, p.sign_s2, p.sign_s3),
        phi1_base=phi1_reference(e1, e2, e3, 1, p.sign_s2, p.sign_s3),
    )


def ep2_control() -> Family:
    """2x2 pencil ``[[0, lam], [lam, 1]]`` with EP2s at ``lam = +-i/2``."""
    return Family(np.array([[0, 0], [0, 1]], dtype=complex),
                  np.array([[0, 1], [1, 0]], dtype=complex), {"kind": "ep2_control"})


def coalesced_vector(M, E_c: complex) -> np.ndarray:
    """Null vector of ``M - E_c`` from the adjugate, gauged to last component 1
    (or to the largest component if the last one vanishes)."""
    A = np.asarray(M, dtype=complex)
    adj = adjugate(A - complex(E_c) * np.eye(A.shape[0]))
    v = adj[:, int(np.argmax(np.linalg.norm(adj, axis=0)))]
    k = A.shape[0] - 1 if abs(v[-1]) > 1e-10 * np.linalg.norm(v) else int(np.argmax(np.abs(v)))
    return v / v[k]


def self_orthogonality(v) -> float:
    return abs(t_product(v, v))
