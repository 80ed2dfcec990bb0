"""Locate double and triple roots of ``det(E - H0 - lam * H1)``.

EP2: Newton on the discriminant as a function of ``lam``.  EP3: damped
Gauss-Newton on the two closed-form triple-root conditions of the monic
cubic, over ``(Re lam, Im lam)`` plus the family's real tuning parameters.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .cmatrix import CubicCoeffs, char_coeffs, char_poly, eigenvalues
from .errors import DegenerateStructureError, DivergenceError, StructuralInfeasibilityError
from .model import Family, validate_ep3


def triple_root_residual(c: CubicCoeffs) -> tuple[complex, complex]:
    """``(c1 - c2**2/3, c0 - c2**3/27)``; both vanish iff the root ``-c2/3`` is triple."""
    c2, c1, c0 = (complex(x) for x in c)
    return c1 - c2 * c2 / 3, c0 - c2**3 / 27


def discriminant(c) -> complex:
    """Discriminant of a monic quadratic or cubic (product of squared root differences)."""
    if len(c) == 2:
        b, k = (complex(x) for x in c)
        return b * b - 4 * k
    c2, c1, c0 = (complex(x) for x in c)
    return (18 * c2 * c1 * c0 - 4 * c2**3 * c0 + c2**2 * c1**2
            - 4 * c1**3 - 27 * c0**2)


@dataclass(frozen=True)
class EPConditions:
    """Residual of the EP conditions and its Jacobian over the real unknowns.

    ``residual`` has ``order - 1`` complex entries.  ``jacobian`` has one row
    per real residual component (re, im interleaved) and one column per
    unknown ``(Re lam, Im lam, p...)``.
    """

    order: int
    residual: np.ndarray
    jacobian: np.ndarray


@dataclass
class EPLocation:
    lambda_c: complex
    tuning_at_solution: list[float]
    E_c: complex
    order: int
    final_residual: float
    validated: bool
    iterations: int = 0
    history: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "lambda_c": [self.lambda_c.real, self.lambda_c.imag],
            "tuning_at_solution": list(self.tuning_at_solution),
            "E_c": [self.E_c.real, self.E_c.imag],
            "order": self.order,
            "final_residual": self.final_residual,
            "validated": self.validated,
            "iterations": self.iterations,
        }


def _scale(f: Family) -> float:
    return max(1.0, float(np.linalg.norm(f.H0)), float(np.linalg.norm(f.H1)))


def _rank_ok(M: np.ndarray, E: complex, order: int, tol: float = 1e-6) -> bool:
    # a single Jordan chain: exactly one singular value of M - E below tol
    sv = np.linalg.svd(M - E * np.eye(M.shape[0]), compute_uv=False)
    scale = max(1.0, float(np.linalg.norm(M)))
    return int(np.sum(sv <= tol * scale)) == 1


def locate_ep2(f: Family, lambda0: complex, max_iter: int = 50, tol: float = 1e-12) -> EPLocation:
    """Newton iteration on ``discriminant(lam) = 0``.

    The complex derivative is a central difference with step
    ``1e-6 * (1 + |lam|)``.  A converged point that is actually a triple
    root is returned with ``order = 3`` and a warning.
    """
    scale = _scale(f) ** (2 * (f.dim - 1))
    lam = complex(lambda0)

    def disc(x):
        return discriminant(char_coeffs(f.at(x)))

    history = []
    for it in range(max_iter + 1):
        d = disc(lam)
        history.append(abs(d))
        if abs(d) <= tol * scale:
            return _finish_ep2(f, lam, history, it)
        if it == max_iter:
            break
        h = 1e-6 * (1 + abs(lam))
        dd = (disc(lam + h) - disc(lam - h)) / (2 * h)
        if dd == 0:
            raise DivergenceError(f"zero discriminant derivative at lambda = {lam}; history {history}")
        lam = lam - d / dd
        if not np.isfinite(lam):
            raise DivergenceError(f"Newton step left the finite plane; history {history}")
    raise DivergenceError(f"no convergence in {max_iter} iterations; residual history {history}")


def _finish_ep2(f: Family, lam: complex, history: list[float], it: int) -> EPLocation:
    M = f.at(lam)
    vals = np.array(eigenvalues(M))
    order = 2
    if f.dim == 3:
        r1, r2 = triple_root_residual(char_poly(M))
        s = max(1.0, float(np.linalg.norm(M)))
        if abs(r1) <= 1e-8 * s**2 and abs(r2) <= 1e-8 * s**3:
            order = 3
            warnings.warn("located point is a triple root (EP3), not an EP2", stacklevel=3)
    # the coalescing pair is the closest pair of eigenvalues
    n = len(vals)
    pairs = [(abs(vals[i] - vals[j]), i, j) for i in range(n) for j in range(i + 1, n)]
    _, i, j = min(pairs)
    E_c = complex((vals[i] + vals[j]) / 2) if order == 2 else complex(np.mean(vals))
    return EPLocation(lam, [], E_c, order, history[-1], _rank_ok(M, E_c, order), it, history)


def ep3_conditions(f: Family, lam: complex, p=None, h_rel: float = 1e-6) -> EPConditions:
    """Triple-root residual at ``(lam, p)`` and its central-difference Jacobian."""
    x = _pack(lam, p)
    F = _residual_vec(f, x)
    J = np.empty((4, len(x)))
    for k in range(len(x)):
        h = h_rel * (1 + abs(x[k]))
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        J[:, k] = (_residual_vec(f, xp) - _residual_vec(f, xm)) / (2 * h)
    return EPConditions(3, np.array([F[0] + 1j * F[1], F[2] + 1j * F[3]]), J)


def _pack(lam, p):
    p = [] if p is None else list(p)
    return np.array([complex(lam).real, complex(lam).imag, *p], dtype=float)


def _family_at(f: Family, x: np.ndarray) -> Family:
    return f.retune(x[2:]) if len(x) > 2 else f


def _residual_vec(f: Family, x: np.ndarray) -> np.ndarray:
    g = _family_at(f, x)
    r1, r2 = triple_root_residual(char_poly(g.at(complex(x[0], x[1]))))
    return np.array([r1.real, r1.imag, r2.real, r2.imag])


def locate_ep3(f: Family, lambda0: complex, p0=None, max_iter: int = 50,
               tol: float = 1e-10, max_halvings: int = 20, fix_lambda: bool = False) -> EPLocation:
    """Damped Gauss-Newton for a triple root over ``lam`` and the tuning parameters.

    Steps are the minimal-norm least-squares solution (pseudo-inverse), so the
    system may be over- or under-determined.  With more than four real
    unknowns the solutions form a continuum and the iteration stops at a
    nearby member of it, not necessarily the one closest to any given
    reference; ``fix_lambda`` keeps ``lam = lambda0`` and solves only for the
    tuning parameters.  A step is halved up to ``max_halvings`` times until
    the residual decreases.
    """
    if f.dim != 3:
        raise StructuralInfeasibilityError("EP3 search needs a 3x3 family")
    if f.tuning is None or len(f.tuning.names) < 2:
        raise StructuralInfeasibilityError(
            "EP3 needs at least 2 real tuning parameters besides lambda (4 real conditions)"
        )
    p0 = f.tuning.values if p0 is None else np.asarray(p0, dtype=float)
    x = _pack(lambda0, p0)
    F = _residual_vec(f, x)
    norm = float(np.linalg.norm(F))
    history = [norm]
    it = 0
    while norm > tol:
        if it >= max_iter:
            raise DivergenceError(f"no convergence in {max_iter} iterations; residual history {history}")
        it += 1
        J = ep3_conditions(f, complex(x[0], x[1]), x[2:]).jacobian
        if fix_lambda:
            J[:, :2] = 0
        step = -np.linalg.pinv(J) @ F
        if fix_lambda:
            step[:2] = 0
        t = 1.0
        for _ in range(max_halvings + 1):
            xn = x + t * step
            Fn = _residual_vec(f, xn)
            if np.linalg.norm(Fn) < norm:
                break
            t /= 2
        else:
            raise DivergenceError(f"step halving failed to reduce the residual; history {history}")
        x, F = xn, Fn
        norm = float(np.linalg.norm(F))
        history.append(norm)

    g = _family_at(f, x)
    lam = complex(x[0], x[1])
    M = g.at(lam)
    E_c = -complex(char_poly(M).c2) / 3
    # validate_ep3 checks H(lam) itself, with lam folded into the constant part
    if not validate_ep3(M, E_c, tol=1e-6):
        raise DegenerateStructureError(
            f"triple eigenvalue at lambda = {lam} but rank(H - E_c) != 2 (not a single Jordan block)"
        )
    return EPLocation(lam, [float(v) for v in x[2:]], E_c, 3, norm, True, it, history)
