"""Closed-form linear algebra for small complex symmetric matrices.

Everything here works for 2x2 and 3x3 matrices only.  Eigenvalues come from
the characteristic polynomial (quadratic formula / Cardano) and eigenvectors
from adjugate columns, which stay well defined right at a Jordan block where
iterative solvers lose their footing.

All products between eigenvectors are the bilinear form ``u @ v`` (no complex
conjugation): for ``M == M.T`` the left eigenvectors are plain transposes of
the right ones.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DefectiveMatrixError, DimensionError, NotSymmetricError

EPS = np.finfo(float).eps
ZETA3 = cmath.exp(2j * cmath.pi / 3)


class CubicCoeffs(NamedTuple):
    """Monic cubic ``E**3 + c2*E**2 + c1*E + c0``."""

    c2: complex
    c1: complex
    c0: complex


class QuadCoeffs(NamedTuple):
    """Monic quadratic ``E**2 + c1*E + c0``."""

    c1: complex
    c0: complex


def as_csym(M, symmetrize: bool = False, atol: float = 0.0) -> np.ndarray:
    """Return ``M`` as a complex symmetric 2x2 or 3x3 array.

    With ``symmetrize`` the result is ``(M + M.T) / 2``; otherwise any
    asymmetry larger than ``atol`` raises :class:`NotSymmetricError`.
    """
    A = np.array(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] not in (2, 3):
        raise DimensionError(f"expected a 2x2 or 3x3 matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if symmetrize:
        return (A + A.T) / 2
    if np.max(np.abs(A - A.T)) > atol:
        raise NotSymmetricError("matrix is not complex symmetric")
    return A


def t_product(u, v) -> complex:
    """Bilinear product ``sum(u_k * v_k)``."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionError(f"length mismatch: {u.shape} vs {v.shape}")
    return complex(np.dot(u, v))


def char_poly(M) -> CubicCoeffs:
    """Coefficients of ``det(E*I - M)`` for a 3x3 matrix."""
    A = np.asarray(M, dtype=complex)
    if A.shape != (3, 3):
        raise DimensionError(f"char_poly needs a 3x3 matrix, got {A.shape}")
    (a, b, c), (d, e, f), (g, h, k) = A.tolist()
    minors = (a * e - b * d) + (a * k - c * g) + (e * k - f * h)
    det = a * (e * k - f * h) - b * (d * k - f * g) + c * (d * h - e * g)
    return CubicCoeffs(-(a + e + k), minors, -det)


def char_coeffs(M) -> QuadCoeffs | CubicCoeffs:
    """Characteristic polynomial for either supported dimension."""
    A = np.asarray(M, dtype=complex)
    if A.shape == (2, 2):
        (a, b), (c, d) = A.tolist()
        return QuadCoeffs(-(a + d), a * d - b * c)
    return char_poly(A)


def poly_eval(c: QuadCoeffs | CubicCoeffs, x: complex) -> complex:
    out = 1.0 + 0j
    for coef in c:
        out = out * x + coef
    return out


def quadratic_roots(c: QuadCoeffs) -> list[complex]:
    b, k = complex(c[0]), complex(c[1])
    s = cmath.sqrt(b * b - 4 * k)
    # pick the sign that avoids cancellation, then use Vieta for the other root
    q = -(b + s) / 2 if abs(b + s) >= abs(b - s) else -(b - s) / 2
    if q == 0:
        return [0j, 0j]
    return [q, k / q]


def cubic_roots(c: CubicCoeffs) -> list[complex]:
    """Three roots of a monic cubic, with multiplicity.

    Cardano on the depressed cubic, taking the larger-magnitude branch of
    ``-q/2 +- sqrt(D)``.  Depressed coefficients that are pure rounding noise
    are snapped to zero so an exact triple root comes back as three equal
    values.  Each root then gets one guarded Newton polish.  Extreme
    coefficient magnitudes are rescaled by a power of two first.
    """
    c2, c1, c0 = (complex(x) for x in c)
    size = max(abs(c2), abs(c1) ** 0.5, abs(c0) ** (1 / 3))
    if size == 0:
        return [0j] * 3
    if not 1e-50 <= size <= 1e50:
        # solve for x / k with k a power of two so nothing under- or overflows
        k = 2.0 ** round(math.log2(size))
        return [r * k for r in cubic_roots(CubicCoeffs(c2 / k, c1 / k / k, c0 / k / k / k))]
    shift = c2 / 3
    p = c1 - c2 * c2 / 3
    q = 2 * c2**3 / 27 - c2 * c1 / 3 + c0
    err_p = EPS * (abs(c1) + abs(c2) ** 2 / 3)
    err_q = EPS * (2 * abs(c2) ** 3 / 27 + abs(c2 * c1) / 3 + abs(c0))
    if abs(p) <= 16 * err_p:
        p = 0j
    if abs(q) <= 16 * err_q:
        q = 0j

    if p == 0 and q == 0:
        return [-shift] * 3
    if q == 0:
        # t * (t**2 + p); avoids (p/3)**3 underflowing in the discriminant
        s = cmath.sqrt(-p)
        return _polish(c, [-shift, s - shift, -s - shift])
    disc = (q / 2) ** 2 + (p / 3) ** 3
    err_disc = 16 * (abs(q) * err_q / 2 + abs(p) ** 2 * err_p / 9)
    if p != 0 and abs(disc) <= err_disc < 1e-3 * abs(q / 2) ** 2:
        # double root at -3q/(2p), simple root at 3q/p
        t_double = -3 * q / (2 * p)
        return _polish(c, [t_double - shift, t_double - shift, -2 * t_double - shift])
    s = cmath.sqrt(disc)
    w = -q / 2 + s if abs(-q / 2 + s) >= abs(-q / 2 - s) else -q / 2 - s
    u = w ** (1 / 3)
    ts = []
    for k in range(3):
        uk = u * ZETA3**k
        ts.append(uk - p / (3 * uk))
    roots = [t - shift for t in ts]
    return _polish(c, roots)


def _polish(c: CubicCoeffs, roots: list[complex]) -> list[complex]:
    out = []
    for i, x in enumerate(roots):
        others = [abs(x - y) for j, y in enumerate(roots) if j != i]
        gap = min(others)
        fx = poly_eval(c, x)
        dfx = 3 * x * x + 2 * c[0] * x + c[1]
        if fx == 0 or dfx == 0 or gap == 0:
            out.append(x)
            continue
        step = fx / dfx
        y = x - step
        # stay inside the root's own basin; reject steps that do not help
        if abs(step) < 0.1 * gap and abs(poly_eval(c, y)) < abs(fx):
            out.append(y)
        else:
            out.append(x)
    return out


def eigenvalues(M) -> list[complex]:
    c = char_coeffs(M)
    return quadratic_roots(c) if len(c) == 2 else cubic_roots(c)


def adjugate(B) -> np.ndarray:
    B = np.asarray(B, dtype=complex)
    n = B.shape[0]
    if n == 2:
        return np.array([[B[1, 1], -B[0, 1]], [-B[1, 0], B[0, 0]]])
    C = np.empty((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            r = [x for x in range(3) if x != i]
            s = [x for x in range(3) if x != j]
            C[i, j] = (-1) ** (i + j) * (B[r[0], s[0]] * B[r[1], s[1]] - B[r[0], s[1]] * B[r[1], s[0]])
    return C.T


def _unit(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def null_vector(M, E: complex) -> np.ndarray | None:
    """Largest adjugate column of ``M - E*I``, unit-normalized.

    Returns ``None`` when the adjugate vanishes (rank deficiency two or more).
    """
    A = np.asarray(M, dtype=complex)
    B = A - E * np.eye(A.shape[0])
    adj = adjugate(B)
    norms = np.linalg.norm(adj, axis=0)
    k = int(np.argmax(norms))
    scale = max(np.linalg.norm(B), 1.0) ** (A.shape[0] - 1)
    if norms[k] <= 1e3 * EPS * scale:
        return None
    return _unit(adj[:, k])


@dataclass(frozen=True)
class EigenSet:
    """Eigen-decomposition of a small complex symmetric matrix.

    ``vectors[k]`` belongs to ``values[k]``; vectors are unit 2-norm with the
    largest component real positive.  ``t_norms[k] = vectors[k] @ vectors[k]``.
    ``condition_flags[i, j]`` marks pairs closer than the degeneracy tolerance.
    """

    values: np.ndarray
    vectors: np.ndarray
    t_norms: np.ndarray
    condition_flags: np.ndarray
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.values)

    @property
    def near_degenerate(self) -> bool:
        return bool(np.any(self.condition_flags))


def eigensystem(M, tol: float = 1e-8) -> EigenSet:
    """Eigenvalues and right eigenvectors of a 2x2 or 3x3 symmetric matrix.

    Pairs of eigenvalues closer than ``tol * max(1, |M|_F)`` are flagged.  At
    an exact degeneracy with a single Jordan chain every member of the cluster
    receives the same vector; if the eigenvalue is semisimple the cluster
    members get an orthonormal null-space basis instead.
    """
    A = as_csym(M, atol=1e-12 * max(1.0, float(np.max(np.abs(M)))))
    n = A.shape[0]
    vals = np.array(eigenvalues(A), dtype=complex)
    scale = max(1.0, float(np.linalg.norm(A)))

    flags = np.zeros((n, n), dtype=bool)
    for i, j in itertools.combinations(range(n), 2):
        if abs(vals[i] - vals[j]) <= tol * scale:
            flags[i, j] = flags[j, i] = True

    vecs = np.empty((n, n), dtype=complex)
    used: dict[int, list[np.ndarray]] = {}
    for k in range(n):
        v = null_vector(A, vals[k])
        if v is None:
            # semisimple multiple eigenvalue: hand out null-space basis vectors
            cluster = min([k] + [j for j in range(n) if flags[k, j]])
            basis = used.get(cluster)
            if basis is None:
                B = A - vals[k] * np.eye(n)
                _, sv, vh = np.linalg.svd(B)
                null_dim = max(1, int(np.sum(sv <= 1e3 * EPS * scale)))
                basis = [_unit(vh[-i - 1].conj()) for i in range(null_dim)]
                used[cluster] = basis
            v = basis.pop(0) if len(basis) > 1 else basis[0]
        vecs[k] = v
    tn = np.array([t_product(v, v) for v in vecs])
    return EigenSet(vals, vecs, tn, flags, A)


def completeness_defect(es: EigenSet, rel_tol: float = 1e-7) -> float:
    """Max-norm of ``sum_j v_j v_j^T / (v_j^T v_j) - I``.

    Raises :class:`DefectiveMatrixError` when some ``|v^T v| / |v|^2`` falls
    below ``rel_tol``; the sum then loses about ``eps / |v^T v|**2`` and the
    result is noise.
    """
    n = es.dim
    for v, t in zip(es.vectors, es.t_norms):
        if abs(t) < rel_tol * np.vdot(v, v).real:
            raise DefectiveMatrixError(
                f"bilinear norm {abs(t):.3e} below threshold; matrix is at or too near an EP"
            )
    S = sum(np.outer(v, v) / t for v, t in zip(es.vectors, es.t_norms))
    return float(np.max(np.abs(S - np.eye(n))))


def eig_residual(es: EigenSet) -> float:
    """Largest ``|M v - E v|`` over the eigenpairs."""
    A = es.matrix
    return max(float(np.max(np.abs(A @ v - E * v))) for E, v in zip(es.values, es.vectors))


def trace_error(es: EigenSet) -> float:
    return abs(complex(np.sum(es.values)) - complex(np.trace(es.matrix)))


def pairwise_products(vectors: Sequence[np.ndarray]) -> np.ndarray:
    n = len(vectors)
    G = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            G[i, j] = t_product(vectors[i], vectors[j])
    return G
