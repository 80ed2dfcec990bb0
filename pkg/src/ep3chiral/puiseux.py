"""Fractional power laws near an exceptional point.

Along a ray ``lam = center + r * u`` the levels of an EP of order N behave as
``|E_j - E_c| ~ |a1| r**(1/N)`` and the bilinear overlaps
``psi_j^T psi_j`` and ``psi_j^T psi_EP`` vanish like ``r**((N-1)/N)``.
This module samples those quantities on labelled sheets and fits exponents
in log-log space.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .cmatrix import EigenSet, t_product
from .continuation import LambdaPath, continue_to, track
from .errors import GaugeError, InvalidSampleError
from .model import Family

DEFAULT_RADII = np.geomspace(1e-2, 1e-6, 9)


@dataclass(frozen=True)
class PowerFit:
    exponent: float
    prefactor_magnitude: float
    r_squared: float
    residuals: np.ndarray


def fit_power(r, y=None) -> PowerFit:
    """Least-squares line through ``(log r, log y)``.

    Accepts either two sequences or a single sequence of ``(r, y)`` pairs.
    """
    if y is None:
        pairs = np.asarray(r, dtype=float)
        r, y = pairs[:, 0], pairs[:, 1]
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(r) != len(y) or len(r) < 3:
        raise InvalidSampleError("need at least 3 (r, y) samples")
    if np.any(y <= 0) or np.any(r <= 0):
        raise InvalidSampleError("power fit needs strictly positive r and y")
    x, z = np.log(r), np.log(y)
    slope, intercept = np.polyfit(x, z, 1)
    resid = z - (slope * x + intercept)
    ss_tot = float(np.sum((z - z.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    return PowerFit(float(slope), float(np.exp(intercept)), r2, resid)


def gauge_index(psi_ep) -> int:
    """Component used for the gauge: the last one unless it (nearly) vanishes."""
    psi_ep = np.asarray(psi_ep)
    if abs(psi_ep[-1]) > 1e-10 * np.linalg.norm(psi_ep):
        return len(psi_ep) - 1
    return int(np.argmax(np.abs(psi_ep)))


def gauge_fix(v, k: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if abs(v[k]) < 1e-10 * np.linalg.norm(v):
        raise GaugeError(f"gauge component {k} vanishes (|v_k| = {abs(v[k]):.2e})")
    return v / v[k]


@dataclass(frozen=True)
class RadialSamples:
    """Sheet-labelled eigen-data along a ray; arrays indexed ``[radius, sheet]``."""

    center: complex
    direction: complex
    radii: np.ndarray
    lambdas: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray

    @property
    def nsheets(self) -> int:
        return self.energies.shape[1]

    def cube_root(self, k: int) -> complex:
        """Principal N-th root of ``lam_k - center`` (the sheet-1 root)."""
        return cmath.exp(cmath.log(self.lambdas[k] - self.center) / self.nsheets)


def radial_samples(f: Family, center: complex = 0, direction: complex = 1,
                   radii=DEFAULT_RADII, per_decade: int = 10) -> RadialSamples:
    """Track all sheets from the outermost radius inward along ``direction``.

    Sheet labels at the outermost radius come from :func:`continue_to`, so
    they follow the shared reference-ray convention.
    """
    radii = np.asarray(radii, dtype=float)
    if len(radii) < 1 or np.any(radii <= 0) or np.any(np.diff(radii) >= 0):
        raise InvalidSampleError("radii must be positive and strictly decreasing")
    center = complex(center)
    u = complex(direction) / abs(complex(direction))
    start = continue_to(f, center + radii[0] * u, center)
    n = len(start)

    # dense geometric grid that contains every requested radius
    dense = [radii[0]]
    for a, b in zip(radii[:-1], radii[1:]):
        m = max(1, int(np.ceil(per_decade * np.log10(a / b))))
        dense.extend(np.geomspace(a, b, m + 1)[1:])
    dense = np.array(dense)
    keep = [int(np.argmin(np.abs(dense - r))) for r in radii]

    seedE = np.array([b.energies[-1] for b in start])
    seedV = np.array([b.vectors[-1] for b in start])
    seed = EigenSet(seedE, seedV, np.einsum("ij,ij->i", seedV, seedV),
                    np.zeros((n, n), dtype=bool), f.at(center + radii[0] * u))
    branches = track(f, LambdaPath.radial(center, u, dense), seed, [b.sheet for b in start])
    E = np.array([[b.energies[k] for b in branches] for k in keep])
    V = np.array([[b.vectors[k] for b in branches] for k in keep])
    return RadialSamples(center, u, radii, center + u * radii, E, V)


@dataclass(frozen=True)
class EnergyExpansion:
    fits: list[PowerFit]
    E_c: complex
    side_spread: np.ndarray      # per radius: max/min pairwise |E_i - E_j| - 1
    angle_error_deg: np.ndarray  # per radius: max deviation of vertex separations from 360/N
    centroid_drift: np.ndarray


def verify_energy_expansion(f: Family, center: complex = 0, direction: complex = 1,
                            radii=DEFAULT_RADII, E_c: complex | None = None,
                            samples: RadialSamples | None = None) -> EnergyExpansion:
    """Fit ``|E_j - E_c|`` against ``r`` on every sheet.

    ``E_c`` defaults to the eigenvalue centroid at the smallest radius (the
    leading splitting terms cancel in the mean).
    """
    s = samples if samples is not None else radial_samples(f, center, direction, radii)
    cent = s.energies.mean(axis=1)
    if E_c is None:
        E_c = complex(cent[-1])
    fits = [fit_power(s.radii, np.abs(s.energies[:, j] - E_c)) for j in range(s.nsheets)]
    n = s.nsheets
    spreads, angles = [], []
    for row, c in zip(s.energies, cent):
        sides = [abs(row[i] - row[j]) for i in range(n) for j in range(i + 1, n)]
        spreads.append(max(sides) / min(sides) - 1)
        ang = np.sort(np.mod(np.angle(row - c), 2 * np.pi))
        gaps = np.diff(np.append(ang, ang[0] + 2 * np.pi))
        angles.append(float(np.max(np.abs(np.degrees(gaps) - 360 / n))))
    return EnergyExpansion(fits, complex(E_c), np.array(spreads), np.array(angles), np.abs(cent - E_c))


@dataclass(frozen=True)
class OverlapScaling:
    """Per-sheet fits plus pooled fits sharing one slope across sheets.

    The prefactor spread uses per-sheet prefactors at the pooled slope, so it
    compares the sheets at equal exponent.  Sheet-to-sheet differences are an
    O(r**(1/N)) effect; measure it at small radii.
    """

    norm_fits: list[PowerFit]
    overlap_fits: list[PowerFit]
    norm_fit: PowerFit
    overlap_fit: PowerFit
    norm_prefactors: np.ndarray
    overlap_prefactors: np.ndarray

    @property
    def norm_prefactor_spread(self) -> float:
        return _spread(self.norm_prefactors)

    @property
    def overlap_prefactor_spread(self) -> float:
        return _spread(self.overlap_prefactors)


def _spread(pre: np.ndarray) -> float:
    return float((pre.max() - pre.min()) / pre.mean())


def pooled_fit(r, ys) -> tuple[PowerFit, np.ndarray]:
    """One slope through several series sharing ``r``; returns fit and per-series prefactors."""
    x = np.log(np.asarray(r, dtype=float))
    Z = np.log(np.asarray(ys, dtype=float))
    xc = x - x.mean()
    slope = float(np.sum(Z * xc) / (Z.shape[0] * np.sum(xc * xc)))
    intercepts = Z.mean(axis=1) - slope * x.mean()
    resid = Z - (slope * x + intercepts[:, None])
    ss_tot = float(np.sum((Z - Z.mean(axis=1, keepdims=True)) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    pre = np.exp(intercepts)
    return PowerFit(slope, float(np.exp(intercepts.mean())), r2, resid.ravel()), pre


def verify_overlap_scaling(f: Family, center: complex, direction: complex, radii,
                           psi_ep, samples: RadialSamples | None = None) -> OverlapScaling:
    """Fit ``|psi_j^T psi_j|`` and ``|psi_j^T psi_EP|`` against ``r`` per sheet.

    Vectors are gauged so the component singled out by :func:`gauge_index`
    equals 1, matching the gauge of ``psi_ep``.
    """
    s = samples if samples is not None else radial_samples(f, center, direction, radii)
    k = gauge_index(psi_ep)
    psi = gauge_fix(psi_ep, k)
    norms, ovs = [], []
    for j in range(s.nsheets):
        vs = [gauge_fix(v, k) for v in s.vectors[:, j]]
        norms.append([abs(t_product(v, v)) for v in vs])
        ovs.append([abs(t_product(v, psi)) for v in vs])
    nfit, npre = pooled_fit(s.radii, norms)
    ofit, opre = pooled_fit(s.radii, ovs)
    return OverlapScaling([fit_power(s.radii, y) for y in norms], [fit_power(s.radii, y) for y in ovs],
                          nfit, ofit, npre, opre)


@dataclass(frozen=True)
class PhiExtract:
    """Expansion vectors ``phi_m`` on each sheet.

    ``vectors[j]`` is the sheet-(j+1) vector in the convention where the
    common factor is the principal root, so sheets differ by
    ``exp(2*pi*i*m*j/N)``.  ``projected`` is the sheet-independent vector
    from the discrete Fourier projection across sheets, extrapolated in
    ``lam`` over two radii.
    """

    order: int
    vectors: np.ndarray
    consistency: float
    projected: np.ndarray | None = None


def _sheet_displacements(s: RadialSamples, k: int, psi: np.ndarray, gidx: int) -> np.ndarray:
    return np.array([gauge_fix(v, gidx) - psi for v in s.vectors[k]])


def _consistency(vectors: np.ndarray, m: int, n: int) -> float:
    phase = cmath.exp(2j * cmath.pi * m / n)
    ref = np.max(np.abs(vectors))
    worst = 0.0
    for j in range(n - 1):
        a, b = vectors[j], vectors[j + 1]
        mask = np.abs(a) > 1e-8 * ref
        worst = max(worst, float(np.max(np.abs(b[mask] / (a[mask] * phase) - 1))))
    return worst


def extract_phi(f: Family, center: complex, direction: complex, r: float, m: int,
                psi_ep, ratio: float = 8.0, richardson: bool = False) -> PhiExtract:
    """Finite-radius estimates of ``phi_m`` from ``psi_j = psi_EP + sum w^k phi_k``.

    ``m = 1``: ``(psi_j - psi_EP) / w`` at radius ``r`` (with ``richardson``,
    the O(w) term is removed using a second radius ``r / ratio``).  ``m = 2``:
    Richardson difference of that quotient at ``r`` and ``r / ratio``.  ``w``
    is the principal root of ``lam - center``.
    """
    if m not in (1, 2):
        raise ValueError("only m = 1 or 2 is supported")
    gidx = gauge_index(psi_ep)
    psi = gauge_fix(psi_ep, gidx)
    s = radial_samples(f, center, direction, [r, r / ratio])
    n = s.nsheets
    w0, w1 = s.cube_root(0), s.cube_root(1)
    Q0 = _sheet_displacements(s, 0, psi, gidx) / w0
    Q1 = _sheet_displacements(s, 1, psi, gidx) / w1
    if m == 1:
        vecs = (w0 * Q1 - w1 * Q0) / (w0 - w1) if richardson else Q0
    else:
        vecs = (Q0 - Q1) / (w0 - w1)
    return PhiExtract(m, vecs, _consistency(vecs, m, n), extrapolated_projection(s, psi, gidx, m))


def sheet_projection(s: RadialSamples, k: int, psi: np.ndarray, gidx: int, m: int) -> np.ndarray:
    """``phi_m`` from the discrete Fourier transform over the N sheets at radius ``k``.

    ``sum_j zeta**(-m j) (psi_j - psi_EP) = N (w**m phi_m + w**(m+N) phi_(m+N) + ...)``
    so the estimate is exact up to O(r).
    """
    n = s.nsheets
    w = s.cube_root(k)
    D = _sheet_displacements(s, k, psi, gidx)
    zeta = cmath.exp(2j * cmath.pi / n)
    acc = sum(zeta ** (-m * j) * D[j] for j in range(n))
    return acc / (n * w**m)


def extrapolated_projection(s: RadialSamples, psi: np.ndarray, gidx: int, m: int) -> np.ndarray:
    """:func:`sheet_projection` at the first two radii, linearly extrapolated to ``lam = center``."""
    d0 = s.lambdas[0] - s.center
    d1 = s.lambdas[1] - s.center
    P0 = sheet_projection(s, 0, psi, gidx, m)
    P1 = sheet_projection(s, 1, psi, gidx, m)
    return (d0 * P1 - d1 * P0) / (d0 - d1)


@dataclass
class AppendixReport:
    order: int
    overlap_exponent: float
    expected_exponent: float
    orthogonality: dict[int, float]        # m -> |psi_EP^T phi_m| / (|psi_EP| |phi_m|)
    pair_orthogonality: dict[tuple[int, int], float]
    pairs_vacuous: bool
    overlap: OverlapScaling | None = None

    def as_dict(self) -> dict:
        return {
            "order": self.order,
            "overlap_exponent": self.overlap_exponent,
            "expected_exponent": self.expected_exponent,
            "orthogonality": {str(k): v for k, v in self.orthogonality.items()},
            "pair_orthogonality": {f"{a},{b}": v for (a, b), v in self.pair_orthogonality.items()},
            "pairs_vacuous": self.pairs_vacuous,
        }


def appendix_report(f: Family, center: complex, N: int, radii=DEFAULT_RADII, psi_ep=None,
                    E_c: complex | None = None, direction: complex = 1,
                    r_phi: float = 1e-6, ratio: float = 8.0) -> AppendixReport:
    """Overlap exponent against ``(N-1)/N`` plus the orthogonality residuals.

    Residuals ``psi_EP^T phi_m`` are reported for ``m = 1 .. N-1`` and
    ``phi_m^T phi_m'`` for ``m + m' <= N - 2`` (no such pairs for N <= 3).
    """
    if N not in (2, 3) or f.dim != N:
        raise ValueError("appendix_report supports N = 2 or 3 with a matching family")
    center = complex(center)
    if psi_ep is None:
        from .model import coalesced_vector
        if E_c is None:
            E_c = complex(np.trace(f.at(center))) / N
        psi_ep = coalesced_vector(f.at(center), E_c)
    s = radial_samples(f, center, direction, radii)
    ov = verify_overlap_scaling(f, center, direction, radii, psi_ep, samples=s)
    gidx = gauge_index(psi_ep)
    psi = gauge_fix(psi_ep, gidx)
    sphi = radial_samples(f, center, direction, [r_phi, r_phi / ratio])
    phis = {m: extrapolated_projection(sphi, psi, gidx, m) for m in range(1, N)}
    orth = {m: abs(t_product(psi, p)) / (np.linalg.norm(psi) * np.linalg.norm(p)) for m, p in phis.items()}
    pairs = {}
    for a in range(1, N):
        for b in range(a, N):
            if a + b <= N - 2:
                pairs[(a, b)] = abs(t_product(phis[a], phis[b])) / (np.linalg.norm(phis[a]) * np.linalg.norm(phis[b]))
    return AppendixReport(N, ov.overlap_fit.exponent, (N - 1) / N, orth, pairs, not pairs, ov)
