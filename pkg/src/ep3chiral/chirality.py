"""Width pattern, phase coefficients and helix handedness near an EP3.

Levels are ranked by real part.  The middle level is either the broadest
(most negative imaginary part) or the narrowest; the normalized overlaps
``c_j = chi_j^T psi_EP`` then carry phases spaced by 120 degrees whose order
fixes the orientation of a helix through ``(cos phi_k, sin phi_k, Re E_k)``.

Phase assignment: rank 1 gets 0 degrees; with the middle level broadest the
next level lags by +120 and the top level sits at 240 (right-handed helix);
with the middle level narrowest the two upper assignments swap (left-handed).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .cmatrix import EigenSet, eigensystem, t_product
from .continuation import sheet_label
from .errors import (
    BranchTrackingError,
    InconsistencyError,
    IndeterminatePatternError,
    NonGenericTieError,
)
from .model import Family, coalesced_vector
from .puiseux import gauge_fix, gauge_index, radial_samples

REFERENCE_RADIUS = 1e-2
CONSISTENCY_DEG = 5.0


class Variant(str, Enum):
    MIDDLE_BROADEST = "MiddleBroadest"
    MIDDLE_NARROWEST = "MiddleNarrowest"


class Handedness(str, Enum):
    LEFT = "Left"
    RIGHT = "Right"


@dataclass(frozen=True)
class OrderedLevels:
    """``energies`` ascending by real part; ``perm_from_sheets[s-1]`` is the rank of sheet ``s``."""

    energies: np.ndarray
    perm_from_sheets: tuple[int, ...]
    re_gaps: tuple[float, float]

    @property
    def sheet_of_rank(self) -> tuple[int, ...]:
        out = [0] * len(self.perm_from_sheets)
        for s, rank in enumerate(self.perm_from_sheets, start=1):
            out[rank - 1] = s
        return tuple(out)


@dataclass(frozen=True)
class WidthPattern:
    variant: Variant
    margin: float


@dataclass(frozen=True)
class PhaseReport:
    """Coefficients ``c`` indexed by rank; offsets in degrees relative to rank 1, in (-180, 180]."""

    c: np.ndarray
    xi_magnitude: float
    perm: tuple[int, int, int]
    phase_offsets: np.ndarray
    magnitude_spread: float
    cube_misalignment_deg: float
    radius: float


@dataclass
class ChiralityReport:
    ordered: OrderedLevels
    width: WidthPattern
    phases: PhaseReport
    assigned_phases: tuple[float, float, float]
    handedness: Handedness
    helix: list[tuple[float, float, float]]
    max_disagreement_deg: float
    convention: str = "lagging=+120; middle broadest -> right-handed"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        cz = lambda z: [float(z.real), float(z.imag)]  # noqa: E731
        return {
            "ordered_energies": [cz(E) for E in self.ordered.energies],
            "perm_from_sheets": list(self.ordered.perm_from_sheets),
            "re_gaps": list(self.ordered.re_gaps),
            "width_pattern": self.width.variant.value,
            "width_margin": self.width.margin,
            "c": [cz(z) for z in self.phases.c],
            "xi_magnitude": self.phases.xi_magnitude,
            "measured_phase_offsets_deg": [float(x) for x in self.phases.phase_offsets],
            "fitted_perm": list(self.phases.perm),
            "magnitude_spread": self.phases.magnitude_spread,
            "cube_misalignment_deg": self.phases.cube_misalignment_deg,
            "assigned_phases_deg": list(self.assigned_phases),
            "max_disagreement_deg": self.max_disagreement_deg,
            "handedness": self.handedness.value,
            "helix": [list(p) for p in self.helix],
            "convention": self.convention,
        }


def order_levels(es: EigenSet | Sequence[complex], sheet_labels: Sequence[int] | None = None) -> OrderedLevels:
    """Rank levels by real part; ``sheet_labels[k]`` is the sheet of ``values[k]``."""
    vals = np.asarray(es.values if isinstance(es, EigenSet) else es, dtype=complex)
    n = len(vals)
    labels = list(sheet_labels) if sheet_labels is not None else list(range(1, n + 1))
    order = np.argsort(vals.real, kind="stable")
    re = vals.real[order]
    spread = float(np.max(np.abs(vals - vals.mean())))
    gaps = np.diff(re)
    if np.any(gaps <= 1e-10 * spread):
        raise NonGenericTieError(f"two real parts coincide within 1e-10 of the spread: {re}")
    perm = [0] * n
    for rank, k in enumerate(order, start=1):
        perm[labels[k] - 1] = rank
    return OrderedLevels(vals[order], tuple(perm), tuple(float(g) for g in gaps))


def width_pattern(ol: OrderedLevels) -> WidthPattern:
    im = ol.energies.imag
    lo, mid, hi = im
    if mid < min(lo, hi):
        return WidthPattern(Variant.MIDDLE_BROADEST, float(min(lo, hi) - mid))
    if mid > max(lo, hi):
        return WidthPattern(Variant.MIDDLE_NARROWEST, float(mid - max(lo, hi)))
    raise IndeterminatePatternError(f"Im(E2) = {mid} is not strictly extremal among {tuple(im)}")


def _wrap(deg: float) -> float:
    x = math.fmod(deg, 360.0)
    if x <= -180:
        x += 360
    elif x > 180:
        x -= 360
    return x


def _follow_sqrt(N: np.ndarray, start: complex) -> np.ndarray:
    """Square roots of ``N[k]`` continued along the samples from ``start`` (a root of ``N[0]``)."""
    out = np.empty(len(N), dtype=complex)
    out[0] = start
    for k in range(1, len(N)):
        s = cmath.sqrt(N[k])
        z = s / out[k - 1]
        if abs(z.real) < 0.5 * abs(z):
            raise BranchTrackingError(
                f"square-root continuation ambiguous between samples {k - 1} and {k}; refine the ray"
            )
        out[k] = s if z.real > 0 else -s
    return out


def _reference_roots(N0: np.ndarray, dE0: np.ndarray) -> np.ndarray:
    """Roots of ``N0`` of the form ``dE0 * kappa_j`` with all ``kappa_j`` on one branch.

    ``N_j / dE_j**2`` tends to a sheet-independent constant; its principal
    root on sheet 1 picks the branch and the other sheets take the root
    nearest to it.
    """
    K = N0 / dE0**2
    k1 = cmath.sqrt(K[0])
    kap = []
    for Kj in K:
        r = cmath.sqrt(Kj)
        kap.append(r if abs(r - k1) <= abs(r + k1) else -r)
    return dE0 * np.array(kap)


def phase_coefficients(f: Family, lam: complex, center: complex, psi_ep,
                       ref_radius: float = REFERENCE_RADIUS, per_decade: int = 10) -> PhaseReport:
    """``c_j = psi_j^T psi_EP / sqrt(psi_j^T psi_j)`` ranked by ``Re E_j``.

    Eigenvectors are gauged like ``psi_ep``.  At ``ref_radius`` on the ray
    through ``lam`` the square root is ``(E_j - centroid) * kappa`` with one
    common branch of ``kappa`` (see :func:`_reference_roots`); it is then
    followed by continuity down to ``|lam - center|``.
    """
    center, lam = complex(center), complex(lam)
    r = abs(lam - center)
    if r == 0:
        raise ValueError("lam must differ from center")
    u = (lam - center) / r
    if r < ref_radius:
        m = max(2, int(math.ceil(per_decade * math.log10(ref_radius / r))) + 1)
        radii = np.geomspace(ref_radius, r, m)
    else:
        radii = np.array([r])
    s = radial_samples(f, center, u, radii, per_decade=per_decade)
    gidx = gauge_index(psi_ep)
    psi = gauge_fix(psi_ep, gidx)
    n = s.nsheets
    V = np.array([[gauge_fix(v, gidx) for v in row] for row in s.vectors])
    N = np.einsum("rjk,rjk->rj", V, V)
    dE = s.energies - s.energies.mean(axis=1, keepdims=True)
    start = _reference_roots(N[0], dE[0])
    c = np.empty(n, dtype=complex)
    for j in range(n):
        root = _follow_sqrt(N[:, j], start[j])
        c[j] = t_product(V[-1, j], psi) / root[-1]

    ol = order_levels(s.energies[-1], list(range(1, n + 1)))
    c_ranked = np.array([c[sheet - 1] for sheet in ol.sheet_of_rank])
    offsets = np.array([_wrap(math.degrees(cmath.phase(z / c_ranked[0]))) for z in c_ranked])
    mags = np.abs(c_ranked)
    # nearest j-pattern: offset_k ~ 120 * j_k (mod 360)
    perm = tuple(int(round((o % 360) / 120)) % 3 for o in offsets)
    cubes = [math.degrees(cmath.phase((c_ranked[a] / c_ranked[b]) ** 3))
             for a in range(n) for b in range(a + 1, n)]
    return PhaseReport(
        c=c_ranked,
        xi_magnitude=float(mags.mean()),
        perm=perm,
        phase_offsets=offsets,
        magnitude_spread=float(mags.max() / mags.min() - 1),
        cube_misalignment_deg=float(max(abs(_wrap(x)) for x in cubes)),
        radius=r,
    )


def assigned_phases(variant: Variant) -> tuple[float, float, float]:
    if variant is Variant.MIDDLE_BROADEST:
        return (0.0, 120.0, 240.0)
    return (0.0, 240.0, 120.0)


def handedness_of(phases_deg: Sequence[float]) -> Handedness:
    steps = [(b - a) % 360 for a, b in zip(phases_deg[:-1], phases_deg[1:])]
    if all(abs(st - 120) < 1e-9 for st in steps):
        return Handedness.RIGHT
    if all(abs(st - 240) < 1e-9 for st in steps):
        return Handedness.LEFT
    raise ValueError(f"phases {tuple(phases_deg)} are not spaced by 120 degrees")


def helix_points(phases_deg: Sequence[float], re_energies: Sequence[float]) -> list[tuple[float, float, float]]:
    return [(math.cos(math.radians(p)), math.sin(math.radians(p)), float(h))
            for p, h in zip(phases_deg, re_energies)]


def helix_curve(phases_deg: Sequence[float], re_energies: Sequence[float], n: int = 60) -> np.ndarray:
    """``n`` points on the helix: azimuth piecewise linear in height through the levels.

    Each step between neighbouring levels turns by the signed angle in
    (-180, 180], so the curve winds the same way as the phases.
    """
    az = [float(phases_deg[0])]
    for a, b in zip(phases_deg[:-1], phases_deg[1:]):
        az.append(az[-1] + _wrap(b - a))
    h = np.asarray(re_energies, dtype=float)
    hs = np.linspace(h[0], h[-1], n)
    theta = np.radians(np.interp(hs, h, az))
    return np.column_stack([np.cos(theta), np.sin(theta), hs])


def classify(f: Family, lam: complex, center: complex = 0, psi_ep=None,
             tolerance_deg: float = CONSISTENCY_DEG) -> ChiralityReport:
    """Width pattern, assigned phases and handedness at ``lam``, cross-checked against measured phases.

    ``psi_ep`` defaults to the coalesced vector of ``H(center)`` at its mean
    eigenvalue.  Disagreement above ``tolerance_deg`` between measured and
    assigned phases raises :class:`InconsistencyError`.
    """
    center, lam = complex(center), complex(lam)
    if psi_ep is None:
        M = f.at(center)
        psi_ep = coalesced_vector(M, complex(np.trace(M)) / f.dim)
    es = eigensystem(f.at(lam))
    phases = phase_coefficients(f, lam, center, psi_ep)
    ol = order_levels(es, sheet_label(f, lam, center))
    width = width_pattern(ol)
    assigned = assigned_phases(width.variant)
    worst = max(abs(_wrap(m - a)) for m, a in zip(phases.phase_offsets, assigned))
    if worst > tolerance_deg:
        raise InconsistencyError(
            f"measured phase offsets {tuple(np.round(phases.phase_offsets, 3))} disagree with the "
            f"{width.variant.value} assignment {assigned} by {worst:.2f} deg"
        )
    hand = handedness_of(assigned)
    helix = helix_points(assigned, ol.energies.real)
    return ChiralityReport(ol, width, phases, assigned, hand, helix, float(worst))
