"""Eigenvalue branch tracking along paths in the complex parameter plane.

Sheet convention: at a reference point ``ref`` (default: on the positive real
ray from the center) the levels are labelled by the polar angle of
``E - centroid`` in ``[0, 2*pi)``: the smallest angle is sheet 1 and the
remaining sheets follow counterclockwise.  A point ``lam`` is reached from
``ref`` radially to ``|lam - center|`` and then along the arc through the
principal angle of ``lam - center``.  With this convention sheet ``j``
carries the cube root ``|lam - c|**(1/3) * exp(i*(theta + 2*pi*(j-1))/3)``.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cmatrix import EigenSet, eigensystem, t_product
from .errors import OnSingularityError, StepSizeError
from .model import Family

COLLISION_TOL = 1e-12


@dataclass(frozen=True)
class LambdaPath:
    samples: np.ndarray

    @property
    def closed(self) -> bool:
        return len(self.samples) > 1 and abs(self.samples[0] - self.samples[-1]) <= 1e-12 * (1 + abs(self.samples[0]))

    @classmethod
    def segment(cls, a: complex, b: complex, n: int = 100) -> "LambdaPath":
        return cls(np.linspace(complex(a), complex(b), n + 1))

    @classmethod
    def circle(cls, center: complex, radius: float, loops: int = 1, steps_per_loop: int = 360,
               start_angle: float = 0.0, clockwise: bool = False) -> "LambdaPath":
        sgn = -1 if clockwise else 1
        k = np.arange(loops * steps_per_loop + 1)
        theta = start_angle + sgn * 2 * np.pi * k / steps_per_loop
        pts = complex(center) + radius * np.exp(1j * theta)
        pts[-1] = complex(center) + radius * np.exp(1j * start_angle)
        return cls(pts)

    @classmethod
    def arc(cls, center: complex, radius: float, theta0: float, theta1: float, step_deg: float = 1.0) -> "LambdaPath":
        n = max(1, int(math.ceil(abs(theta1 - theta0) / math.radians(step_deg))))
        return cls(complex(center) + radius * np.exp(1j * np.linspace(theta0, theta1, n + 1)))

    @classmethod
    def radial(cls, center: complex, direction: complex, radii: Sequence[float]) -> "LambdaPath":
        u = complex(direction) / abs(complex(direction))
        return cls(complex(center) + u * np.asarray(radii, dtype=float))

    def reversed(self) -> "LambdaPath":
        return LambdaPath(self.samples[::-1].copy())


@dataclass(frozen=True)
class LabeledBranch:
    sheet: int
    lambdas: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray
    t_norms: np.ndarray


@dataclass(frozen=True)
class MonodromyResult:
    """``permutation[j-1]`` is the sheet that branch ``j`` ends on."""

    permutation: tuple[int, ...]
    vector_factors: tuple[complex, ...]
    loops: int

    @property
    def order(self) -> int:
        return permutation_order(self.permutation)


def compose(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """``p`` after ``q`` for 1-based permutation tuples."""
    return tuple(p[q[j] - 1] for j in range(len(q)))


def permutation_power(p: Sequence[int], k: int) -> tuple[int, ...]:
    out = tuple(range(1, len(p) + 1))
    for _ in range(k):
        out = compose(p, out)
    return out


def inverse(p: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(p)
    for j, pj in enumerate(p, start=1):
        out[pj - 1] = j
    return tuple(out)


def permutation_order(p: Sequence[int]) -> int:
    ident = tuple(range(1, len(p) + 1))
    q, k = tuple(p), 1
    while q != ident:
        q, k = compose(p, q), k + 1
    return k


def match(prev: Sequence[complex], new: Sequence[complex]) -> tuple[tuple[int, ...], float, float]:
    """Brute-force optimal assignment; returns (perm, best cost, runner-up cost).

    ``perm[i]`` is the index in ``new`` continuing ``prev[i]``.
    """
    n = len(prev)
    costs = []
    for perm in itertools.permutations(range(n)):
        costs.append((sum(abs(prev[i] - new[perm[i]]) for i in range(n)), perm))
    costs.sort(key=lambda t: t[0])
    return costs[0][1], costs[0][0], costs[1][0]


def reference_labels(values: Sequence[complex]) -> list[int]:
    """Sheet labels by polar angle of ``E - centroid``; ``labels[k]`` is the sheet of ``values[k]``."""
    vals = np.asarray(values, dtype=complex)
    d = vals - vals.mean()
    ang = np.mod(np.angle(d), 2 * np.pi)
    order = np.argsort(ang, kind="stable")
    labels = [0] * len(vals)
    for sheet, k in enumerate(order, start=1):
        labels[int(k)] = sheet
    return labels


def _gauge(v: np.ndarray, prev: np.ndarray) -> np.ndarray:
    # continuity gauge: v^T prev real positive; fall back to largest component
    tp = t_product(v, prev)
    if abs(tp) >= 1e-12:
        return v * (abs(tp) / tp)
    k = int(np.argmax(np.abs(prev)))
    z = np.conj(v[k]) * prev[k]
    return v * (z / abs(z)) if z != 0 else v


def _check_collision(es: EigenSet, lam: complex) -> None:
    vals = es.values
    scale = max(1.0, float(np.max(np.abs(vals))))
    for i, j in itertools.combinations(range(len(vals)), 2):
        if abs(vals[i] - vals[j]) <= COLLISION_TOL * scale:
            raise OnSingularityError(f"eigenvalues collide at lambda = {lam}")


class _Tracker:
    def __init__(self, f: Family, max_refine: int):
        self.f = f
        self.max_refine = max_refine

    def step(self, lam_a, lam_b, E, V, depth=0):
        """Advance from ``lam_a`` (state E, V ordered by branch) to ``lam_b``."""
        es = eigensystem(self.f.at(lam_b))
        _check_collision(es, lam_b)
        perm, best, second = match(E, es.values)
        if second < 2 * best:
            if depth >= self.max_refine:
                raise StepSizeError(
                    f"ambiguous eigenvalue matching between {lam_a} and {lam_b}; refine the path"
                )
            mid = (lam_a + lam_b) / 2
            E, V = self.step(lam_a, mid, E, V, depth + 1)
            return self.step(mid, lam_b, E, V, depth + 1)
        newE = np.array([es.values[perm[i]] for i in range(len(E))])
        newV = np.array([_gauge(es.vectors[perm[i]], V[i]) for i in range(len(E))])
        return newE, newV


def track(f: Family, path: LambdaPath, seed: EigenSet | None = None,
          labels: Sequence[int] | None = None, max_refine: int = 4) -> list[LabeledBranch]:
    """Continue every eigenpair of ``H(path[0])`` along the path.

    ``labels[k]`` is the sheet given to seed eigenvalue ``k`` (default
    ``k + 1``).  Branches are returned ordered by sheet.  Ambiguous steps are
    bisected up to ``max_refine`` times before :class:`StepSizeError`.
    """
    lams = np.asarray(path.samples, dtype=complex)
    if seed is None:
        seed = eigensystem(f.at(lams[0]))
    _check_collision(seed, lams[0])
    n = seed.dim
    labels = list(labels) if labels is not None else list(range(1, n + 1))
    tr = _Tracker(f, max_refine)
    E = np.array(seed.values)
    V = np.array(seed.vectors)
    Es, Vs = [E], [V]
    for a, b in zip(lams[:-1], lams[1:]):
        E, V = tr.step(a, b, E, V)
        Es.append(E)
        Vs.append(V)
    Es = np.array(Es)
    Vs = np.array(Vs)
    out = []
    for k in np.argsort(labels):
        tn = np.einsum("ij,ij->i", Vs[:, k], Vs[:, k])
        out.append(LabeledBranch(labels[k], lams.copy(), Es[:, k].copy(), Vs[:, k].copy(), tn))
    return out


def monodromy(f: Family, center: complex, radius: float, loops: int = 1,
              steps_per_loop: int = 360, clockwise: bool = False) -> MonodromyResult:
    """Permutation and vector factors after ``loops`` circuits around ``center``.

    Loops start on the positive real ray and run counterclockwise unless
    ``clockwise``.  ``vector_factors[j-1]`` relates the final vector of branch
    ``j`` to the initial vector of the sheet it ends on (both unit norm,
    continuity gauge).
    """
    path = LambdaPath.circle(center, radius, loops, steps_per_loop, clockwise=clockwise)
    seed = eigensystem(f.at(path.samples[0]))
    labels = reference_labels(seed.values)
    branches = track(f, path, seed, labels)
    E0 = np.array([b.energies[0] for b in branches])
    V0 = np.array([b.vectors[0] for b in branches])
    E1 = np.array([b.energies[-1] for b in branches])
    perm_idx, _, _ = match(E1, E0)
    perm = tuple(int(i) + 1 for i in perm_idx)
    factors = []
    for j, b in enumerate(branches):
        v0 = V0[perm_idx[j]]
        factors.append(complex(np.vdot(v0, b.vectors[-1]) / np.vdot(v0, v0)))
    return MonodromyResult(perm, tuple(factors), loops)


def path_to(center: complex, lam: complex, ref: complex | None = None, turns: int = 0,
            step_deg: float = 1.0, radial_steps: int = 40) -> LambdaPath:
    """Reference point -> radial leg -> arc (principal angle plus ``turns`` full circles) -> ``lam``."""
    center, lam = complex(center), complex(lam)
    r = abs(lam - center)
    if ref is None:
        ref = center + r
    ref = complex(ref)
    r0, th0 = abs(ref - center), cmath.phase(ref - center)
    th1 = cmath.phase(lam - center)
    # keep the arc on the same side as the principal-angle difference
    dth = (th1 - th0 + math.pi) % (2 * math.pi) - math.pi
    if dth == -math.pi:
        dth = math.pi
    dth += 2 * math.pi * turns
    pts = [ref]
    if r != r0:
        radii = np.geomspace(r0, r, radial_steps + 1)[1:]
        pts.extend(center + radii * cmath.exp(1j * th0))
    if dth != 0:
        n = max(1, int(math.ceil(abs(dth) / math.radians(step_deg))))
        thetas = th0 + dth * np.arange(1, n + 1) / n
        pts.extend(center + r * np.exp(1j * thetas))
    if len(pts) == 1:
        pts.append(ref)
    return LambdaPath(np.array(pts, dtype=complex))


def continue_to(f: Family, lam: complex, center: complex, ref: complex | None = None,
                turns: int = 0) -> list[LabeledBranch]:
    path = path_to(center, lam, ref, turns)
    seed = eigensystem(f.at(path.samples[0]))
    return track(f, path, seed, reference_labels(seed.values))


def sheet_label(f: Family, lam: complex, center: complex, ref: complex | None = None,
                turns: int = 0) -> tuple[int, ...]:
    """Sheet of each eigenvalue of ``H(lam)`` in :func:`eigensystem` order."""
    if complex(lam) == complex(center):
        raise ValueError("lam must differ from center")
    branches = continue_to(f, lam, center, ref, turns)
    vals = eigensystem(f.at(lam)).values
    ends = [b.energies[-1] for b in branches]
    perm, _, _ = match(vals, ends)
    return tuple(branches[perm[k]].sheet for k in range(len(vals)))
