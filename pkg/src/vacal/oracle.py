"""Definitional verifiers that do not share code paths with the engines.

``subgradient_membership_exact`` decides the subgradient inequality with its
own exact simplex solver.  The sampling estimators discretize the limits in
the definitions of the Clarke derivative, Fréchet normals and limiting
normals; their difference quotients and per-point cones are exact, only the
limit itself is truncated, so they serve as one-sided refuters and coverage
probes rather than sources of truth.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .pl_functions import INF, CellPL, ConvexPL, eval_pl, to_cells
from .polyhedra import PolyUnion, Polyhedron, as_union, union_subset
from .rational import dot, q, vec

# ---------------------------------------------------------------------------
# exact simplex


class LPResult(tuple):
    """``(status, value, point)`` with status in optimal / infeasible / unbounded."""

    __slots__ = ()

    def __new__(cls, status, value=None, point=None):
        return super().__new__(cls, (status, value, point))

    @property
    def status(self):
        return self[0]

    @property
    def value(self):
        return self[1]

    @property
    def point(self):
        return self[2]


def _pivot(T, basis, r, c):
    inv = 1 / T[r][c]
    T[r] = [v * inv for v in T[r]]
    for i in range(len(T)):
        if i != r and T[i][c] != 0:
            f = T[i][c]
            T[i] = [a - f * b for a, b in zip(T[i], T[r])]
    basis[r] = c


def _run(T, basis, ncols, allowed):
    """Minimize the objective stored in the last row; Bland's rule."""
    obj = T[-1]
    while True:
        enter = next((j for j in range(ncols) if allowed[j] and obj[j] < 0), None)
        if enter is None:
            return "optimal"
        best, leave = None, None
        for i in range(len(T) - 1):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return "unbounded"
        _pivot(T, basis, leave, enter)
        obj = T[-1]


def simplex(c, A_eq, b_eq) -> LPResult:
    """``min c.z  s.t.  A_eq z = b_eq, z >= 0`` in exact arithmetic (two phases)."""
    c = [q(v) for v in c]
    m, n = len(A_eq), len(c)
    rows = []
    for a, b in zip(A_eq, b_eq):
        a, b = [q(v) for v in a], q(b)
        if b < 0:
            a, b = [-v for v in a], -b
        rows.append((a, b))
    # phase one: artificial variables n..n+m-1
    T = [a + [Fraction(int(i == k)) for k in range(m)] + [b] for i, (a, b) in enumerate(rows)]
    basis = [n + i for i in range(m)]
    phase1 = [Fraction(0)] * n + [Fraction(1)] * m + [Fraction(0)]
    for i in range(m):
        phase1 = [p - t for p, t in zip(phase1, T[i])]
    T.append(phase1)
    _run(T, basis, n + m, [True] * (n + m))
    if T[-1][-1] != 0:
        return LPResult("infeasible")
    # drive artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= n:
            j = next((j for j in range(n) if T[i][j] != 0), None)
            if j is not None:
                _pivot(T, basis, i, j)
    obj = c + [Fraction(0)] * m + [Fraction(0)]
    for i in range(m):
        if basis[i] < n and c[basis[i]] != 0:
            f = c[basis[i]]
            obj = [o - f * t for o, t in zip(obj, T[i])]
    T[-1] = obj
    status = _run(T, basis, n + m, [True] * n + [False] * m)
    if status == "unbounded":
        return LPResult("unbounded")
    z = [Fraction(0)] * n
    for i, bi in enumerate(basis):
        if bi < n:
            z[bi] = T[i][-1]
    return LPResult("optimal", -T[-1][-1], tuple(z))


def lp_minimize(c, ineqs=(), eqs=()) -> LPResult:
    """``min c.x`` over ``{a.x <= b} ∩ {a.x == b}`` with free variables."""
    c = [q(v) for v in c]
    n = len(c)
    ineqs, eqs = list(ineqs), list(eqs)
    k = len(ineqs)
    # x = p - r, slacks s: columns p (n), r (n), s (k)
    A, b = [], []
    for i, (a, beta) in enumerate(ineqs):
        a = [q(v) for v in a]
        A.append(a + [-v for v in a] + [Fraction(int(i == j)) for j in range(k)])
        b.append(q(beta))
    for a, beta in eqs:
        a = [q(v) for v in a]
        A.append(a + [-v for v in a] + [Fraction(0)] * k)
        b.append(q(beta))
    cc = c + [-v for v in c] + [Fraction(0)] * k
    res = simplex(cc, A, b)
    if res.status != "optimal":
        return res
    z = res.point
    return LPResult("optimal", res.value, tuple(z[i] - z[n + i] for i in range(n)))


# ---------------------------------------------------------------------------
# exact subgradient oracle


def subgradient_membership_exact(f: ConvexPL, x, xstar) -> bool:
    """Decide ``<x*, y - x̄> <= f(y) - f(x̄)`` for all y by one LP over the epigraph.

    Minimizes ``t - <x*, y>`` over ``{(y, t) : y ∈ dom f, t >= pieces}``; the
    inequality holds globally iff the minimum is at least
    ``f(x̄) - <x*, x̄>``.
    """
    x, xstar = vec(x), vec(xstar)
    fx = eval_pl(f, x)
    if fx == INF:
        raise ValueError("x̄ must lie in the domain")
    n = f.dim
    ineqs = [(tuple(a) + (Fraction(0),), b) for a, b in f.domain.ineqs]
    eqs = [(tuple(a) + (Fraction(0),), b) for a, b in f.domain.eqs]
    ineqs += [(p.gradient + (Fraction(-1),), -p.offset) for p in f.pieces]
    res = lp_minimize(tuple(-v for v in xstar) + (Fraction(1),), ineqs, eqs)
    if res.status == "unbounded":
        return False
    return res.value >= fx - dot(xstar, x)


# ---------------------------------------------------------------------------
# sampling estimators


@dataclass(frozen=True)
class SamplingConfig:
    radius_sequence: tuple = (Fraction(1), Fraction(1, 4), Fraction(1, 16), Fraction(1, 64))
    grid_density: int = 9
    tolerance: Fraction = Fraction(1, 1000)
    seed: int = 0

    def __post_init__(self):
        radii = tuple(q(r) for r in self.radius_sequence)
        if not radii or any(r <= 0 for r in radii):
            raise ValueError("radii must be positive")
        if any(a <= b for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be strictly decreasing")
        if self.grid_density < 2:
            raise ValueError("grid density must be at least 2")
        tol = q(self.tolerance)
        if tol <= 0:
            raise ValueError("tolerance must be positive")
        object.__setattr__(self, "radius_sequence", radii)
        object.__setattr__(self, "tolerance", tol)


def _offsets(dim: int, k: int) -> list[tuple]:
    axis = [Fraction(2 * i, k - 1) - 1 for i in range(k)]
    pts = [()]
    for _ in range(dim):
        pts = [p + (a,) for p in pts for a in axis]
    return pts


def _rand_offsets(dim: int, count: int, rng: random.Random) -> list[tuple]:
    return [tuple(Fraction(rng.randint(-1000, 1000), 1000) for _ in range(dim)) for _ in range(count)]


@dataclass(frozen=True)
class DirDerivEstimate:
    per_shell: tuple  # (radius, max quotient) pairs
    estimate: Fraction


def clarke_dirderiv_estimate(f, x, v, cfg: SamplingConfig = SamplingConfig()) -> DirDerivEstimate:
    """Max of exact difference quotients over base points near x̄ and small steps."""
    f = to_cells(f)
    x, v = vec(x), vec(v)
    rng = random.Random(cfg.seed)
    offs = _offsets(f.dim, cfg.grid_density)
    shells = []
    for r in cfg.radius_sequence:
        best = None
        pts = offs + _rand_offsets(f.dim, 16, rng)
        for o in pts:
            base = tuple(a + r * b for a, b in zip(x, o))
            fb = eval_pl(f, base)
            if fb == INF:
                continue
            for t in (r, r / 8, r / 64):
                moved = tuple(a + t * b for a, b in zip(base, v))
                fm = eval_pl(f, moved)
                if fm == INF:
                    continue
                quot = (fm - fb) / t
                if best is None or quot > best:
                    best = quot
        shells.append((r, best))
    return DirDerivEstimate(tuple(shells), shells[-1][1])


def _part_samples(p: Polyhedron, x: tuple) -> list[tuple]:
    """Points of a polyhedron lying on segments from ``x`` (which it contains)."""
    gens = list(p.vertices)
    v0 = p.vertices[0]
    for r in p.rays:
        gens += [tuple(a + b for a, b in zip(v, r)) for v in p.vertices]
    for l in p.lineality:
        gens += [tuple(a + b for a, b in zip(v0, l)), tuple(a - b for a, b in zip(v0, l))]
    mids = [tuple((a + b) / 2 for a, b in zip(g, h)) for i, g in enumerate(gens) for h in gens[i + 1 :]]
    return [tuple(a - b for a, b in zip(g, x)) for g in gens + mids]


def _shell_points(omega: PolyUnion, x: tuple, r: Fraction, offs, rng) -> list[tuple]:
    out = set()
    for o in offs + _rand_offsets(omega.dim, 8, rng):
        pt = tuple(a + r * b for a, b in zip(x, o))
        if pt != x and omega.contains(pt):
            out.add(pt)
    for p in omega.parts:
        if not p.contains(x):
            continue
        for d in _part_samples(p, x):
            m = max((abs(c) for c in d), default=Fraction(0))
            if m == 0:
                continue
            for s in (r, r / 2):
                out.add(tuple(a + s * c / m for a, c in zip(x, d)))
    return sorted(out)


def _norm(d: Sequence) -> float:
    return math.sqrt(sum(float(c) ** 2 for c in d))


@dataclass(frozen=True)
class RejectResult:
    rejected: bool
    witness: Optional[tuple]
    per_shell: tuple  # (radius, max normalized product)


def frechet_normal_reject(omega, x, xstar, cfg: SamplingConfig = SamplingConfig()) -> RejectResult:
    """One-sided Fréchet normality test by sampling Ω near x̄."""
    omega, x, xstar = as_union(omega), vec(x), vec(xstar)
    if not omega.contains(x):
        raise ValueError("x̄ must lie in Ω")
    rng = random.Random(cfg.seed)
    offs = _offsets(omega.dim, cfg.grid_density)
    shells = []
    for r in cfg.radius_sequence:
        best, arg = -math.inf, None
        for pt in _shell_points(omega, x, r, offs, rng):
            d = tuple(a - b for a, b in zip(pt, x))
            val = float(dot(xstar, d)) / _norm(d)
            if val > best:
                best, arg = val, pt
        shells.append((r, best, arg))
    tol = float(cfg.tolerance)
    last = shells[-2:]
    rejected = all(s[1] > tol for s in last)
    return RejectResult(rejected, last[-1][2] if rejected else None, tuple((r, b) for r, b, _ in shells))


@dataclass(frozen=True)
class LimitingSample:
    cones: tuple  # exact Fréchet cones at the sampled points of the two smallest shells
    contained: bool
    containment_witness: Optional[tuple]
    covered: bool
    uncovered_parts: tuple


def limiting_normal_sample(omega, x, cfg: SamplingConfig = SamplingConfig(), *, exact=None) -> LimitingSample:
    """Fréchet cones at sampled points near x̄, checked against an exact limiting cone.

    ``exact`` is the limiting cone to audit; when omitted it is computed by
    the stratification engine.  Containment: every sampled cone lies in the
    exact union.  Coverage: every part of the exact union contains a sampled
    cone of the same dimension.
    """
    from .normal_cones import frechet_normal_union, limiting_normal_union

    omega, x = as_union(omega), vec(x)
    if omega.dim > 3:
        raise ValueError("limiting-normal sampling is supported up to dimension 3")
    if not omega.contains(x):
        raise ValueError("x̄ must lie in Ω")
    lim = as_union(exact) if exact is not None else limiting_normal_union(omega, x)
    rng = random.Random(cfg.seed)
    offs = _offsets(omega.dim, cfg.grid_density)
    cones = {frechet_normal_union(omega, x)}
    for r in cfg.radius_sequence[-2:]:
        for pt in _shell_points(omega, x, r, offs, rng):
            cones.add(frechet_normal_union(omega, pt))
    cones = sorted(cones, key=lambda c: c.key())
    contained, witness = True, None
    for c in cones:
        ok, w = union_subset(c, lim)
        if not ok:
            contained, witness = False, w
            break
    uncovered = tuple(
        part
        for part in lim.parts
        if not any(c.affine_dim() == part.affine_dim() and union_subset(c, part)[0] for c in cones)
    )
    return LimitingSample(tuple(cones), contained, witness, not uncovered, uncovered)
