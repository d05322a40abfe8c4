"""Almost-invariant probability vectors on orbits, exactly.

Vectors are finitely supported with rational weights.  Deviations are l1
norms of pushforward differences, windows are finite Schreier-graph balls,
and optima come from the exact simplex, re-verified directly from the
returned vertex before anything is reported.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .codes import BoundaryCode
from .groups import Amalgam, FiniteGroup, ReducedWord, left_cosets
from .lp import solve_lp
from .tree import act_on_boundary


class WindowEscape(ValueError):
    """Raised when mass would leave the finite window."""


class EnumerationExhausted(RuntimeError):
    """Raised when no measure within the enumeration bounds is almost invariant."""


def parse_fraction(text) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    return Fraction(str(text))


def format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 \
        else str(q.numerator)


class ProbVector:
    """A finitely supported rational probability vector over hashable labels."""

    def __init__(self, weights: Iterable[tuple[object, Fraction]]) -> None:
        self._w: dict = {}
        total = Fraction(0)
        for label, q in weights:
            q = Fraction(q)
            if q < 0:
                raise ValueError(f"negative weight at {label!r}")
            if q == 0:
                continue
            self._w[label] = self._w.get(label, Fraction(0)) + q
            total += q
        if total != 1:
            raise ValueError(f"weights sum to {total}, not 1")

    @classmethod
    def uniform(cls, labels: Sequence) -> "ProbVector":
        n = len(labels)
        if n == 0:
            raise ValueError("cannot spread mass over nothing")
        return cls((lab, Fraction(1, n)) for lab in labels)

    @classmethod
    def point_mass(cls, label) -> "ProbVector":
        return cls(((label, Fraction(1)),))

    @property
    def support(self) -> tuple:
        return tuple(self._w.keys())

    def weight(self, label) -> Fraction:
        return self._w.get(label, Fraction(0))

    def items(self):
        return tuple(self._w.items())

    def max_denominator(self) -> int:
        return max(q.denominator for q in self._w.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, ProbVector) and dict(self._w) == dict(other._w)

    def __hash__(self):
        return hash(frozenset(self._w.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k!r}: {v}" for k, v in self._w.items())
        return f"ProbVector({{{inner}}})"

    def pushforward(self, f: Callable) -> "ProbVector":
        """Image measure under f; f returning None means mass escapes."""
        out: dict = {}
        for label, q in self._w.items():
            target = f(label)
            if target is None:
                raise WindowEscape(f"mass escapes at element {label!r}")
            out[target] = out.get(target, Fraction(0)) + q
        return ProbVector(out.items())


def l1_distance(p: ProbVector, q: ProbVector) -> Fraction:
    keys = set(p.support) | set(q.support)
    return sum((abs(p.weight(k) - q.weight(k)) for k in keys), Fraction(0))


# --- actions on finite windows ---------------------------------------------

class IntegerAction:
    """Translation on the integer interval [-radius, radius]."""

    def __init__(self, radius: int) -> None:
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        self.radius = radius

    def apply(self, g: int, x: int) -> Optional[int]:
        y = x + g
        return y if abs(y) <= self.radius else None


_FREE_LETTERS = "abcdef"


def _free_inverse(letter: str) -> str:
    return letter.lower() if letter.isupper() else letter.upper()


def free_reduce(word: str) -> str:
    out: list[str] = []
    for ch in word:
        if out and out[-1] == _free_inverse(ch):
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


class FreeAction:
    """Left multiplication on the ball of a free group, words as strings."""

    def __init__(self, rank: int, radius: int) -> None:
        if not (1 <= rank <= len(_FREE_LETTERS)):
            raise ValueError(f"rank must be between 1 and {len(_FREE_LETTERS)}")
        self.rank = rank
        self.radius = radius
        self.letters = [_FREE_LETTERS[i] for i in range(rank)]
        self.gens = self.letters + [ch.upper() for ch in self.letters]

    def apply(self, g: str, x: str) -> Optional[str]:
        y = free_reduce(g + x)
        return y if len(y) <= self.radius else None

    def ball(self, radius: int) -> list[str]:
        if radius > self.radius:
            raise ValueError("ball exceeds the window radius")
        out = [""]
        frontier = [""]
        for _ in range(radius):
            nxt = []
            for w in frontier:
                for ch in self.gens:
                    y = free_reduce(ch + w)
                    if len(y) == len(w) + 1:
                        nxt.append(y)
            out.extend(nxt)
            frontier = nxt
        return out


class CosetAction:
    """Left translation of a finite group on the cosets of a subgroup."""

    def __init__(self, group: FiniteGroup, subgroup: Iterable[int]) -> None:
        self.group = group
        cosets, trans = left_cosets(group, subgroup)
        self.reps = trans.reps
        self._coset_of = {}
        for cid, coset in enumerate(cosets):
            for x in coset:
                self._coset_of[x] = cid

    @property
    def points(self) -> range:
        return range(len(self.reps))

    def apply(self, g: int, x: int) -> int:
        return self._coset_of[self.group.mul(g, self.reps[x])]


class BoundaryAction:
    """The amalgam acting on boundary codes."""

    def __init__(self, am: Amalgam) -> None:
        self.am = am

    def apply(self, g: ReducedWord, x: BoundaryCode) -> BoundaryCode:
        return act_on_boundary(self.am, g, x)


def reiter_deviation(p: ProbVector, gens: Sequence, action, x) -> Fraction:
    """max over s in gens of the l1 gap between p pushed at x and at s·x."""
    px = p.pushforward(lambda g: action.apply(g, x))
    worst = Fraction(0)
    for s in gens:
        sx = action.apply(s, x)
        if sx is None:
            raise WindowEscape(f"generator {s!r} pushes the base point {x!r} "
                               "out of the window")
        psx = p.pushforward(lambda g: action.apply(g, sx))
        worst = max(worst, l1_distance(px, psx))
    return worst


# --- windows for the linear program ----------------------------------------

@dataclass(frozen=True)
class SchreierWindow:
    """A finite piece of a Schreier graph: vertices and partial generator maps."""

    vertices: tuple
    gens: tuple
    edge_maps: tuple  # one dict per generator, possibly partial

    def image(self, gen_index: int, v):
        return self.edge_maps[gen_index].get(v)

    def interior(self) -> tuple:
        """Vertices whose images under every generator stay in the window."""
        return tuple(v for v in self.vertices
                     if all(v in m for m in self.edge_maps))


def integer_window(radius: int, steps: Sequence[int] = (1, -1)) -> SchreierWindow:
    act = IntegerAction(radius)
    vertices = tuple(range(-radius, radius + 1))
    maps = []
    for s in steps:
        maps.append({v: act.apply(s, v) for v in vertices
                     if act.apply(s, v) is not None})
    return SchreierWindow(vertices, tuple(steps), tuple(maps))


def free_tree_window(rank: int, radius: int) -> SchreierWindow:
    act = FreeAction(rank, radius)
    vertices = tuple(act.ball(radius))
    maps = []
    for ch in act.gens:
        maps.append({v: act.apply(ch, v) for v in vertices
                     if act.apply(ch, v) is not None})
    return SchreierWindow(vertices, tuple(act.gens), tuple(maps))


def coset_window(group: FiniteGroup, subgroup: Iterable[int],
                 gens: Sequence[int]) -> SchreierWindow:
    act = CosetAction(group, subgroup)
    vertices = tuple(act.points)
    maps = [{v: act.apply(s, v) for v in vertices} for s in gens]
    return SchreierWindow(vertices, tuple(gens), tuple(maps))


@dataclass(frozen=True)
class ReiterCertificate:
    """A vector whose worst generator deviation is strictly below epsilon."""

    p: ProbVector
    gens: tuple
    epsilon: Fraction
    max_deviation: Fraction
    per_gen: tuple

    def __post_init__(self):
        if self.max_deviation >= self.epsilon:
            raise ValueError("certificate bound is not strict")


@dataclass(frozen=True)
class ReiterLpResult:
    """Exact minimizer of the worst-case deviation over a support."""

    optimum: Fraction
    p: ProbVector
    per_gen: tuple
    certificate: Optional[ReiterCertificate]
    meets_target: Optional[bool]


def _window_deviations(window: SchreierWindow, p: ProbVector) -> list[Fraction]:
    out = []
    for gi in range(len(window.gens)):
        px = {}
        psx = {}
        for v, q in p.items():
            px[v] = px.get(v, Fraction(0)) + q
            img = window.image(gi, v)
            if img is None:
                raise WindowEscape(
                    f"support vertex {v!r} escapes under generator "
                    f"{window.gens[gi]!r}")
            psx[img] = psx.get(img, Fraction(0)) + q
        keys = set(px) | set(psx)
        out.append(sum((abs(px.get(k, Fraction(0)) - psx.get(k, Fraction(0)))
                        for k in keys), Fraction(0)))
    return out


def reiter_lp(window: SchreierWindow, support: Optional[Sequence] = None,
              target_eps: Optional[Fraction] = None) -> ReiterLpResult:
    """Minimize the worst-case pushforward deviation over vectors on a support.

    Exact: the LP runs in rational arithmetic and the returned vertex is
    re-verified directly against the window maps; any disagreement is a hard
    failure rather than a result.
    """
    if support is None:
        support = window.interior()
    support = list(support)
    if not support:
        raise WindowEscape("empty support: the window has no interior")
    sup_index = {v: k for k, v in enumerate(support)}
    for gi in range(len(window.gens)):
        for v in support:
            if window.image(gi, v) is None:
                raise WindowEscape(
                    f"support vertex {v!r} escapes under generator "
                    f"{window.gens[gi]!r}; shrink the support or grow the window")

    # variables: p_0..p_{k-1}, then d_{s,w} blocks, then t
    nsup = len(support)
    d_index: dict[tuple[int, object], int] = {}
    doms: list[list] = []
    pos = nsup
    for gi in range(len(window.gens)):
        dom = sorted({w for v in support for w in (v, window.image(gi, v))},
                     key=repr)
        doms.append(dom)
        for w in dom:
            d_index[(gi, w)] = pos
            pos += 1
    t_var = pos
    nvars = pos + 1

    a_ub: list[list[Fraction]] = []
    b_ub: list[Fraction] = []
    for gi in range(len(window.gens)):
        for w in doms[gi]:
            row = [Fraction(0)] * nvars
            if w in sup_index:
                row[sup_index[w]] += 1
            for v in support:
                if window.image(gi, v) == w:
                    row[sup_index[v]] -= 1
            row[d_index[(gi, w)]] = Fraction(-1)
            a_ub.append(row)
            b_ub.append(Fraction(0))
            a_ub.append([-q for q in row[:nsup]] + row[nsup:])
            b_ub.append(Fraction(0))
        row = [Fraction(0)] * nvars
        for w in doms[gi]:
            row[d_index[(gi, w)]] = Fraction(1)
        row[t_var] = Fraction(-1)
        a_ub.append(row)
        b_ub.append(Fraction(0))
    a_eq = [[Fraction(1)] * nsup + [Fraction(0)] * (nvars - nsup)]
    b_eq = [Fraction(1)]
    cost = [Fraction(0)] * t_var + [Fraction(1)]

    sol = solve_lp(cost, a_ub, b_ub, a_eq, b_eq)
    p = ProbVector((support[k], sol.x[k]) for k in range(nsup)
                   if sol.x[k] != 0)
    per = _window_deviations(window, p)
    if max(per) != sol.value:
        raise RuntimeError(
            f"verification mismatch: simplex reported {sol.value} but the "
            f"vertex deviates by {max(per)}")
    per_gen = tuple(zip(window.gens, per))
    meets = None if target_eps is None else (sol.value < target_eps)
    eps = target_eps if (target_eps is not None and sol.value < target_eps) \
        else sol.value + 1
    cert = ReiterCertificate(p, tuple(window.gens), eps, sol.value, per_gen)
    return ReiterLpResult(sol.value, p, per_gen, cert, meets)


def grid_search_min_deviation(window: SchreierWindow, support: Sequence,
                              max_denominator: int
                              ) -> tuple[Fraction, ProbVector]:
    """Brute-force minimum over all vectors with weights k/d, d <= the cap."""
    support = list(support)
    k = len(support)
    best: Optional[tuple[Fraction, ProbVector]] = None
    for d in range(1, max_denominator + 1):
        for bars in combinations(range(d + k - 1), k - 1):
            parts = []
            prev = -1
            for b in bars:
                parts.append(b - prev - 1)
                prev = b
            parts.append(d + k - 2 - prev)
            p = ProbVector((support[t], Fraction(parts[t], d))
                           for t in range(k) if parts[t])
            val = max(_window_deviations(window, p))
            if best is None or val < best[0]:
                best = (val, p)
    if best is None:
        raise WindowEscape("empty grid")
    return best


def check_uniform_coamenable(group: FiniteGroup, subgroup: Iterable[int],
                             gens: Sequence[int],
                             eps: Fraction) -> ReiterCertificate:
    """The uniform vector on a finite group beats every epsilon at every coset.

    Validates eps > 0 and the generator range, then certifies the deviation,
    which is exactly zero simultaneously for all base points.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("epsilon must be positive for a strict certificate")
    for s in gens:
        if not (0 <= s < group.order):
            raise ValueError(f"generator {s} outside the group")
    act = CosetAction(group, subgroup)
    p = ProbVector.uniform(list(group.elements()))
    worst = Fraction(0)
    per = []
    for s in gens:
        dev_s = Fraction(0)
        for x in act.points:
            px = p.pushforward(lambda g: act.apply(g, x))
            psx = p.pushforward(lambda g: act.apply(g, act.apply(s, x)))
            dev_s = max(dev_s, l1_distance(px, psx))
        per.append((s, dev_s))
        worst = max(worst, dev_s)
    return ReiterCertificate(p, tuple(gens), eps, worst, tuple(per))


# --- first-hit enumeration of almost invariant vectors ----------------------

def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Positive integer compositions in ascending lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_rational_measures(labels: Sequence, max_denominator: int,
                                max_support: Optional[int] = None
                                ) -> Iterator[ProbVector]:
    """All rational vectors ordered by max denominator, support size, then
    support and weights lexicographically."""
    cap = len(labels) if max_support is None else min(max_support, len(labels))
    for d in range(1, max_denominator + 1):
        for k in range(1, cap + 1):
            if k > d:
                continue
            for sup in combinations(range(len(labels)), k):
                for parts in _compositions(d, k):
                    weights = [Fraction(w, d) for w in parts]
                    if max(q.denominator for q in weights) != d and d > 1:
                        continue
                    yield ProbVector((labels[sup[t]], weights[t])
                                     for t in range(k))


@dataclass(frozen=True)
class WitnessStep:
    """One stage of an almost-invariance schedule: the first vector that works."""

    n: int
    gens: tuple
    p: ProbVector
    q_by_point: tuple  # (point, pushforward) pairs
    decay: tuple       # (point, group element, deviation, bound applies, ok)


@dataclass(frozen=True)
class WitnessFamily:
    steps: tuple


def amenability_witness_sequence(group: FiniteGroup, subgroup: Iterable[int],
                                 gen_chain: Sequence[Sequence[int]],
                                 n_max: int, max_denominator: int,
                                 max_support: Optional[int] = None,
                                 pairs: Sequence[tuple[int, int]] = ()
                                 ) -> WitnessFamily:
    """For each n, the first vector in enumeration order that is almost
    invariant below 1/n over every coset, with its pushforwards and decay table.

    gen_chain must be increasing; it is reused at its last entry once n runs
    past its length.  Exhausting the enumeration raises, naming the scale.
    """
    sub = frozenset(subgroup)
    chain = [tuple(s) for s in gen_chain]
    if not chain:
        raise ValueError("need at least one generator stage")
    for a, b in zip(chain, chain[1:]):
        if not set(a) <= set(b):
            raise ValueError("generator chain must be increasing")
    act = CosetAction(group, sub)
    labels = list(group.elements())
    steps = []
    for n in range(1, n_max + 1):
        gens = chain[min(n, len(chain)) - 1]
        eps = Fraction(1, n)
        hit: Optional[ProbVector] = None
        for p in enumerate_rational_measures(labels, max_denominator,
                                             max_support):
            if all(reiter_deviation(p, gens, act, x) < eps
                   for x in act.points):
                hit = p
                break
        if hit is None:
            raise EnumerationExhausted(
                f"no ({gens}, 1/{n})-almost-invariant vector with denominator "
                f"<= {max_denominator}")
        q_by_point = tuple(
            (x, hit.pushforward(lambda g: act.apply(g, x))) for x in act.points)
        decay = []
        for x, g in pairs:
            qx = hit.pushforward(lambda h: act.apply(h, x))
            qgx = hit.pushforward(lambda h: act.apply(h, act.apply(g, x)))
            dev = l1_distance(qx, qgx)
            applies = g in gens
            decay.append((x, g, dev, applies, (not applies) or dev < eps))
        steps.append(WitnessStep(n, tuple(gens), hit, q_by_point, tuple(decay)))
    return WitnessFamily(tuple(steps))


# --- deviation tensors and threshold extraction -----------------------------

@dataclass(frozen=True)
class DeviationTensor:
    """d[i][j][g][x]: exact deviations for a doubly indexed vector family.

    Row i is a refinement stage, column j a window stage, g runs over listed
    group elements (enumerated from 1 for weighting), x over sample points
    carrying the base measure mu.
    """

    group_labels: tuple
    point_labels: tuple
    mu: tuple
    values: tuple

    def __post_init__(self):
        if len(self.mu) != len(self.point_labels):
            raise ValueError("mu must weight exactly the sample points")
        if sum(self.mu, Fraction(0)) != 1 or any(q < 0 for q in self.mu):
            raise ValueError("mu must be a probability vector")
        for i, plane in enumerate(self.values):
            if len(plane) != len(self.values[0]):
                raise ValueError("ragged j dimension")
            for j, block in enumerate(plane):
                if len(block) != len(self.group_labels):
                    raise ValueError("ragged group dimension")
                for g, row in enumerate(block):
                    if len(row) != len(self.point_labels):
                        raise ValueError("ragged point dimension")
                    for q in row:
                        if not (0 <= q <= 2):
                            raise ValueError(
                                f"deviation out of [0,2] at {(i, j, g)}")

    @property
    def i_count(self) -> int:
        return len(self.values)

    @property
    def j_count(self) -> int:
        return len(self.values[0]) if self.values else 0

    def value(self, i: int, j: int, g: int, x: int) -> Fraction:
        return self.values[i][j][g][x]


def tensor_to_json(t: DeviationTensor) -> dict:
    return {
        "group": list(t.group_labels),
        "points": list(t.point_labels),
        "mu": [format_fraction(q) for q in t.mu],
        "values": [[[[format_fraction(q) for q in row] for row in block]
                    for block in plane] for plane in t.values],
    }


def tensor_from_json(doc: dict) -> DeviationTensor:
    return DeviationTensor(
        tuple(doc["group"]),
        tuple(doc["points"]),
        tuple(parse_fraction(q) for q in doc["mu"]),
        tuple(tuple(tuple(tuple(parse_fraction(q) for q in row)
                          for row in block) for block in plane)
              for plane in doc["values"]),
    )


def monotone_tensor(i_count: int = 11, j_count: int = 13) -> DeviationTensor:
    """The synthetic single-orbit tensor d[i][j] = 1/(j+1), one element, one point."""
    values = tuple(
        tuple(((Fraction(1, j + 1),),) for j in range(j_count))
        for _ in range(i_count))
    return DeviationTensor(("g1",), ("x0",), (Fraction(1),), values)


def boundary_product_tensor(am: Amalgam, points: Sequence[BoundaryCode],
                            mu: Sequence[Fraction],
                            words: Sequence[ReducedWord],
                            i_count: int, j_count: int) -> DeviationTensor:
    """Deviations of sliding averages of canonical orbit codes along shifts.

    Stage (i, j) averages the canonical codes of the even shifts numbered
    i..i+j; for orbit-equivalent points these averages eventually agree, so
    rows decay in j wherever the group element preserves the orbit.
    """
    from .cber import canonical_orbit_code
    from .codes import format_code
    from .groups import word_to_str

    def avg(i: int, j: int, x: BoundaryCode) -> ProbVector:
        codes = [canonical_orbit_code(am, x.shift_code(2 * k))
                 for k in range(i, i + j + 1)]
        return ProbVector((c, Fraction(1, len(codes))) for c in codes)

    values = []
    for i in range(i_count):
        plane = []
        for j in range(j_count):
            block = []
            for g in words:
                row = []
                for x in points:
                    gx = act_on_boundary(am, g, x)
                    row.append(l1_distance(avg(i, j, x), avg(i, j, gx)))
                block.append(tuple(row))
            plane.append(tuple(block))
        values.append(tuple(plane))
    return DeviationTensor(
        tuple(word_to_str(am, g) for g in words),
        tuple(format_code(am, x) for x in points),
        tuple(Fraction(q) for q in mu),
        tuple(values))


@dataclass(frozen=True)
class CfwRow:
    """Extraction record for one refinement stage."""

    i: int
    f: int
    bad_mass: Fraction
    bound: Fraction

    @property
    def ok(self) -> bool:
        return self.bad_mass < self.bound


@dataclass(frozen=True)
class CfwExtraction:
    tensor: DeviationTensor
    m_max: int
    rows: tuple

    @property
    def thresholds(self) -> tuple:
        return tuple(r.f for r in self.rows)


def _entry_threshold(t: DeviationTensor, i: int, g: int, x: int,
                     m: int) -> int:
    """Least j with d[i][j'][g][x] < 1/m for every j' >= j in range; J+1 if none."""
    target = Fraction(1, m)
    jmin = 0
    for j in range(t.j_count):
        if t.value(i, j, g, x) >= target:
            jmin = j + 1
    return jmin


def cfw_extract(t: DeviationTensor, m_max: Optional[int] = None
                ) -> CfwExtraction:
    """Threshold function f with the slice measure of late entries below 2^-i.

    The product space weights slice (g_n, m) of the sample by mu/2^{n m}; the
    late set at stage (i, f) collects the points whose deviation row enters
    the target band only after f.  f(i) is the least column with late mass
    strictly below 2^-i, which exists because the finitely many columns
    exhaust every slice.
    """
    if m_max is None:
        m_max = t.j_count - 1
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    rows = []
    for i in range(t.i_count):
        # mass histogram over entry columns; rows that never enter the band
        # within range (jmin == j_count) stay out of the union and drop here
        hist = [Fraction(0)] * t.j_count
        for n, _ in enumerate(t.group_labels, start=1):
            for m in range(1, m_max + 1):
                weight = Fraction(1, 2 ** (n * m))
                for x in range(len(t.point_labels)):
                    jmin = _entry_threshold(t, i, n - 1, x, m)
                    if jmin < t.j_count:
                        hist[jmin] += t.mu[x] * weight
        bound = Fraction(1, 2 ** i)
        found = False
        for f in range(t.j_count):
            late = sum(hist[f + 1:], Fraction(0))
            if late < bound:
                rows.append(CfwRow(i, f, late, bound))
                found = True
                break
        if not found:
            raise RuntimeError(f"no threshold at stage {i}")
    return CfwExtraction(t, m_max, tuple(rows))


def verify_cfw(extraction: CfwExtraction) -> None:
    """Recompute every late mass from the raw definition; raises on mismatch."""
    t = extraction.tensor
    for row in extraction.rows:
        total = Fraction(0)
        for n, _ in enumerate(t.group_labels, start=1):
            for m in range(1, extraction.m_max + 1):
                target = Fraction(1, m)
                for x in range(len(t.point_labels)):
                    in_union = any(
                        all(t.value(row.i, jp, n - 1, x) < target
                            for jp in range(j, t.j_count))
                        for j in range(t.j_count))
                    in_f = all(t.value(row.i, jp, n - 1, x) < target
                               for jp in range(row.f, t.j_count))
                    if in_union and not in_f:
                        total += t.mu[x] * Fraction(1, 2 ** (n * m))
        if total != row.bad_mass:
            raise RuntimeError(
                f"late mass at stage {row.i} recomputes to {total}, "
                f"stored {row.bad_mass}")
        if not row.ok:
            raise RuntimeError(f"stage {row.i} exceeds its bound")
