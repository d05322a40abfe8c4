"""Finite-sample equivalence relations, gluing, reductions, and orbit witnesses.

Everything here runs on explicit finite point sets, so saturations,
transversals, and reductions are checked exhaustively rather than asserted.
Orbit machinery for boundary codes goes through canonical orbit codes: the
minimum, over the base vertex group, of the translated code.  Two ends lie in
the same orbit iff some pair of even shifts produces equal canonical codes,
and every positive answer is returned with a verified group-element witness.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cmp_to_key
from itertools import product as iproduct
from typing import Iterable, Optional, Sequence

from .codes import BoundaryCode, PeriodicWord, compare_words, format_code, parse_code, raw_shift
from .groups import (A_SIDE, B_SIDE, Amalgam, Letter, ReducedWord,
                     enumerate_reduced_words, invert, multiply,
                     word_of_subgroup_element, word_to_str, word_from_str)
from .tree import act_on_boundary, check_theorem_A, TheoremStyleCertificate, word_element


class RelationError(ValueError):
    """Raised for invalid point sets, non-transversals, or failed refinements."""


class HypothesisError(RuntimeError):
    """Raised when a required stabilizer certificate does not exist in bounds."""


class FinitePointSet:
    """An ordered finite set of hashable points with index lookup."""

    def __init__(self, points: Iterable) -> None:
        self.points = tuple(points)
        self._index: dict = {}
        for i, p in enumerate(self.points):
            if p in self._index:
                raise RelationError(f"duplicate point at positions "
                                    f"{self._index[p]} and {i}")
            self._index[p] = i

    def __len__(self) -> int:
        return len(self.points)

    def index_of(self, point) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise RelationError(f"point not in the set: {point!r}") from None


class FiniteER:
    """An equivalence relation on a FinitePointSet via union-find."""

    def __init__(self, base: FinitePointSet) -> None:
        self.base = base
        self._parent = list(range(len(base)))

    def _find(self, i: int) -> int:
        root = i
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[i] != root:
            self._parent[i], i = root, self._parent[i]
        return root

    def relate(self, i: int, j: int) -> None:
        ri, rj = self._find(i), self._find(j)
        if ri != rj:
            self._parent[max(ri, rj)] = min(ri, rj)

    def related(self, i: int, j: int) -> bool:
        return self._find(i) == self._find(j)

    def classes(self) -> tuple[tuple[int, ...], ...]:
        buckets: dict[int, list[int]] = {}
        for i in range(len(self.base)):
            buckets.setdefault(self._find(i), []).append(i)
        return tuple(tuple(sorted(v)) for _, v in sorted(buckets.items()))

    def class_of(self, i: int) -> tuple[int, ...]:
        root = self._find(i)
        return tuple(j for j in range(len(self.base)) if self._find(j) == root)

    def __eq__(self, other) -> bool:
        return (isinstance(other, FiniteER) and self.base is other.base
                and self.classes() == other.classes())

    def __hash__(self):
        raise TypeError("FiniteER is mutable; not hashable")

    def refines(self, other: "FiniteER") -> bool:
        """Every class of self sits inside one class of other."""
        if other.base is not self.base:
            raise RelationError("relations live on different point sets")
        return all(other.related(cls[0], j) for cls in self.classes() for j in cls)

    def copy(self) -> "FiniteER":
        out = FiniteER(self.base)
        out._parent = list(self._parent)
        return out


def transversal(er: FiniteER) -> tuple[int, ...]:
    """Least index of every class, ascending: meets each class exactly once."""
    return tuple(cls[0] for cls in er.classes())


def saturation(er: FiniteER, subset: Iterable[int]) -> tuple[int, ...]:
    """All points related to something in the subset."""
    roots = {er._find(i) for i in subset}
    return tuple(i for i in range(len(er.base)) if er._find(i) in roots)


def restrict(er: FiniteER, subset: Iterable[int]) -> tuple[FinitePointSet, "FiniteER"]:
    """The relation induced on a subset, as a fresh point set and relation."""
    idxs = sorted(set(subset))
    sub = FinitePointSet(er.base.points[i] for i in idxs)
    out = FiniteER(sub)
    for a in range(len(idxs)):
        for b in range(a + 1, len(idxs)):
            if er.related(idxs[a], idxs[b]):
                out.relate(a, b)
    return sub, out


def is_transversal_of(er: FiniteER, subset: Sequence[int],
                      candidate: Sequence[int]) -> bool:
    """Does candidate meet every class of er restricted to subset exactly once?"""
    subset = sorted(set(subset))
    if any(t not in subset for t in candidate):
        return False
    hits: dict[int, int] = {}
    for t in candidate:
        root = er._find(t)
        hits[root] = hits.get(root, 0) + 1
    roots_needed = {er._find(i) for i in subset}
    return all(hits.get(r, 0) == 1 for r in roots_needed) and \
        all(r in roots_needed for r in hits)


def glue_transversals(er: FiniteER,
                      pieces: Sequence[tuple[Sequence[int], Sequence[int]]]
                      ) -> tuple[int, ...]:
    """Merge per-piece transversals into one for the union of the pieces.

    Each piece is (subset, transversal of er restricted to that subset).  A
    kept representative blocks later ones from its class, processed in the
    order given, so the output meets each class of the union exactly once.
    """
    covered: set[int] = set()
    for n, (subset, cand) in enumerate(pieces):
        if not is_transversal_of(er, subset, cand):
            raise RelationError(f"piece {n} is not a transversal of its subset")
        covered.update(subset)
    kept: list[int] = []
    blocked_roots: set[int] = set()
    for subset, cand in pieces:
        for t in sorted(cand):
            root = er._find(t)
            if root not in blocked_roots:
                blocked_roots.add(root)
                kept.append(t)
    out = tuple(sorted(kept))
    if not is_transversal_of(er, sorted(covered), out):
        raise RelationError("glued candidate fails the transversal property")
    return out


@dataclass(frozen=True)
class ReductionWitness:
    """A map of point indices witnessing i~j in the source iff f(i)~f(j) in the target."""

    f: tuple[int, ...]

    def apply(self, i: int) -> int:
        return self.f[i]


def quotient_reduction(er_fine: FiniteER, er_coarse: FiniteER
                       ) -> tuple[FinitePointSet, FiniteER, ReductionWitness]:
    """Collapse the finer relation's classes and carry the coarser one along.

    Requires er_fine to refine er_coarse on the same base.  The quotient point
    set is the transversal of er_fine; the induced relation on it is reduction-
    equivalent to er_coarse via the class-representative map.
    """
    if er_coarse.base is not er_fine.base:
        raise RelationError("relations live on different point sets")
    if not er_fine.refines(er_coarse):
        raise RelationError("first relation does not refine the second")
    reps = transversal(er_fine)
    rep_pos = {r: k for k, r in enumerate(reps)}
    quotient = FinitePointSet(er_fine.base.points[r] for r in reps)
    induced = FiniteER(quotient)
    for p in range(len(reps)):
        for q in range(p + 1, len(reps)):
            if er_coarse.related(reps[p], reps[q]):
                induced.relate(p, q)
    f = tuple(rep_pos[er_fine._find(i)] for i in range(len(er_fine.base)))
    witness = ReductionWitness(f)
    verify_reduction(er_coarse, induced, witness)
    return quotient, induced, witness


def verify_reduction(source: FiniteER, target: FiniteER,
                     witness: ReductionWitness) -> None:
    """Exhaustively check the reduction property; raises on any failing pair."""
    n = len(source.base)
    if len(witness.f) != n:
        raise RelationError("witness map does not cover the source")
    for i in range(n):
        for j in range(n):
            if source.related(i, j) != target.related(witness.f[i], witness.f[j]):
                raise RelationError(f"reduction fails at pair ({i},{j})")


def tail_equivalent(x: PeriodicWord, y: PeriodicWord
                    ) -> Optional[tuple[int, int]]:
    """Least shifts (i, j), ordered by i+j then i, with equal shifted sequences."""
    hx, hy = x.horizon(), y.horizon()
    sx = [raw_shift(x, i) for i in range(hx + 1)]
    sy = [raw_shift(y, j) for j in range(hy + 1)]
    for total in range(hx + hy + 1):
        for i in range(max(0, total - hy), min(total, hx) + 1):
            if sx[i] == sy[total - i]:
                return (i, total - i)
    return None


def _orbit_candidates(am: Amalgam, x: BoundaryCode
                      ) -> list[tuple[BoundaryCode, ReducedWord]]:
    out = []
    for elem in am.H.elements():
        h = word_of_subgroup_element(am, A_SIDE, elem)
        out.append((act_on_boundary(am, h, x), h))
    return out


def canonical_orbit_code(am: Amalgam, x: BoundaryCode) -> BoundaryCode:
    """The least translate of x under the base vertex group.

    Base-rooted codes in one orbit differ exactly by elements fixing the base
    vertex, so this minimum is a complete orbit invariant for equal codes and
    the first stage of the shift search for tail-related ones.
    """
    code, _ = _orbit_min(am, x)
    return code


def _orbit_min(am: Amalgam, x: BoundaryCode) -> tuple[BoundaryCode, ReducedWord]:
    best: Optional[tuple[BoundaryCode, ReducedWord]] = None
    for code, h in _orbit_candidates(am, x):
        if best is None or compare_words(code, best[0]) < 0:
            best = (code, h)
    assert best is not None
    return best


@dataclass(frozen=True)
class OrbitDecision:
    """Outcome of an orbit-equivalence query, with its verified witness if any."""

    equivalent: bool
    witness: Optional[ReducedWord]
    shifts: Optional[tuple[int, int]]
    conclusive: bool
    method: str


def _even_shift_codes(am: Amalgam, x: BoundaryCode
                      ) -> list[tuple[int, BoundaryCode, ReducedWord]]:
    """(shift, canonical code, minimizing base element) for even shifts to the horizon."""
    bound = x.horizon() + 1
    out = []
    for i in range(0, bound + 1, 2):
        code, h = _orbit_min(am, x.shift_code(i))
        out.append((i, code, h))
    return out


def orbit_equivalent(am: Amalgam, x: BoundaryCode, y: BoundaryCode,
                     word_bound: int = 4, method: str = "codes") -> OrbitDecision:
    """Decide whether some group element carries y to x.

    The code method is complete: it scans even shift pairs up to the horizons
    and reconstructs a witness from the shift prefixes and minimizing base
    elements.  The brute method enumerates words up to word_bound letters and
    is conclusive only on success.
    """
    if method == "brute":
        for g in enumerate_reduced_words(am, word_bound):
            if act_on_boundary(am, g, y) == x:
                return OrbitDecision(True, g, None, True, "brute")
        return OrbitDecision(False, None, None, False, "brute")
    if method != "codes":
        raise RelationError(f"unknown method {method!r}")

    xs = _even_shift_codes(am, x)
    ys = _even_shift_codes(am, y)
    for i, cx, hx in xs:
        for j, cy, hy in ys:
            if cx == cy:
                wx = word_element(am, x.letters(i))
                wy = word_element(am, y.letters(j))
                g = multiply(am, multiply(am, wx, invert(am, hx)),
                             multiply(am, hy, invert(am, wy)))
                if act_on_boundary(am, g, y) != x:
                    raise RuntimeError("orbit witness failed re-verification")
                return OrbitDecision(True, g, (i, j), True, "codes")
    return OrbitDecision(False, None, None, True, "codes")


@dataclass(frozen=True)
class SampleSpace:
    """All canonical boundary codes within prefix and cycle length caps."""

    p_max: int
    q_max: int
    points: tuple[BoundaryCode, ...]


def build_sample_space(am: Amalgam, p_max: int, q_max: int) -> SampleSpace:
    """Enumerate every canonical code with |prefix| <= p_max, |cycle| <= q_max."""
    if p_max < 0 or q_max < 2:
        raise RelationError("need p_max >= 0 and q_max >= 2")
    pools = {A_SIDE: [Letter(A_SIDE, r) for r in range(1, am.A.index)],
             B_SIDE: [Letter(B_SIDE, r) for r in range(1, am.B.index)]}
    found = set()
    for p_len in range(p_max + 1):
        for c_len in range(2, q_max + 1, 2):
            prefix_pools = []
            for pos in range(p_len):
                side = pos % 2
                choices = list(pools[side])
                if pos == 0:
                    choices = [Letter(A_SIDE, 0)] + choices
                prefix_pools.append(choices)
            cycle_pools = [pools[(p_len + j) % 2] for j in range(c_len)]
            for prefix in iproduct(*prefix_pools):
                for cycle in iproduct(*cycle_pools):
                    code = BoundaryCode(prefix, cycle)
                    if code.prefix == prefix and code.cycle == cycle:
                        found.add(code)
    points = sorted(found, key=cmp_to_key(compare_words))
    return SampleSpace(p_max, q_max, tuple(points))


@dataclass(frozen=True)
class WitnessChain:
    """An increasing chain of finite relations exhausting the orbit relation."""

    sample: FinitePointSet
    n_values: tuple[int, ...]
    chain: tuple[FiniteER, ...]
    target: FiniteER
    stabilized_at: Optional[int]
    certificates: tuple[TheoremStyleCertificate, ...]


def hyperfiniteness_witness(am: Amalgam, sample: SampleSpace, n_max: int,
                            require_certificates: bool = True) -> WitnessChain:
    """Build E_0 <= E_1 <= ... <= E_n_max from shift witnesses on the sample.

    E_n relates two sample points when even shifts i, j <= n give equal
    canonical orbit codes, closed transitively inside the sample.  The target
    is the same construction with unbounded (horizon-capped) shifts, which is
    the full orbit relation on the sample.
    """
    if n_max < 0:
        raise RelationError("n_max must be nonnegative")
    certs: list[TheoremStyleCertificate] = []
    if require_certificates:
        missing = []
        for x in sample.points:
            cert = check_theorem_A(am, x)
            if cert is None:
                missing.append(x)
            else:
                certs.append(cert)
        if missing:
            raise HypothesisError(
                f"no stabilizer certificate for {len(missing)} sample point(s); "
                f"first: {missing[0]!r}")

    base = FinitePointSet(sample.points)
    occurrences: dict[BoundaryCode, list[tuple[int, int]]] = {}
    for idx, x in enumerate(sample.points):
        for i, code, _ in _even_shift_codes(am, x):
            occurrences.setdefault(code, []).append((idx, i))

    def relation_at(bound: Optional[int]) -> FiniteER:
        er = FiniteER(base)
        for code, occ in occurrences.items():
            live = [idx for idx, i in occ if bound is None or i <= bound]
            for a, b in zip(live, live[1:]):
                er.relate(a, b)
        return er

    chain = tuple(relation_at(n) for n in range(n_max + 1))
    target = relation_at(None)
    stabilized_at = None
    for n, er in enumerate(chain):
        if er == target:
            stabilized_at = n
            break
    return WitnessChain(base, tuple(range(n_max + 1)), chain, target,
                        stabilized_at, tuple(certs))


def validate_witness_chain(wc: WitnessChain) -> None:
    """Monotonicity, finiteness, and exhaustion checks; raises on failure."""
    for earlier, later in zip(wc.chain, wc.chain[1:]):
        if not earlier.refines(later):
            raise RelationError("chain is not increasing")
    for er in wc.chain:
        if any(len(cls) < 1 for cls in er.classes()):
            raise RelationError("empty class")
    if not wc.chain or wc.chain[-1] != wc.target:
        raise RelationError("chain does not exhaust the target relation")
    if not wc.chain[-1].refines(wc.target) or not wc.target.refines(wc.chain[-1]):
        raise RelationError("final relation differs from the target")


def orbit_witness_table(am: Amalgam, wc: WitnessChain
                        ) -> list[tuple[int, int, ReducedWord]]:
    """(point, class representative, verified word carrying the point's code
    to the representative's code) for every sample point."""
    out = []
    for cls in wc.target.classes():
        rep = cls[0]
        rep_code = wc.sample.points[rep]
        for idx in cls:
            decision = orbit_equivalent(am, rep_code, wc.sample.points[idx])
            if not decision.equivalent or decision.witness is None:
                raise RelationError(
                    f"target class pair ({rep},{idx}) has no orbit witness")
            out.append((idx, rep, decision.witness))
    return out


def witness_chain_to_json(am: Amalgam, wc: WitnessChain,
                          with_witnesses: bool = True) -> dict:
    """A JSON-ready dict: points as code strings, relations as class arrays."""
    doc = {
        "points": [format_code(am, x) for x in wc.sample.points],
        "n_values": list(wc.n_values),
        "chain": [[list(cls) for cls in er.classes()] for er in wc.chain],
        "target": [list(cls) for cls in wc.target.classes()],
        "stabilized_at": wc.stabilized_at,
        "certificates": [
            {"point": wc.sample.index_of(cert.code),
             "sigma_length": cert.sigma_length,
             "order": cert.order,
             "stabilizer": [word_to_str(am, w) for w in cert.stabilizer.elements]}
            for cert in wc.certificates
        ],
    }
    if with_witnesses:
        doc["witnesses"] = [
            {"point": idx, "class_rep": rep, "word": word_to_str(am, g)}
            for idx, rep, g in orbit_witness_table(am, wc)
        ]
    return doc


def witness_chain_from_json(am: Amalgam, doc: dict
                            ) -> tuple[FinitePointSet, list[FiniteER], FiniteER]:
    """Rebuild the point set and relations; verifies any embedded witnesses."""
    base = FinitePointSet(parse_code(am, s) for s in doc["points"])

    def er_from_classes(classes) -> FiniteER:
        er = FiniteER(base)
        seen: set[int] = set()
        for cls in classes:
            for a, b in zip(cls, cls[1:]):
                er.relate(a, b)
            for a in cls:
                if a in seen:
                    raise RelationError(f"point {a} in two classes")
                seen.add(a)
        if seen != set(range(len(base))):
            raise RelationError("classes do not partition the point set")
        return er

    chain = [er_from_classes(c) for c in doc["chain"]]
    target = er_from_classes(doc["target"])
    for w in doc.get("witnesses", []):
        g = word_from_str(am, w["word"])
        got = act_on_boundary(am, g, base.points[w["point"]])
        if got != base.points[w["class_rep"]]:
            raise RelationError(f"stored witness for point {w['point']} fails")
    return base, chain, target
