"""Exact (non-sequential) w-Thiele optimization.

Bipartite elections are solved in polynomial time by one weighted approval
winner call on a meta-election with k weighted copies of every agent: the
meta-matching is normalized so each agent's satisfied copies form a prefix,
extended to a perfect matching, collapsed to a k-regular bipartite
multigraph, and split into k perfect matchings.  Symmetric elections reduce
to bipartite ones through the Gallai-Edmonds decomposition: only the
matching between inessential nodes and their boundary carries information,
everything else is matched the same way in every candidate.  General
elections fall back to guarded exhaustive search, since exact optimization
there is NP-hard even for k = 2.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ElectionError, EngineError, GuardExceeded
from .model import (
    Committee,
    ElectionClass,
    Matching,
    MatchingElection,
    WeightSequence,
    approvers,
    classify,
    thiele_score,
)
from .engine import (
    WeightedGraph,
    gallai_edmonds,
    is_candidate,
    max_weight_matching,
    weighted_approval_winner,
)
from .harness import best_committee_by_enumeration, enumerate_candidates

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class MetaElection:
    """k weighted copies of every agent of a (padded) bipartite election.

    Copy i of agent a approves copy j of agent b iff a approves b; copy i
    carries weight w_i.  Padding dummies equalize the two sides and neither
    approve nor are approved by anyone.
    """

    election: MatchingElection
    weights: tuple[Fraction, ...]
    base_of: tuple[int, ...]
    copy_index: tuple[int, ...]
    side1_agents: tuple[int, ...]
    side2_agents: tuple[int, ...]
    k: int
    real_n: int

    def copies_of(self, base_agent: int) -> range:
        start = base_agent * self.k
        return range(start, start + self.k)


@dataclass(frozen=True)
class ThieleOutcome:
    committee: Committee
    score: Fraction
    method: str


def _pad_bipartite(
    election: MatchingElection, partition: tuple[tuple[int, ...], tuple[int, ...]]
) -> tuple[MatchingElection, tuple[int, ...], tuple[int, ...]]:
    """Append isolated dummy agents so both sides are the same size."""
    side1, side2 = (list(partition[0]), list(partition[1]))
    deficit = len(side1) - len(side2)
    names = list(election.names)
    approvals = [set(s) for s in election.approvals]
    next_id = election.n
    target = side2 if deficit > 0 else side1
    for i in range(abs(deficit)):
        name = f"~pad{i}"
        while name in names:
            name += "'"
        names.append(name)
        approvals.append(set())
        target.append(next_id)
        next_id += 1
    padded = MatchingElection(
        tuple(names), tuple(frozenset(s) for s in approvals), election.k
    )
    return padded, tuple(side1), tuple(side2)


def build_meta_election(
    election: MatchingElection,
    weights: WeightSequence,
    k: int,
    partition: tuple[tuple[int, ...], tuple[int, ...]],
) -> MetaElection:
    padded, side1, side2 = _pad_bipartite(election, partition)
    meta_names = []
    base_of = []
    copy_index = []
    meta_weights = []
    for agent in range(padded.n):
        for i in range(1, k + 1):
            meta_names.append(f"{padded.names[agent]}#{i}")
            base_of.append(agent)
            copy_index.append(i)
            meta_weights.append(weights[i] if agent < election.n else ZERO)
    meta_approvals: list[frozenset[int]] = []
    for agent in range(padded.n):
        approved_copies = frozenset(
            b * k + j for b in padded.approvals[agent] for j in range(k)
        )
        for _ in range(k):
            meta_approvals.append(approved_copies)
    meta = MatchingElection(tuple(meta_names), tuple(meta_approvals), 1)
    return MetaElection(
        meta,
        tuple(meta_weights),
        tuple(base_of),
        tuple(copy_index),
        side1,
        side2,
        k,
        election.n,
    )


def _meta_weight(meta: MetaElection, matching: Matching) -> Fraction:
    return sum((meta.weights[a] for a in approvers(meta.election, matching)), ZERO)


def _normalize_prefixes(meta: MetaElection, matching: Matching) -> Matching:
    """Permute each agent's copies so satisfied copies come first.

    Copies of one agent are interchangeable twins, so this preserves the
    matching's weight and Pareto-optimality; with non-increasing copy
    weights it cannot decrease (hence, at an optimum, cannot change) the
    weight.
    """
    mate: dict[int, int] = {}
    for a, b in matching.pairs:
        mate[a] = b
        mate[b] = a
    election = meta.election
    for agent in range(len(meta.base_of) // meta.k):
        copies = list(meta.copies_of(agent))
        satisfied = sorted(
            mate[c] for c in copies if c in mate and mate[c] in election.approvals[c]
        )
        other = sorted(
            mate[c] for c in copies if c in mate and mate[c] not in election.approvals[c]
        )
        partners = satisfied + other
        for c in copies:
            mate.pop(c, None)
        for c, p in zip(copies, partners):
            mate[c] = p
            mate[p] = c
    normalized = Matching.of({(min(a, b), max(a, b)) for a, b in mate.items()})
    return normalized


def _extend_to_perfect(meta: MetaElection, matching: Matching) -> Matching:
    """Pair unmatched copies across the sides in canonical index order."""
    matched = matching.agents
    k = meta.k
    side1_copies = [
        c for b in meta.side1_agents for c in meta.copies_of(b) if c not in matched
    ]
    side2_copies = [
        c for b in meta.side2_agents for c in meta.copies_of(b) if c not in matched
    ]
    if len(side1_copies) != len(side2_copies):
        raise EngineError("unmatched copies are unbalanced across the bipartition")
    extra = list(zip(sorted(side1_copies), sorted(side2_copies)))
    return Matching.of(list(matching.pairs) + extra)


def _collapse_to_multigraph(meta: MetaElection, perfect: Matching) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = {}
    for a, b in perfect.pairs:
        u, v = meta.base_of[a], meta.base_of[b]
        key = (min(u, v), max(u, v))
        counts[key] = counts.get(key, 0) + 1
    degrees: dict[int, int] = {}
    for (u, v), c in counts.items():
        degrees[u] = degrees.get(u, 0) + c
        degrees[v] = degrees.get(v, 0) + c
    if any(d != meta.k for d in degrees.values()) or len(degrees) != len(meta.base_of) // meta.k:
        raise EngineError("collapsed multigraph is not k-regular")
    return counts


def _extract_perfect_matchings(
    meta: MetaElection, counts: dict[tuple[int, int], int]
) -> list[Matching]:
    """Split the k-regular bipartite multigraph into k perfect matchings.

    Removing a perfect matching keeps the multigraph regular, so by Hall's
    theorem a perfect matching exists at every step; each step takes one
    unit-weight matching solve on the support graph.
    """
    n = len(meta.base_of) // meta.k
    remaining = dict(counts)
    matchings = []
    for _ in range(meta.k):
        support = WeightedGraph.of(n, [(u, v, ONE) for (u, v), c in remaining.items() if c > 0])
        pm = max_weight_matching(support)
        if 2 * len(pm.pairs) != n:
            raise EngineError("regular multigraph lost its perfect matching")
        for pair in pm.pairs:
            remaining[pair] -= 1
        matchings.append(pm)
    if any(c != 0 for c in remaining.values()):
        raise EngineError("perfect matching extraction left edges behind")
    return matchings


def _minimize(election: MatchingElection, matching: Matching) -> Matching:
    kept = [
        (a, b)
        for a, b in matching.pairs
        if a < election.n
        and b < election.n
        and (b in election.approvals[a] or a in election.approvals[b])
    ]
    return Matching.of(kept)


def bipartite_thiele(
    election: MatchingElection,
    weights: WeightSequence,
    k: int | None = None,
    *,
    classification: ElectionClass | None = None,
) -> ThieleOutcome:
    """Optimal w-Thiele committee of a bipartite election, in one oracle call
    on the meta-election plus k matching extractions."""
    size = election.k if k is None else k
    if size <= 0:
        raise ElectionError(f"committee size must be positive, got {size}")
    cls = classification or classify(election)
    if not cls.bipartite:
        raise ElectionError("bipartite_thiele requires a bipartite election")
    assert cls.bipartition is not None
    meta = build_meta_election(election, weights, size, cls.bipartition)
    winner = weighted_approval_winner(meta.election, meta.weights)
    normalized = _normalize_prefixes(meta, winner)
    if _meta_weight(meta, normalized) != _meta_weight(meta, winner):
        raise EngineError("prefix normalization changed the meta weight")
    satisfied_counts = _satisfied_prefix_lengths(meta, normalized)
    perfect = _extend_to_perfect(meta, normalized)
    counts = _collapse_to_multigraph(meta, perfect)
    extracted = _extract_perfect_matchings(meta, counts)
    members = [_minimize(election, m) for m in extracted]
    committee = Committee.from_counts(_count(members))
    for member in committee.support:
        if not is_candidate(election, member):
            raise EngineError("extracted matching is not a candidate")
    per_agent = [0] * election.n
    for m in members:
        for a in approvers(election, m):
            per_agent[a] += 1
    if tuple(per_agent) != satisfied_counts:
        raise EngineError("extraction changed some agent's happiness")
    score = thiele_score(election, weights, committee)
    if score != _meta_weight(meta, normalized):
        raise EngineError("committee score does not match the meta-matching weight")
    return ThieleOutcome(committee, score, "bipartite")


def _count(members: Sequence[Matching]) -> dict[Matching, int]:
    counts: dict[Matching, int] = {}
    for m in members:
        counts[m] = counts.get(m, 0) + 1
    return counts


def _satisfied_prefix_lengths(meta: MetaElection, matching: Matching) -> tuple[int, ...]:
    mate: dict[int, int] = {}
    for a, b in matching.pairs:
        mate[a] = b
        mate[b] = a
    election = meta.election
    out = []
    for agent in range(meta.real_n):
        satisfied = sum(
            1
            for c in meta.copies_of(agent)
            if c in mate and mate[c] in election.approvals[c]
        )
        out.append(satisfied)
    return tuple(out)


# ---------------------------------------------------------------------------
# Symmetric elections via Gallai-Edmonds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetricReduction:
    """Bipartite stand-in for a symmetric election.

    One side holds the inessential agents; the other holds their boundary
    plus, per inessential component of size s, s-1 dummies approving that
    whole component.  Core agents and all intra-component detail are fixed:
    the core's perfect matching is chosen once, and each component is
    near-perfectly matched on demand around its designated unmatched agent.
    ``psi`` is None for the degenerate case where no decision remains (then
    every candidate matches exactly the core).
    """

    base: MatchingElection
    psi: MatchingElection | None
    inessential: tuple[int, ...]
    boundary: tuple[int, ...]
    components: tuple[tuple[int, ...], ...]
    dummy_component: tuple[int, ...]
    core_matching: Matching
    base_to_psi: dict[int, int]
    psi_to_base: tuple[int, ...]


def symmetric_to_bipartite(election: MatchingElection) -> SymmetricReduction:
    """Build the bipartite reduction of a symmetric election.

    Every candidate matches the core perfectly, matches each boundary agent
    into a distinct inessential component, and near-perfectly matches each
    component; the only degree of freedom is which inessential agents pair
    with the boundary and which one per component stays unmatched.  The
    reduction exposes exactly that choice as a bipartite election.
    """
    cls = classify(election)
    if not cls.symmetric:
        raise ElectionError("symmetric_to_bipartite requires a symmetric election")
    graph = WeightedGraph.of(
        election.n, [(a, b, ONE) for a, b in election.approval_graph.undirected_edges]
    )
    decomposition = gallai_edmonds(graph)
    core_edges = [
        (a, b, ONE)
        for a, b, _ in graph.edges
        if a in set(decomposition.core) and b in set(decomposition.core)
    ]
    core_matching = max_weight_matching(WeightedGraph.of(election.n, core_edges))
    if 2 * len(core_matching.pairs) != len(decomposition.core):
        raise EngineError("core does not admit a perfect matching")

    psi_to_base = list(decomposition.inessential) + list(decomposition.boundary)
    base_to_psi = {b: i for i, b in enumerate(psi_to_base)}
    names = [election.names[b] for b in psi_to_base]
    approvals: list[set[int]] = [set() for _ in psi_to_base]
    for y in decomposition.inessential:
        for x in election.approvals[y]:
            if x in set(decomposition.boundary):
                approvals[base_to_psi[y]].add(base_to_psi[x])
                approvals[base_to_psi[x]].add(base_to_psi[y])
    dummy_component = []
    for ci, comp in enumerate(decomposition.components):
        for j in range(len(comp) - 1):
            name = f"~d{ci}.{j}"
            while name in names:
                name += "'"
            idx = len(names)
            names.append(name)
            approvals.append(set())
            dummy_component.append(ci)
            for y in comp:
                approvals[idx].add(base_to_psi[y])
                approvals[base_to_psi[y]].add(idx)
    psi: MatchingElection | None
    if len(names) < 2 or all(not s for s in approvals):
        psi = None
    else:
        psi = MatchingElection(
            tuple(names), tuple(frozenset(s) for s in approvals), election.k
        )
    return SymmetricReduction(
        election,
        psi,
        decomposition.inessential,
        decomposition.boundary,
        decomposition.components,
        tuple(dummy_component),
        core_matching,
        base_to_psi,
        tuple(psi_to_base),
    )


def _near_perfect(
    reduction: SymmetricReduction,
    cache: dict[tuple[int, int], Matching],
    component_index: int,
    excluded: int,
) -> Matching:
    """Perfect matching of a factor-critical component minus one agent."""
    key = (component_index, excluded)
    if key not in cache:
        comp = set(reduction.components[component_index])
        election = reduction.base
        edges = [
            (a, b, ONE)
            for a, b in election.approval_graph.undirected_edges
            if a in comp and b in comp and a != excluded and b != excluded
        ]
        m = max_weight_matching(WeightedGraph.of(election.n, edges))
        if 2 * len(m.pairs) != len(comp) - 1:
            raise EngineError("component minus one agent lost its perfect matching")
        cache[key] = m
    return cache[key]


def lift_committee(reduction: SymmetricReduction, psi_committee: Committee) -> Committee:
    """Map a committee of the reduction back to the symmetric election.

    Per matching: keep the boundary pairs, add the fixed core matching, and
    near-perfectly match every component around its designated agent (the
    boundary-matched one if any, else the one left unmatched in the
    reduction).  Inessential agents keep their per-matching happiness
    exactly; core and boundary agents approve every lifted matching.
    """
    if reduction.psi is None:
        raise ElectionError("degenerate reduction has no bipartite election to lift from")
    psi = reduction.psi
    base = reduction.base
    n_real = len(reduction.psi_to_base)
    component_of = {
        y: ci for ci, comp in enumerate(reduction.components) for y in comp
    }
    cache: dict[tuple[int, int], Matching] = {}
    counts: dict[Matching, int] = {}
    for psi_matching, count in psi_committee.entries:
        if not is_candidate(psi, psi_matching):
            raise ElectionError("lift_committee requires candidates of the reduction")
        pairs = list(reduction.core_matching.pairs)
        mate: dict[int, int] = {}
        for a, b in psi_matching.pairs:
            mate[a] = b
            mate[b] = a
        designated: dict[int, int] = {}
        matched_inessential: set[int] = set()
        for psi_y in range(len(reduction.inessential)):
            y = reduction.psi_to_base[psi_y]
            partner = mate.get(psi_y)
            if partner is None:
                continue
            if partner < n_real:
                x = reduction.psi_to_base[partner]
                pairs.append((min(x, y), max(x, y)))
                ci = component_of[y]
                if ci in designated:
                    raise EngineError("two agents of one component matched to the boundary")
                designated[ci] = y
            matched_inessential.add(y)
        for ci, comp in enumerate(reduction.components):
            if ci not in designated:
                unmatched = [y for y in comp if y not in matched_inessential]
                if len(unmatched) != 1:
                    raise EngineError("component has no unique designated agent")
                designated[ci] = unmatched[0]
            internal = _near_perfect(reduction, cache, ci, designated[ci])
            pairs.extend(internal.pairs)
        lifted = Matching.of(pairs)
        lifted_approvers = approvers(base, lifted)
        psi_approvers = approvers(psi, psi_matching)
        for psi_y, y in enumerate(reduction.psi_to_base[: len(reduction.inessential)]):
            if (psi_y in psi_approvers) != (y in lifted_approvers):
                raise EngineError("lift changed an inessential agent's happiness")
        counts[lifted] = counts.get(lifted, 0) + count
    return Committee.from_counts(counts)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def exact_thiele(
    election: MatchingElection,
    weights: WeightSequence,
    k: int | None = None,
    *,
    max_edges: int = 16,
    max_multisets: int = 10**6,
) -> ThieleOutcome:
    """Optimal w-Thiele committee: polynomial algorithms for bipartite and
    symmetric elections, guarded exhaustive search otherwise."""
    size = election.k if k is None else k
    if size <= 0:
        raise ElectionError(f"committee size must be positive, got {size}")
    cls = classify(election)
    if cls.bipartite:
        return bipartite_thiele(election, weights, size, classification=cls)
    if cls.symmetric:
        reduction = symmetric_to_bipartite(election)
        if reduction.psi is None:
            member = Matching.of(reduction.core_matching.pairs)
            committee = Committee.from_counts({member: size})
            return ThieleOutcome(
                committee, thiele_score(election, weights, committee), "symmetric"
            )
        psi_outcome = bipartite_thiele(reduction.psi.with_k(size), weights, size)
        committee = lift_committee(reduction, psi_outcome.committee)
        return ThieleOutcome(
            committee, thiele_score(election, weights, committee), "symmetric"
        )
    try:
        candidates = enumerate_candidates(election, max_edges=max_edges)
        committee, score = best_committee_by_enumeration(
            election, weights, size, candidates, max_multisets=max_multisets
        )
    except GuardExceeded as exc:
        raise GuardExceeded(
            f"{exc}; exact w-Thiele on general matching elections is NP-hard "
            f"even for k = 2, so no unguarded fallback exists"
        ) from exc
    return ThieleOutcome(committee, score, "brute-force")
