"""Proportionality audits: PJR, EJR and core stability with witnesses.

EJR is decided in k oracle calls (mark the agents still below the target
happiness, ask for the best candidate among them).  PJR additionally scans
sub-multisets of the committee, and core stability scans deviating
committees over the enumerated candidate space; both are exponential and
guarded, matching their coNP-completeness.  Every violation verdict carries
a witness that re-validates with direct arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from math import comb, ceil

from .errors import ElectionError, GuardExceeded
from .model import Committee, Matching, MatchingElection, approvers, happiness
from .engine import approval_weight, is_candidate, weighted_approval_winner
from .harness import enumerate_candidates

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class AxiomVerdict:
    """Outcome of one audit, with a self-certifying witness on violation.

    For EJR/PJR violations the witness is (ell, group, candidate): the group
    reaches the cohesion threshold ell*n/k, commonly approves the candidate,
    and is under-represented as the axiom defines.  For core violations the
    witness is (ell, group, deviation): a size-ell committee every group
    member strictly prefers.
    """

    axiom: str
    satisfied: bool
    ell: int | None = None
    group: tuple[int, ...] | None = None
    witness_candidate: Matching | None = None
    deviation: Committee | None = None
    threshold: Fraction | None = None


def _cohesion_threshold(election: MatchingElection, ell: int) -> Fraction:
    return Fraction(ell * election.n, election.k)


def _checked(election: MatchingElection, committee: Committee) -> None:
    if committee.size != election.k:
        raise ElectionError(
            f"committee has size {committee.size}, expected k = {election.k}"
        )
    for m in committee.support:
        election.check_matching(m)


def check_ejr(election: MatchingElection, committee: Committee) -> AxiomVerdict:
    """Extended justified representation.

    For each ell, agents with happiness below ell are marked; a violation
    exists iff some candidate is approved by at least ell*n/k marked agents,
    which one weighted-approval-winner call with 0/1 weights decides.
    """
    _checked(election, committee)
    h = happiness(election, committee)
    for ell in range(1, election.k + 1):
        marked = {a for a in range(election.n) if h[a] < ell}
        threshold = _cohesion_threshold(election, ell)
        if not marked or len(marked) < threshold:
            continue
        agent_weights = [ONE if a in marked else ZERO for a in range(election.n)]
        best = weighted_approval_winner(election, agent_weights)
        weight = approval_weight(election, agent_weights, best)
        if weight >= threshold:
            marked_supporters = sorted(marked & approvers(election, best))
            group = tuple(marked_supporters[: ceil(threshold)])
            return AxiomVerdict(
                "ejr", False, ell=ell, group=group, witness_candidate=best, threshold=threshold
            )
    return AxiomVerdict("ejr", True)


def check_pjr(
    election: MatchingElection, committee: Committee, *, max_support_scan: int = 10**6
) -> AxiomVerdict:
    """Proportional justified representation.

    A group violates PJR for ell iff the committee holds fewer than ell
    copies of candidates its members approve.  It suffices to scan the
    support subsets U whose total multiplicity is at most ell - 1, mark the
    agents whose approved committee members all lie in U, and ask whether
    ell*n/k marked agents share any candidate (one 0/1 oracle call).
    """
    _checked(election, committee)
    support = committee.support
    if (2 ** len(support)) * election.k > max_support_scan:
        raise GuardExceeded(
            f"PJR scan over 2^{len(support)} support subsets exceeds the guard; "
            f"checking PJR in matching elections is coNP-complete"
        )
    approves_member: dict[int, frozenset[Matching]] = {}
    supporter_cache = {m: approvers(election, m) for m in support}
    for a in range(election.n):
        approves_member[a] = frozenset(m for m in support if a in supporter_cache[m])
    multiplicity = committee.multiset()
    # Distinct marked sets recur across subsets; the oracle answer depends
    # only on the marked set, so cache it.
    oracle_cache: dict[frozenset[int], tuple[Fraction, Matching]] = {}
    for ell in range(1, election.k + 1):
        threshold = _cohesion_threshold(election, ell)
        for r in range(len(support) + 1):
            for combo in combinations(support, r):
                if sum(multiplicity[m] for m in combo) > ell - 1:
                    continue
                allowed = set(combo)
                marked = frozenset(
                    a for a in range(election.n) if approves_member[a] <= allowed
                )
                if len(marked) < threshold:
                    continue
                if marked not in oracle_cache:
                    agent_weights = [
                        ONE if a in marked else ZERO for a in range(election.n)
                    ]
                    best = weighted_approval_winner(election, agent_weights)
                    oracle_cache[marked] = (
                        approval_weight(election, agent_weights, best),
                        best,
                    )
                weight, best = oracle_cache[marked]
                if weight >= threshold:
                    group = tuple(
                        sorted(marked & approvers(election, best))[: ceil(threshold)]
                    )
                    return AxiomVerdict(
                        "pjr",
                        False,
                        ell=ell,
                        group=group,
                        witness_candidate=best,
                        threshold=threshold,
                    )
    return AxiomVerdict("pjr", True)


def check_core(
    election: MatchingElection,
    committee: Committee,
    *,
    max_edges: int = 16,
    max_deviations: int = 10**6,
) -> AxiomVerdict:
    """Core stability by exhaustive deviation search.

    Sound and complete given full candidate enumeration: every blocking
    committee can be assumed to consist of candidates, since replacing a
    member by a Pareto-improvement never loses a supporter.  Returns the
    lexicographically first violation (smallest ell, then canonical
    deviation order).  Guarded: checking core stability is coNP-hard.
    """
    _checked(election, committee)
    candidates = enumerate_candidates(election, max_edges=max_edges)
    total = sum(comb(len(candidates) + ell - 1, ell) for ell in range(1, election.k + 1))
    if total > max_deviations:
        raise GuardExceeded(
            f"core check would scan {total} deviating committees, beyond the guard "
            f"of {max_deviations}; checking core stability is coNP-hard"
        )
    h = happiness(election, committee)
    supporter_sets = [approvers(election, m) for m in candidates]
    for ell in range(1, election.k + 1):
        threshold = _cohesion_threshold(election, ell)
        for combo in combinations_with_replacement(range(len(candidates)), ell):
            gained = [0] * election.n
            for ci in combo:
                for a in supporter_sets[ci]:
                    gained[a] += 1
            blockers = tuple(a for a in range(election.n) if gained[a] > h[a])
            if len(blockers) >= threshold:
                counts: dict[Matching, int] = {}
                for ci in combo:
                    counts[candidates[ci]] = counts.get(candidates[ci], 0) + 1
                return AxiomVerdict(
                    "core",
                    False,
                    ell=ell,
                    group=blockers,
                    deviation=Committee.from_counts(counts),
                    threshold=threshold,
                )
    return AxiomVerdict("core", True)


def verify_blocking(
    election: MatchingElection,
    committee: Committee,
    group: tuple[int, ...] | list[int],
    deviation: Committee,
) -> bool:
    """True iff ``group`` blocks ``committee`` via ``deviation``.

    Checks that the deviation consists of candidates, that the group is
    large enough for ell = |deviation|, and that every group member strictly
    gains.  Built for fixtures too large for the exhaustive core check.
    """
    _checked(election, committee)
    if deviation.size == 0:
        raise ElectionError("deviation committee must be nonempty")
    ell = deviation.size
    if ell > election.k:
        raise ElectionError(f"deviation of size {ell} exceeds k = {election.k}")
    members = set(group)
    if len(members) < _cohesion_threshold(election, ell):
        return False
    for m in deviation.support:
        if not is_candidate(election, m):
            return False
    h_now = happiness(election, committee)
    h_dev = happiness(election, deviation)
    return all(h_dev[a] > h_now[a] for a in members)
