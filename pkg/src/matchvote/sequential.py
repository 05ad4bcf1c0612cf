"""Sequential committee rules built on the weighted approval winner oracle.

seq-w-Thiele re-weights agents by their marginal contribution each round.
seq-Phragmén and the method of equal shares (Rule X) both search a
piecewise-linear optimal-value curve for its first crossing of 1; the
crossing search is shared and needs one oracle call per discovered linear
piece.  ``verify_run`` replays a given selection sequence and certifies
round-by-round that each chosen candidate attains the round optimum, which
makes committees produced under adversarial tie-breaking checkable.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .errors import ElectionError, EngineError, GuardExceeded
from .model import Committee, Matching, MatchingElection, WeightSequence, approvers
from .engine import approval_weight, is_candidate, weighted_approval_winner

ZERO = Fraction(0)
ONE = Fraction(1)

Line = tuple[Fraction, Fraction]  # (intercept, slope)


# ---------------------------------------------------------------------------
# Parametric crossing search
# ---------------------------------------------------------------------------

Evaluation = tuple[Fraction, Line, Matching]
Evaluator = Callable[[Fraction], Evaluation]


def _solve(line: Line, target: Fraction) -> Fraction:
    intercept, slope = line
    if slope <= 0:
        raise EngineError("crossing search hit a non-increasing line")
    return (target - intercept) / slope


def min_crossing(evaluate: Evaluator, lo: Fraction, hi: Fraction, target: Fraction) -> Fraction:
    """Smallest x in [lo, hi] with f(x) == target, for f the upper envelope
    of the affine functions produced by ``evaluate``.

    Requires f convex and non-decreasing on [lo, hi] with f(lo) < target and
    f(hi) >= target.  ``evaluate`` must return the exact envelope value at x
    together with an affine function tight at x and nowhere above f.  Each
    iteration either finishes or discovers a line of strictly intermediate
    slope, so the number of oracle calls is bounded by the number of
    distinct slopes.
    """
    value_lo, line_lo, _ = evaluate(lo)
    value_hi, line_hi, _ = evaluate(hi)
    if not (value_lo < target <= value_hi):
        raise EngineError("crossing search bracket does not contain the target")
    while True:
        if line_lo == line_hi:
            return _solve(line_lo, target)
        (b1, s1), (b2, s2) = line_lo, line_hi
        if s1 == s2:
            # Parallel tight lines can only both be tight if identical.
            raise EngineError("distinct parallel tight lines in crossing search")
        cross = (b2 - b1) / (s1 - s2)
        if cross <= lo:
            # Both lines tight at lo; convexity pins f to the upper line.
            return _solve(line_hi, target)
        if cross >= hi:
            return _solve(line_lo, target)
        value, line_new, _ = evaluate(cross)
        at_cross = b1 + s1 * cross
        if value == at_cross:
            # cross is the single breakpoint between the two pieces.
            if value >= target:
                return _solve(line_lo, target)
            return _solve(line_hi, target)
        if value >= target:
            hi, line_hi = cross, line_new
        else:
            lo, line_lo = cross, line_new


# ---------------------------------------------------------------------------
# seq-w-Thiele
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeqThieleRound:
    marginal: Fraction
    chosen: Matching


@dataclass(frozen=True)
class SeqThieleRun:
    committee: Committee
    rounds: tuple[SeqThieleRound, ...]


def seq_thiele(
    election: MatchingElection, weights: WeightSequence, k: int | None = None
) -> SeqThieleRun:
    """Greedy w-Thiele: each round adds the candidate with maximum marginal
    score, found by one oracle call with agent weight w_{h_a + 1}."""
    size = election.k if k is None else k
    if size <= 0:
        raise ElectionError(f"committee size must be positive, got {size}")
    h = [0] * election.n
    rounds = []
    sequence = []
    for _ in range(size):
        agent_weights = [weights[h[a] + 1] for a in range(election.n)]
        winner = weighted_approval_winner(election, agent_weights)
        marginal = approval_weight(election, agent_weights, winner)
        for a in approvers(election, winner):
            h[a] += 1
        rounds.append(SeqThieleRound(marginal, winner))
        sequence.append(winner)
    return SeqThieleRun(Committee.from_sequence(sequence), tuple(rounds))


def seq_pav(election: MatchingElection, k: int | None = None) -> SeqThieleRun:
    return seq_thiele(election, WeightSequence.pav(), k)


# ---------------------------------------------------------------------------
# seq-Phragmén
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhragmenRound:
    t_star: Fraction
    chosen: Matching
    budgets_after: tuple[Fraction, ...]


@dataclass(frozen=True)
class PhragmenRun:
    committee: Committee
    rounds: tuple[PhragmenRound, ...]
    elapsed: Fraction
    budgets: tuple[Fraction, ...]


def _phragmen_evaluator(
    election: MatchingElection, budgets: Sequence[Fraction]
) -> Evaluator:
    cache: dict[Fraction, Evaluation] = {}

    def evaluate(t: Fraction) -> Evaluation:
        if t not in cache:
            agent_weights = [b + t for b in budgets]
            winner = weighted_approval_winner(election, agent_weights)
            group = approvers(election, winner)
            intercept = sum((budgets[a] for a in group), ZERO)
            line = (intercept, Fraction(len(group)))
            cache[t] = (intercept + len(group) * t, line, winner)
        return cache[t]

    return evaluate


def _phragmen_round(
    election: MatchingElection, budgets: list[Fraction]
) -> tuple[Fraction, Matching]:
    evaluate = _phragmen_evaluator(election, budgets)
    value0, _, winner0 = evaluate(ZERO)
    if value0 > ONE:
        raise EngineError("a supporter group already exceeds one dollar")
    if value0 == ONE:
        return ZERO, winner0
    t_star = min_crossing(evaluate, ZERO, ONE, ONE)
    value, _, winner = evaluate(t_star)
    if value != ONE:
        raise EngineError("seq-Phragmén crossing search returned a non-tight time")
    return t_star, winner


def seq_phragmen(election: MatchingElection, k: int | None = None) -> PhragmenRun:
    """Continuous-budget rule: agents earn money at unit speed; the first
    candidate whose supporters jointly hold one dollar is bought and the
    supporters' budgets reset to zero.

    The purchase time solves f(t) = 1 on the optimal value curve
    f(t) = max over candidates of (group budget + group size * t).
    """
    size = election.k if k is None else k
    if size <= 0:
        raise ElectionError(f"committee size must be positive, got {size}")
    budgets = [ZERO] * election.n
    elapsed = ZERO
    rounds = []
    sequence = []
    for _ in range(size):
        t_star, winner = _phragmen_round(election, budgets)
        elapsed += t_star
        budgets = [b + t_star for b in budgets]
        for a in approvers(election, winner):
            budgets[a] = ZERO
        rounds.append(PhragmenRound(t_star, winner, tuple(budgets)))
        sequence.append(winner)
    return PhragmenRun(Committee.from_sequence(sequence), tuple(rounds), elapsed, tuple(budgets))


# ---------------------------------------------------------------------------
# Rule X (method of equal shares)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RuleXRound:
    q_star: Fraction
    chosen: Matching
    payments: tuple[Fraction, ...]
    budgets_after: tuple[Fraction, ...]
    probes: tuple[tuple[Fraction, Fraction], ...]
    """(q, f(q)) at the budget-value breakpoints evaluated while bracketing."""


@dataclass(frozen=True)
class RuleXRun:
    committee: Committee
    rounds: tuple[RuleXRound, ...]
    budgets: tuple[Fraction, ...]
    completion: str
    purchased: int
    target_size: int

    @property
    def stopped_short(self) -> bool:
        return self.purchased < self.target_size


COMPLETION_POLICIES = ("none", "fill")


def _rulex_round(
    election: MatchingElection, budgets: list[Fraction]
) -> tuple[Fraction, Matching, tuple[tuple[Fraction, Fraction], ...]] | None:
    """One purchase: minimal q with f(q) = 1 for f(q) = max over candidates
    of sum(min(budget, q)) over supporters, or None when nothing is
    affordable.

    The curve is convex between consecutive distinct budget values (slope
    changes elsewhere only when the arg-max candidate changes), so the
    leftmost bracketing interval is found by probing the budget values and
    the crossing search runs inside it.
    """
    raw_cache: dict[Fraction, tuple[Fraction, Matching]] = {}

    def evaluate_raw(q: Fraction) -> tuple[Fraction, Matching]:
        if q not in raw_cache:
            agent_weights = [min(b, q) for b in budgets]
            winner = weighted_approval_winner(election, agent_weights)
            raw_cache[q] = (approval_weight(election, agent_weights, winner), winner)
        return raw_cache[q]

    points = sorted({b for b in budgets if b > 0})
    if not points:
        return None
    probes: list[tuple[Fraction, Fraction]] = []
    lo = ZERO
    bracket = None
    for q in points:
        value, _ = evaluate_raw(q)
        probes.append((q, value))
        if value >= ONE:
            bracket = (lo, q)
            break
        lo = q
    if bracket is None:
        return None
    lo, hi = bracket

    def evaluate(q: Fraction) -> Evaluation:
        value, winner = evaluate_raw(q)
        group = approvers(election, winner)
        # No budget value lies strictly inside (lo, hi), so on [lo, hi] each
        # supporter contributes either its full budget or exactly q.
        intercept = sum((budgets[a] for a in group if budgets[a] <= lo), ZERO)
        slope = Fraction(sum(1 for a in group if budgets[a] >= hi))
        return value, (intercept, slope), winner

    value_lo, _, _ = evaluate(lo)
    if value_lo == ONE:
        q_star = lo
    else:
        q_star = min_crossing(evaluate, lo, hi, ONE)
    value, _, winner = evaluate(q_star)
    if value != ONE:
        raise EngineError("Rule X crossing search returned a non-tight price")
    return q_star, winner, tuple(probes)


def rule_x(
    election: MatchingElection, k: int | None = None, completion: str = "none"
) -> RuleXRun:
    """Method of equal shares: every agent starts with k/n dollars; each
    round buys, for the smallest feasible per-agent price q, a candidate
    whose supporters can jointly pay one dollar at caps min(budget, q).

    Stops early when no candidate is affordable.  ``completion`` is "none"
    (return the short committee) or "fill" (pad with the unit-weight
    approval winner, recorded separately from the purchase rounds).
    """
    size = election.k if k is None else k
    if size <= 0:
        raise ElectionError(f"committee size must be positive, got {size}")
    if completion not in COMPLETION_POLICIES:
        raise ElectionError(f"unknown completion policy {completion!r}")
    budgets = [Fraction(size, election.n)] * election.n
    rounds = []
    sequence = []
    for _ in range(size):
        outcome = _rulex_round(election, budgets)
        if outcome is None:
            break
        q_star, winner, probes = outcome
        payments = [ZERO] * election.n
        for a in approvers(election, winner):
            payments[a] = min(budgets[a], q_star)
            budgets[a] -= payments[a]
        if sum(payments, ZERO) != ONE:
            raise EngineError("Rule X purchase did not collect exactly one dollar")
        if any(b < 0 for b in budgets):
            raise EngineError("Rule X drove a budget negative")
        rounds.append(RuleXRound(q_star, winner, tuple(payments), tuple(budgets), probes))
        sequence.append(winner)
    purchased = len(sequence)
    if completion == "fill" and purchased < size:
        filler = weighted_approval_winner(election, [ONE] * election.n)
        sequence.extend([filler] * (size - purchased))
    return RuleXRun(
        Committee.from_sequence(sequence),
        tuple(rounds),
        tuple(budgets),
        completion,
        purchased,
        size,
    )


# ---------------------------------------------------------------------------
# LS-PAV
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LsPavSwap:
    removed: Matching
    added: Matching
    score_after: Fraction


@dataclass(frozen=True)
class LsPavRun:
    committee: Committee
    score: Fraction
    swaps: tuple[LsPavSwap, ...]


def _pav_score(weights: WeightSequence, h: Sequence[int]) -> Fraction:
    return sum((weights.prefix(x) for x in h), ZERO)


def ls_pav(
    election: MatchingElection,
    k: int | None = None,
    initial: Committee | None = None,
) -> LsPavRun:
    """Local-search PAV: swap one committee member for the best replacement
    while this raises the PAV score by at least
    eps = 1 / ((1 + 2(k-1)) (k-1) k); the fixpoint is core stable.

    Starts from the seq-PAV committee unless ``initial`` is supplied (the
    guarantee holds for any start; seq-PAV just converges faster).  k = 1
    degenerates to the plain approval winner since no eps is defined.
    """
    size = election.k if k is None else k
    if size <= 0:
        raise ElectionError(f"committee size must be positive, got {size}")
    weights = WeightSequence.pav()
    if size == 1:
        winner = weighted_approval_winner(election, [ONE] * election.n)
        committee = Committee.from_counts({winner: 1})
        return LsPavRun(committee, _pav_score(weights, _happiness_of(election, committee)), ())

    epsilon = Fraction(1, (1 + 2 * (size - 1)) * (size - 1) * size)
    if initial is None:
        current = seq_pav(election, size).committee.without_trace()
    else:
        if initial.size != size:
            raise ElectionError(f"initial committee has size {initial.size}, expected {size}")
        current = initial.without_trace()
    h = list(_happiness_of(election, current))
    score = _pav_score(weights, h)
    swaps: list[LsPavSwap] = []
    max_swaps = 1000 + 40 * election.n * size**4
    while True:
        improved = False
        for removed in current.support:
            removed_supporters = approvers(election, removed)
            reduced = h[:]
            for a in removed_supporters:
                reduced[a] -= 1
            agent_weights = [weights[reduced[a] + 1] for a in range(election.n)]
            added = weighted_approval_winner(election, agent_weights)
            gain = approval_weight(election, agent_weights, added)
            base = score - sum(
                (weights[reduced[a] + 1] for a in removed_supporters), ZERO
            )
            new_score = base + gain
            if new_score >= score + epsilon:
                counts = current.multiset()
                counts[removed] -= 1
                if counts[removed] == 0:
                    del counts[removed]
                counts[added] = counts.get(added, 0) + 1
                current = Committee.from_counts(counts)
                for a in approvers(election, added):
                    reduced[a] += 1
                h = reduced
                score = _pav_score(weights, h)
                if score != new_score:
                    raise EngineError("LS-PAV incremental score drifted")
                swaps.append(LsPavSwap(removed, added, score))
                improved = True
                break
        if not improved:
            return LsPavRun(current, score, tuple(swaps))
        if len(swaps) > max_swaps:
            raise EngineError("LS-PAV exceeded its swap budget")


def _happiness_of(election: MatchingElection, committee: Committee) -> tuple[int, ...]:
    h = [0] * election.n
    for m, c in committee.entries:
        for a in approvers(election, m):
            h[a] += c
    return tuple(h)


# ---------------------------------------------------------------------------
# Run verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerifiedRound:
    optimum: Fraction
    achieved: Fraction | None
    chosen: Matching
    valid: bool


@dataclass(frozen=True)
class RunCertificate:
    rule: str
    valid: bool
    rounds: tuple[VerifiedRound, ...]
    first_invalid: int | None
    message: str = ""


VERIFIABLE_RULES = ("seq-thiele", "seq-pav", "seq-phragmen", "rule-x")


def verify_run(
    election: MatchingElection,
    rule: str,
    sequence: Sequence[Matching],
    weights: WeightSequence | None = None,
) -> RunCertificate:
    """Replay a selection sequence and certify it as a valid execution.

    A round is valid when the supplied candidate exactly attains the round
    optimum (maximum marginal score, earliest purchase time t*, or minimal
    price q*), regardless of how ties were broken.  The first failing round
    is reported.  Rule tags: seq-thiele (requires weights), seq-pav,
    seq-phragmen, rule-x.
    """
    if rule not in VERIFIABLE_RULES:
        raise ElectionError(f"unknown rule tag {rule!r}; expected one of {VERIFIABLE_RULES}")
    if rule == "seq-pav":
        rule_weights: WeightSequence | None = WeightSequence.pav()
    elif rule == "seq-thiele":
        if weights is None:
            raise ElectionError("verify_run needs a weight sequence for seq-thiele")
        rule_weights = weights
    else:
        rule_weights = weights  # ignored below
    if len(sequence) > election.k:
        return RunCertificate(
            rule, False, (), 1, f"sequence has {len(sequence)} rounds but k = {election.k}"
        )
    for i, m in enumerate(sequence):
        if not is_candidate(election, m):
            return RunCertificate(
                rule, False, (), i + 1, f"round {i + 1} selects a non-candidate matching"
            )

    rounds: list[VerifiedRound] = []
    first_invalid: int | None = None
    message = ""

    if rule in ("seq-thiele", "seq-pav"):
        assert rule_weights is not None
        h = [0] * election.n
        for i, chosen in enumerate(sequence):
            agent_weights = [rule_weights[h[a] + 1] for a in range(election.n)]
            best = weighted_approval_winner(election, agent_weights)
            optimum = approval_weight(election, agent_weights, best)
            achieved = approval_weight(election, agent_weights, chosen)
            ok = achieved == optimum
            rounds.append(VerifiedRound(optimum, achieved, chosen, ok))
            if not ok and first_invalid is None:
                first_invalid = i + 1
                message = f"round {i + 1}: marginal {achieved} < optimum {optimum}"
                break
            for a in approvers(election, chosen):
                h[a] += 1
    elif rule == "seq-phragmen":
        budgets = [ZERO] * election.n
        for i, chosen in enumerate(sequence):
            t_star, _ = _phragmen_round(election, budgets)
            group = approvers(election, chosen)
            achieved = sum((budgets[a] for a in group), ZERO) + len(group) * t_star
            ok = achieved == ONE
            rounds.append(VerifiedRound(t_star, achieved, chosen, ok))
            if not ok and first_invalid is None:
                first_invalid = i + 1
                message = f"round {i + 1}: group holds {achieved} dollars at t* = {t_star}"
                break
            budgets = [b + t_star for b in budgets]
            for a in group:
                budgets[a] = ZERO
    else:  # rule-x
        budgets = [Fraction(election.k, election.n)] * election.n
        for i, chosen in enumerate(sequence):
            outcome = _rulex_round(election, budgets)
            if outcome is None:
                first_invalid = i + 1
                message = f"round {i + 1}: no candidate is affordable, the rule has stopped"
                break
            q_star, _, _ = outcome
            group = approvers(election, chosen)
            achieved = sum((min(budgets[a], q_star) for a in group), ZERO)
            ok = achieved == ONE
            rounds.append(VerifiedRound(q_star, achieved, chosen, ok))
            if not ok and first_invalid is None:
                first_invalid = i + 1
                message = f"round {i + 1}: group affords {achieved} at q* = {q_star}"
                break
            for a in group:
                budgets[a] -= min(budgets[a], q_star)

    return RunCertificate(rule, first_invalid is None, tuple(rounds), first_invalid, message)


# ---------------------------------------------------------------------------
# Co-winner exploration (desk scale)
# ---------------------------------------------------------------------------


def explore_cowinners(
    election: MatchingElection,
    rule: str,
    weights: WeightSequence | None = None,
    *,
    max_edges: int = 16,
    max_states: int = 20000,
) -> frozenset[Committee]:
    """All committees a sequential rule can return under some tie-breaking.

    Branches over every candidate attaining each round's optimum, so the
    state space is exponential; both candidate enumeration and the branch
    count are guarded.  Rule tags as in ``verify_run``.
    """
    from .harness import enumerate_candidates  # local import: avoid a cycle

    if rule not in VERIFIABLE_RULES:
        raise ElectionError(f"unknown rule tag {rule!r}; expected one of {VERIFIABLE_RULES}")
    if rule == "seq-pav":
        rule_weights: WeightSequence | None = WeightSequence.pav()
    elif rule == "seq-thiele":
        if weights is None:
            raise ElectionError("explore_cowinners needs a weight sequence for seq-thiele")
        rule_weights = weights
    else:
        rule_weights = None
    candidates = enumerate_candidates(election, max_edges=max_edges)
    outcomes: set[Committee] = set()
    visited = 0

    def tied_candidates(budgets_or_h) -> tuple[list[Matching], object]:
        if rule in ("seq-thiele", "seq-pav"):
            assert rule_weights is not None
            h = budgets_or_h
            agent_weights = [rule_weights[h[a] + 1] for a in range(election.n)]
            best = max(
                approval_weight(election, agent_weights, c) for c in candidates
            )
            tied = [
                c for c in candidates if approval_weight(election, agent_weights, c) == best
            ]
            return tied, None
        if rule == "seq-phragmen":
            t_star, _ = _phragmen_round(election, budgets_or_h)
            tied = []
            for c in candidates:
                group = approvers(election, c)
                if sum((budgets_or_h[a] for a in group), ZERO) + len(group) * t_star == ONE:
                    tied.append(c)
            return tied, t_star
        outcome = _rulex_round(election, list(budgets_or_h))
        if outcome is None:
            return [], None
        q_star = outcome[0]
        tied = [
            c
            for c in candidates
            if sum((min(budgets_or_h[a], q_star) for a in approvers(election, c)), ZERO)
            == ONE
        ]
        return tied, q_star

    def walk(round_index: int, state, picks: tuple[Matching, ...]) -> None:
        nonlocal visited
        visited += 1
        if visited > max_states:
            raise GuardExceeded(
                f"co-winner exploration exceeded {max_states} states; "
                f"the co-winner set can be exponential"
            )
        if round_index == election.k:
            outcomes.add(Committee.from_sequence(picks).without_trace())
            return
        tied, extra = tied_candidates(state)
        if not tied:
            # Purchasing rules may stop early; record the short committee.
            outcomes.add(Committee.from_sequence(picks).without_trace())
            return
        for chosen in tied:
            group = approvers(election, chosen)
            if rule in ("seq-thiele", "seq-pav"):
                h = list(state)
                for a in group:
                    h[a] += 1
                walk(round_index + 1, tuple(h), picks + (chosen,))
            elif rule == "seq-phragmen":
                budgets = [b + extra for b in state]
                for a in group:
                    budgets[a] = ZERO
                walk(round_index + 1, tuple(budgets), picks + (chosen,))
            else:
                budgets = list(state)
                for a in group:
                    budgets[a] -= min(budgets[a], extra)
                walk(round_index + 1, tuple(budgets), picks + (chosen,))

    if rule in ("seq-thiele", "seq-pav"):
        walk(0, tuple([0] * election.n), ())
    else:
        initial = (
            tuple([ZERO] * election.n)
            if rule == "seq-phragmen"
            else tuple([Fraction(election.k, election.n)] * election.n)
        )
        walk(0, initial, ())
    return frozenset(outcomes)
