"""Acceptance suite.

One test per criterion, at full stated scale; the terminal summary prints a
pass/fail line per criterion.  All comparisons are exact (Fraction
equality); the only tolerance anywhere is the 60-second wall-clock budget
for the 98-agent greedy run.
"""
from __future__ import annotations

import random
import time
from fractions import Fraction

import pytest

from matchvote import (
    Committee,
    WeightSequence,
    approval_weight,
    approvers,
    check_core,
    check_ejr,
    check_pjr,
    enumerate_candidates,
    exact_thiele,
    gallai_edmonds,
    happiness,
    is_candidate,
    ls_pav,
    max_weight_matching,
    max_weight_value,
    oracle_optimal_committee,
    rule_x,
    seq_pav,
    seq_phragmen,
    verify_blocking,
    verify_run,
    weighted_approval_winner,
    WeightedGraph,
)
from matchvote.fixtures import (
    fig1,
    fig1_candidates,
    footnote4,
    footnote4_candidates,
    phragmen_alternating_sequence,
    prop_phragmen_ejr,
    prop_rulex_core,
    prop_seq_core,
    rulex_proof_run,
    seq_core_blocking,
    seq_core_proof_committee,
)
from conftest import random_corpus
from oracles import (
    brute_matching_number,
    brute_max_weight,
    brute_pjr_violation,
    brute_waw_value,
    phragmen_round_optimum,
    rulex_round_optimum,
)

F = Fraction
ZERO = F(0)


@pytest.mark.criterion("1", "six-agent instance: rules, tie set, core stability")
def test_criterion_1_fig1_reproduction():
    e = fig1()
    c1, c2, c3 = fig1_candidates(e)
    pav = WeightSequence.pav()

    run = seq_pav(e)
    assert run.committee.multiset() == {c1: 1, c2: 1, c3: 1}

    outcome = exact_thiele(e, pav)
    assert outcome.score == 7
    assert outcome.committee.multiset() == {c1: 1, c2: 1, c3: 1}

    phragmen = seq_phragmen(e)
    assert verify_run(e, "seq-phragmen", phragmen.committee.trace).valid
    tie_set = ({c1: 1, c2: 1, c3: 1}, {c1: 2, c2: 1})
    assert phragmen.committee.multiset() in tie_set
    # Both tied multisets admit valid runs.
    assert verify_run(e, "seq-phragmen", [c1, c2, c1]).valid
    assert verify_run(e, "seq-phragmen", [c2, c1, c3]).valid

    mes = rule_x(e, completion="none")
    assert mes.purchased == 2
    assert mes.committee.multiset() == {c1: 1, c2: 1}

    for counts in ({c1: 1, c2: 1, c3: 1}, {c1: 2, c2: 1}, {c1: 1, c2: 2}):
        assert check_core(e, Committee.from_counts(counts)).satisfied


@pytest.mark.criterion("2", "four-agent instance: PJR verdicts for both splits")
def test_criterion_2_footnote4_pjr():
    e = footnote4()
    c, cp = footnote4_candidates(e)

    verdict = check_pjr(e, Committee.from_counts({c: 2, cp: 2}))
    assert not verdict.satisfied
    assert verdict.ell == 3
    assert tuple(e.names[a] for a in verdict.group) == ("a1", "a3", "a4")

    balanced = Committee.from_counts({c: 3, cp: 1})
    assert check_pjr(e, balanced).satisfied

    # Independent confirmation by the exhaustive cohesive-group scan.
    cands = enumerate_candidates(e)
    assert brute_pjr_violation(e, cands, Committee.from_counts({c: 2, cp: 2})) is not None
    assert brute_pjr_violation(e, cands, balanced) is None


@pytest.mark.criterion("3", "three-agent alternating run: valid but EJR-violating")
def test_criterion_3_phragmen_ejr_counterexample():
    e = prop_phragmen_ejr()
    sequence = phragmen_alternating_sequence(e)
    certificate = verify_run(e, "seq-phragmen", sequence)
    assert certificate.valid

    committee = Committee.from_sequence(sequence)
    verdict = check_ejr(e, committee)
    assert not verdict.satisfied
    assert verdict.ell == 4
    assert tuple(e.names[a] for a in verdict.group) == ("a1", "a3")


@pytest.mark.criterion("4", "thirteen-agent equal-shares run: valid and blocked")
def test_criterion_4_rulex_core_counterexample():
    e = prop_rulex_core()
    sequence, prices, group, deviation = rulex_proof_run(e)
    certificate = verify_run(e, "rule-x", sequence)
    assert certificate.valid
    assert [r.optimum for r in certificate.rounds] == prices
    assert prices == [F(1, 8)] * 8 + [F(1, 3)] * 3 + [F(1), F(1)]

    committee = Committee.from_sequence(sequence)
    assert tuple(e.names[a] for a in group) == ("a2", "a3", "c2", "d2")
    assert verify_blocking(e, committee, group, deviation)


@pytest.mark.criterion("5", "98-agent greedy run under 60 s; blocking confirmed")
def test_criterion_5_seq_core_counterexample():
    e = prop_seq_core()
    committee = seq_core_proof_committee(e)
    group, deviation = seq_core_blocking(e, committee)
    h = happiness(e, committee)
    assert [h[a] for a in group] == [3, 3, 1, 1]
    assert verify_blocking(e, committee, group, deviation)

    start = time.monotonic()
    run = seq_pav(e)
    elapsed = time.monotonic() - start
    assert run.committee.size == 98
    assert elapsed < 60.0, f"seq-PAV took {elapsed:.1f}s"


@pytest.mark.criterion("6", "oracle equivalence: winner, exact scores, round optima")
def test_criterion_6_oracle_equivalence():
    # (a) weighted approval winner equals the brute-force maximum.
    rng = random.Random(600)
    for election in random_corpus(601, 200):
        weights = [F(rng.randint(0, 8), rng.randint(1, 5)) for _ in range(election.n)]
        winner = weighted_approval_winner(election, weights)
        assert is_candidate(election, winner)
        assert approval_weight(election, weights, winner) == brute_waw_value(
            election, weights
        )

    # (b) exact optimization matches the exhaustive committee search.
    pav = WeightSequence.pav()
    for election in random_corpus(602, 100, classes=("bipartite",)):
        outcome = exact_thiele(election, pav)
        assert outcome.method == "bipartite"
        _, optimum = oracle_optimal_committee(election, pav, max_edges=40)
        assert outcome.score == optimum
    for election in random_corpus(603, 100, classes=("symmetric",)):
        outcome = exact_thiele(election, pav)
        _, optimum = oracle_optimal_committee(election, pav, max_edges=40)
        assert outcome.score == optimum

    # (c) every sequential round optimum equals the enumeration-based one.
    for election in random_corpus(604, 200):
        candidates = enumerate_candidates(election, max_edges=40)

        greedy = seq_pav(election)
        h = [0] * election.n
        for rnd in greedy.rounds:
            best = max(
                sum((pav[h[a] + 1] for a in approvers(election, c)), ZERO)
                for c in candidates
            )
            assert rnd.marginal == best
            for a in approvers(election, rnd.chosen):
                h[a] += 1

        phragmen = seq_phragmen(election)
        budgets = [ZERO] * election.n
        for rnd in phragmen.rounds:
            assert rnd.t_star == phragmen_round_optimum(election, candidates, budgets)
            budgets = [b + rnd.t_star for b in budgets]
            for a in approvers(election, rnd.chosen):
                budgets[a] = ZERO

        mes = rule_x(election)
        budgets = [F(election.k, election.n)] * election.n
        for rnd in mes.rounds:
            assert rnd.q_star == rulex_round_optimum(election, candidates, budgets)
            for a in approvers(election, rnd.chosen):
                budgets[a] -= min(budgets[a], rnd.q_star)
        if mes.purchased < election.k:
            assert rulex_round_optimum(election, candidates, budgets) is None


@pytest.mark.criterion("7", "axiom guarantees of the rules on random instances")
def test_criterion_7_rule_guarantees():
    full_size_runs = 0
    for election in random_corpus(701, 200):
        mes = rule_x(election, completion="none")
        if mes.purchased == election.k:
            full_size_runs += 1
            assert check_ejr(election, mes.committee).satisfied

        phragmen = seq_phragmen(election)
        assert check_pjr(election, phragmen.committee).satisfied

        local_search = ls_pav(election)
        assert check_core(election, local_search.committee, max_edges=40).satisfied
    assert full_size_runs >= 20

    for election in random_corpus(702, 200, classes=("symmetric",)):
        committee = seq_pav(election).committee
        assert check_ejr(election, committee).satisfied


@pytest.mark.criterion("8", "matching engine against exhaustive enumeration")
def test_criterion_8_engine_oracles():
    rng = random.Random(800)
    for _ in range(500):
        n = rng.randint(2, 10)
        p = rng.choice([0.2, 0.4, 0.6, 0.9])
        edges = [
            (u, v, F(rng.randint(0, 12), rng.randint(1, 6)))
            for u in range(n)
            for v in range(u + 1, n)
            if rng.random() < p
        ]
        graph = WeightedGraph.of(n, edges)
        value, pairs = brute_max_weight(edges)
        assert max_weight_value(graph) == value
        assert max_weight_matching(graph).pairs == pairs

    rng = random.Random(801)
    for _ in range(200):
        n = rng.randint(2, 9)
        p = rng.choice([0.25, 0.45, 0.7])
        edges = [
            (u, v)
            for u in range(n)
            for v in range(u + 1, n)
            if rng.random() < p
        ]
        graph = WeightedGraph.of(n, [(u, v, F(1)) for u, v in edges])
        # gallai_edmonds re-verifies all three structural guarantees itself.
        decomposition = gallai_edmonds(graph)
        nu = brute_matching_number(edges)
        expected = tuple(
            v
            for v in range(n)
            if brute_matching_number([x for x in edges if v not in x]) == nu
        )
        assert decomposition.inessential == expected
        for comp in decomposition.components:
            comp_set = set(comp)
            comp_edges = [x for x in edges if x[0] in comp_set and x[1] in comp_set]
            for v in comp:
                assert (
                    brute_matching_number([x for x in comp_edges if v not in x]) * 2
                    == len(comp) - 1
                )


@pytest.mark.criterion("9", "structural candidate-space observations hold corpus-wide")
def test_criterion_9_structural_observations():
    for election in random_corpus(901, 120):
        candidates = enumerate_candidates(election, max_edges=40)
        assert candidates
        sizes = [len(approvers(election, c)) for c in candidates]
        for s in sizes:
            for t in sizes:
                assert F(s) >= F(t, 3)
        for c in candidates:
            assert is_candidate(election, c)

    for election in random_corpus(902, 80, classes=("symmetric",)):
        candidates = enumerate_candidates(election, max_edges=40)
        nu = brute_matching_number(election.approval_graph.undirected_edges)
        scores = {len(approvers(election, c)) for c in candidates}
        assert scores == {2 * nu}
        assert all(len(c.pairs) == nu for c in candidates)
