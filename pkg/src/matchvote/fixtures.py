"""Named benchmark instances and their documented runs.

Each fixture is constructed in code and exported through the CLI, so the
JSON files users see always match the constructions the tests exercise.
The companion helpers rebuild the specific committees, selection sequences
and blocking deviations that make these instances interesting.
"""
from __future__ import annotations

from fractions import Fraction

from .errors import ElectionError
from .model import Committee, Matching, MatchingElection, happiness

FIXTURE_NAMES = (
    "fig1",
    "footnote4",
    "prop-seq-core",
    "prop-rulex-core",
    "prop-phragmen-ejr",
)


def _election(names, approval_pairs, k) -> MatchingElection:
    index = {name: i for i, name in enumerate(names)}
    approvals: list[set[int]] = [set() for _ in names]
    for a, b in approval_pairs:
        approvals[index[a]].add(index[b])
    return MatchingElection(
        tuple(names), tuple(frozenset(s) for s in approvals), k
    )


def _mutual(pairs):
    out = []
    for a, b in pairs:
        out.append((a, b))
        out.append((b, a))
    return out


def fig1() -> MatchingElection:
    """Six-agent chain with one mutual pair and four one-sided approvals;
    exactly three candidates, k = 3."""
    names = ["a1", "a2", "a3", "a4", "a5", "a6"]
    approvals = [
        ("a1", "a2"),
        ("a2", "a3"),
        ("a3", "a4"),
        ("a4", "a3"),
        ("a5", "a3"),
        ("a6", "a4"),
    ]
    return _election(names, approvals, 3)


def fig1_candidates(election: MatchingElection) -> tuple[Matching, Matching, Matching]:
    """The three candidates c1, c2, c3 of the fig1 instance."""
    i = election.index_of
    c1 = Matching.of([(i["a1"], i["a2"]), (i["a3"], i["a4"])])
    c2 = Matching.of([(i["a1"], i["a2"]), (i["a3"], i["a5"]), (i["a4"], i["a6"])])
    c3 = Matching.of([(i["a2"], i["a3"]), (i["a4"], i["a6"])])
    return c1, c2, c3


def footnote4() -> MatchingElection:
    """Restriction of fig1 to its first four agents: two candidates, one
    approved by three agents and one by a single agent; k = 4."""
    names = ["a1", "a2", "a3", "a4"]
    approvals = [("a1", "a2"), ("a2", "a3"), ("a3", "a4"), ("a4", "a3")]
    return _election(names, approvals, 4)


def footnote4_candidates(election: MatchingElection) -> tuple[Matching, Matching]:
    i = election.index_of
    c = Matching.of([(i["a1"], i["a2"]), (i["a3"], i["a4"])])
    c_prime = Matching.of([(i["a2"], i["a3"])])
    return c, c_prime


def prop_phragmen_ejr() -> MatchingElection:
    """Three mutually approving agents, k = 6: an alternating tie-breaking
    run of seq-Phragmén starves the two outer agents below their EJR share."""
    names = ["a1", "a2", "a3"]
    approvals = _mutual([("a1", "a2"), ("a1", "a3"), ("a2", "a3")])
    return _election(names, approvals, 6)


def phragmen_alternating_sequence(election: MatchingElection) -> list[Matching]:
    """The adversarial-tie run: {a1,a2} and {a2,a3} alternating, six rounds."""
    i = election.index_of
    ab = Matching.of([(i["a1"], i["a2"])])
    bc = Matching.of([(i["a2"], i["a3"])])
    return [ab, bc, ab, bc, ab, bc]


def prop_rulex_core() -> MatchingElection:
    """Thirteen agents, k = 13: four hubs with private leaf groups of sizes
    3+1, 2, 2, 2; a documented run of the method of equal shares leaves a
    blocked committee."""
    names = ["w", "x", "y", "z", "a1", "a2", "a3", "b1", "b2", "c1", "c2", "d1", "d2"]
    approvals = _mutual(
        [
            ("w", "a1"),
            ("w", "a2"),
            ("w", "a3"),
            ("w", "b1"),
            ("x", "b1"),
            ("x", "b2"),
            ("y", "c1"),
            ("y", "c2"),
            ("z", "d1"),
            ("z", "d2"),
        ]
    )
    return _election(names, approvals, 13)


def rulex_proof_run(
    election: MatchingElection,
) -> tuple[list[Matching], list[Fraction], tuple[int, ...], Committee]:
    """The documented purchase sequence, its prices, and the blocking pair.

    Returns (sequence of 13 purchases, expected per-round prices, blocking
    group, deviating committee of size 4).
    """
    i = election.index_of

    def m(*pairs):
        return Matching.of([(i[a], i[b]) for a, b in pairs])

    m1 = m(("w", "b1"), ("x", "b2"), ("y", "c1"), ("z", "d1"))
    m2 = m(("w", "a1"), ("x", "b2"), ("y", "c2"), ("z", "d2"))
    m3 = m(("w", "a2"), ("x", "b2"), ("y", "c1"), ("z", "d1"))
    m4 = m(("w", "a3"), ("x", "b2"), ("y", "c1"), ("z", "d1"))
    sequence = [m1] * 8 + [m2] * 3 + [m3, m4]
    prices = (
        [Fraction(1, 8)] * 8 + [Fraction(1, 3)] * 3 + [Fraction(1), Fraction(1)]
    )
    group = (i["a2"], i["a3"], i["c2"], i["d2"])
    dev_a2 = m(("w", "a2"), ("x", "b1"), ("y", "c2"), ("z", "d2"))
    dev_a3 = m(("w", "a3"), ("x", "b1"), ("y", "c2"), ("z", "d2"))
    deviation = Committee.from_counts({dev_a2: 2, dev_a3: 2})
    return sequence, prices, group, deviation


SEQ_CORE_GROUP_A = 27
SEQ_CORE_GROUP_B = 27
SEQ_CORE_GROUP_C = 41


def prop_seq_core() -> MatchingElection:
    """Ninety-eight agents, k = 98: three hubs x, y, z over leaf groups of
    27, 27 and 41 agents (z approves every leaf); greedy Thiele runs can
    starve one leaf of each group below its proportional share."""
    names = ["x", "y", "z"]
    names += [f"A{i + 1}" for i in range(SEQ_CORE_GROUP_A)]
    names += [f"B{i + 1}" for i in range(SEQ_CORE_GROUP_B)]
    names += [f"C{i + 1}" for i in range(SEQ_CORE_GROUP_C)]
    pairs = []
    for i in range(SEQ_CORE_GROUP_A):
        pairs.append(("x", f"A{i + 1}"))
        pairs.append(("z", f"A{i + 1}"))
    for i in range(SEQ_CORE_GROUP_B):
        pairs.append(("y", f"B{i + 1}"))
        pairs.append(("z", f"B{i + 1}"))
    for i in range(SEQ_CORE_GROUP_C):
        pairs.append(("z", f"C{i + 1}"))
    return _election(names, _mutual(pairs), 98)


def seq_core_proof_committee(election: MatchingElection) -> Committee:
    """The documented greedy-valid committee of 98 matchings.

    Rounds 1-9 match x and z to distinct A-leaves and y to B-leaves; rounds
    10-18 match y and z to the remaining B-leaves and x to the remaining
    A-leaves (every A and B leaf is now matched exactly once); the final 80
    rounds match x into A, y into B and z into C, always picking the
    least-happy leaf (smallest index on ties).
    """
    i = election.index_of
    x, y, z = i["x"], i["y"], i["z"]
    a_ids = [i[f"A{j + 1}"] for j in range(SEQ_CORE_GROUP_A)]
    b_ids = [i[f"B{j + 1}"] for j in range(SEQ_CORE_GROUP_B)]
    c_ids = [i[f"C{j + 1}"] for j in range(SEQ_CORE_GROUP_C)]
    sequence: list[Matching] = []
    for r in range(9):
        sequence.append(Matching.of([(x, a_ids[r]), (z, a_ids[9 + r]), (y, b_ids[r])]))
    for r in range(9):
        sequence.append(
            Matching.of([(y, b_ids[9 + r]), (z, b_ids[18 + r]), (x, a_ids[18 + r])])
        )
    h = {agent: 0 for agent in a_ids + b_ids + c_ids}
    for m in sequence:
        for a, b in m.pairs:
            for agent in (a, b):
                if agent in h:
                    h[agent] += 1
    for _ in range(80):
        pick_a = min(a_ids, key=lambda a: (h[a], a))
        pick_b = min(b_ids, key=lambda a: (h[a], a))
        pick_c = min(c_ids, key=lambda a: (h[a], a))
        sequence.append(Matching.of([(x, pick_a), (y, pick_b), (z, pick_c)]))
        for agent in (pick_a, pick_b, pick_c):
            h[agent] += 1
    return Committee.from_sequence(sequence)


def seq_core_blocking(
    election: MatchingElection, committee: Committee
) -> tuple[tuple[int, ...], Committee]:
    """The blocking group (one A-leaf and one B-leaf with happiness 3, two
    C-leaves with happiness 1) and its four-matching deviation."""
    i = election.index_of
    h = happiness(election, committee)
    a_ids = [i[f"A{j + 1}"] for j in range(SEQ_CORE_GROUP_A)]
    b_ids = [i[f"B{j + 1}"] for j in range(SEQ_CORE_GROUP_B)]
    c_ids = [i[f"C{j + 1}"] for j in range(SEQ_CORE_GROUP_C)]
    try:
        a = next(v for v in a_ids if h[v] == 3)
        b = next(v for v in b_ids if h[v] == 3)
        c1, c2 = [v for v in c_ids if h[v] == 1][:2]
    except (StopIteration, ValueError) as exc:
        raise ElectionError("committee does not have the documented happiness profile") from exc
    x, y, z = i["x"], i["y"], i["z"]
    dev1 = Matching.of([(x, a), (y, b), (z, c1)])
    dev2 = Matching.of([(x, a), (y, b), (z, c2)])
    return (a, b, c1, c2), Committee.from_counts({dev1: 2, dev2: 2})


_BUILDERS = {
    "fig1": fig1,
    "footnote4": footnote4,
    "prop-seq-core": prop_seq_core,
    "prop-rulex-core": prop_rulex_core,
    "prop-phragmen-ejr": prop_phragmen_ejr,
}


def fixture(name: str) -> MatchingElection:
    if name not in _BUILDERS:
        raise ElectionError(f"unknown fixture {name!r}; known: {', '.join(FIXTURE_NAMES)}")
    return _BUILDERS[name]()
