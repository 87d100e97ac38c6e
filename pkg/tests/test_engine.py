import itertools
import random

import pytest

from dobquery import (
    EngineLimitError,
    MemoTable,
    OntologyBase,
    bottom_up_oracle,
    parse_atom,
    solve,
    solve_sequence,
)
from dobquery.model import BUILTIN_SCHEMA, IOB_PREDICATES
from conftest import random_base


def _free_atom(pred):
    arity = BUILTIN_SCHEMA[pred].arity
    return parse_atom(f"{pred}({','.join('XYZ'[i] for i in range(arity))})")


def test_solve_areclasses_cars(cars_base):
    result = solve(cars_base, parse_atom("areClasses(C,O)"))
    assert len(result.answers) == 12
    per_ontology = {}
    for a in result.answers:
        per_ontology.setdefault(a.args[1].value, []).append(a.args[0].value)
    assert {o: sorted(cs) for o, cs in per_ontology.items()} == {
        o: ["car", "dealer", "suv", "vehicle"]
        for o in ("carsOnt", "source1", "source2")
    }


def test_inferred_count_matches_oracle_subprogram(cars_base):
    # areClasses pulls in areImpOntologies; nothing else contributes.
    result = solve(cars_base, parse_atom("areClasses(C,O)"))
    oracle = bottom_up_oracle(cars_base)
    relevant = sum(
        1 for a in oracle if a.predicate in ("areClasses", "areImpOntologies")
    )
    assert result.inferred_fact_count == relevant == 14


def test_transitive_closure_of_chain():
    base = OntologyBase.from_facts(
        [parse_atom("subClassOf(a,b)"), parse_atom("subClassOf(b,c)")]
    )
    result = solve(base, parse_atom("areSubClasses(X,Y)"))
    assert {str(a) for a in result.answers} == {
        "areSubClasses(a,b)",
        "areSubClasses(b,c)",
        "areSubClasses(a,c)",
    }


def test_termination_on_cyclic_subclass_graph():
    base = OntologyBase.from_facts(
        [parse_atom("subClassOf(a,b)"), parse_atom("subClassOf(b,a)")]
    )
    result = solve(base, parse_atom("areSubClasses(X,Y)"))
    assert {str(a) for a in result.answers} == {
        "areSubClasses(a,b)",
        "areSubClasses(b,a)",
        "areSubClasses(a,a)",
        "areSubClasses(b,b)",
    }


def test_eob_atom_has_zero_inferred_count(cars_base):
    result = solve(cars_base, parse_atom("isClass(C,O)"))
    assert result.inferred_fact_count == 0
    assert result.eob_access_count == len(result.answers) == 4


def test_unknown_constant_yields_empty(cars_base):
    result = solve(cars_base, parse_atom("areClasses(C,neverSeen)"))
    assert result.answers == []


def test_memo_hit_adds_zero_inferred(cars_base):
    memo = MemoTable()
    first = solve(cars_base, parse_atom("areClasses(C,O)"), memo)
    again = solve(cars_base, parse_atom("areClasses(C,O)"), memo)
    assert first.inferred_fact_count == 14
    assert again.inferred_fact_count == 0
    assert again.eob_access_count == 0
    assert again.answers == first.answers


def test_memo_is_base_specific(cars_base):
    memo = MemoTable()
    solve(cars_base, parse_atom("areClasses(C,O)"), memo)
    other = OntologyBase()
    with pytest.raises(Exception):
        solve(other, parse_atom("areClasses(C,O)"), memo)


def test_answer_order_is_deterministic(cars_base):
    a = solve(cars_base, parse_atom("areClasses(C,O)")).answers
    b = solve(cars_base, parse_atom("areClasses(C,O)")).answers
    assert a == b


def test_solve_sequence_cars_orderings(cars_base):
    q_prime = [parse_atom("isDProperty(traction,C)"), parse_atom("areClasses(C,O)")]
    subs, counters_prime = solve_sequence(cars_base, q_prime)
    assert sorted(s["O"] for s in subs) == ["carsOnt", "source1", "source2"]
    assert all(s["C"] == "suv" for s in subs)

    q = list(reversed(q_prime))
    subs2, counters_q = solve_sequence(cars_base, q)
    assert {tuple(sorted(s.items())) for s in subs} == {
        tuple(sorted(s.items())) for s in subs2
    }
    assert counters_q.actual_cost > counters_prime.actual_cost


def test_solve_sequence_empty_relation_short_circuits(cars_base):
    subs, counters = solve_sequence(
        cars_base,
        [parse_atom("isStatement(I,P,J)"), parse_atom("areClasses(C,O)")],
    )
    assert subs == []
    assert counters.actual_cost == 0  # no statements, nothing retrieved


def test_solve_sequence_input_bindings(cars_base):
    subs, _ = solve_sequence(
        cars_base,
        [parse_atom("areClasses(C,O)")],
        input_bindings=[{"O": "source1"}],
    )
    assert sorted(s["C"] for s in subs) == ["car", "dealer", "suv", "vehicle"]
    assert all(s["O"] == "source1" for s in subs)


def test_ordering_invariance_of_answers(cars_base):
    atoms = [
        parse_atom("areClasses(C,O)"),
        parse_atom("isDProperty(P,C)"),
        parse_atom("isOntology(O)"),
    ]
    reference = None
    for perm in itertools.permutations(atoms):
        subs, _ = solve_sequence(cars_base, list(perm))
        key = {tuple(sorted(s.items())) for s in subs}
        if reference is None:
            reference = key
        assert key == reference


def test_oracle_on_empty_base():
    assert bottom_up_oracle(OntologyBase()) == set()


def test_oracle_individuals_cars(cars_base):
    oracle = bottom_up_oracle(cars_base)
    individuals = {str(a) for a in oracle if a.predicate == "areIndividuals"}
    assert individuals == {
        "areIndividuals(s123,suv)",
        "areIndividuals(s123,vehicle)",
    }


def test_table_entry_cap_enforced():
    base = OntologyBase.from_facts(
        parse_atom(f"subClassOf(c{i},c{i + 1})") for i in range(30)
    )
    memo = MemoTable(max_entries=10)
    with pytest.raises(EngineLimitError):
        solve(base, parse_atom("areSubClasses(X,Y)"), memo)


@pytest.mark.parametrize("seed", range(20))
def test_topdown_equals_oracle_free_patterns(seed):
    rng = random.Random(seed)
    base = random_base(rng)
    oracle = bottom_up_oracle(base)
    memo = MemoTable()
    for pred in IOB_PREDICATES:
        got = {str(a) for a in solve(base, _free_atom(pred), memo).answers}
        want = {str(a) for a in oracle if a.predicate == pred}
        assert got == want, f"{pred} differs on seed {seed}"


@pytest.mark.parametrize("seed", range(8))
def test_topdown_equals_oracle_bound_patterns(seed):
    rng = random.Random(1000 + seed)
    base = random_base(rng)
    oracle = bottom_up_oracle(base)
    memo = MemoTable()
    for pred in IOB_PREDICATES:
        arity = BUILTIN_SCHEMA[pred].arity
        facts = [a for a in oracle if a.predicate == pred]
        consts = sorted({t.value for a in facts for t in a.args}) or ["zz"]
        for _ in range(5):
            shape = [
                rng.choice(["VAR", rng.choice(consts)]) for _ in range(arity)
            ]
            args = ",".join(
                f"X{i}" if s == "VAR" else s for i, s in enumerate(shape)
            )
            got = {
                str(a) for a in solve(base, parse_atom(f"{pred}({args})"), memo).answers
            }
            want = {
                str(a)
                for a in facts
                if all(
                    s == "VAR" or a.args[i].value == s
                    for i, s in enumerate(shape)
                )
            }
            assert got == want


def test_counters_monotone_across_shared_memo(cars_base):
    memo = MemoTable()
    atoms = [
        parse_atom("areClasses(C,O)"),
        parse_atom("areIndividuals(I,C)"),
        parse_atom("areClasses(C,carsOnt)"),
        parse_atom("areClasses(C,O)"),
    ]
    for atom in atoms:
        result = solve(cars_base, atom, memo)
        assert result.inferred_fact_count >= 0
        assert result.eob_access_count >= 0
