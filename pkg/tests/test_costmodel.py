import pytest

from dobquery import (
    Estimate,
    JoinMethod,
    JoinStrategy,
    SamplingConfig,
    join_estimate,
    parse_atom,
    parse_query,
    plan_estimate,
    predicate_estimate,
    reduction_factor,
)
from dobquery.costmodel import (
    block_nested_loop_cost,
    hash_join_cost,
    join_cardinality,
    nested_loop_cost,
)
from dobquery.stats import (
    BindingPattern,
    EobStats,
    IobStats,
    StatisticsCatalog,
    all_patterns,
)


def _manual_catalog():
    """Hand-built numbers for formula-level assertions."""
    entries = {
        "isClass": EobStats(100, (4, 10)),
        "isDProperty": EobStats(3, (3, 2)),
    }
    cards = {p: 60.0 for p in all_patterns(2)}
    costs = {p: 9.0 for p in all_patterns(2)}
    entries["areClasses"] = IobStats(2, (40, 5), (12.0, 5.0), cards, costs)
    return StatisticsCatalog(entries, SamplingConfig())


def test_join_cost_formulas():
    assert nested_loop_cost(3.0, 4.0, 2.0) == 11.0
    assert block_nested_loop_cost(3.0, 10.0, 5.0, 4) == 18.0
    assert hash_join_cost(5.0, 7.0) == 12.0
    assert join_cardinality(12.0, 1.0, 0.25) == 3.0


def test_block_size_validation():
    with pytest.raises(ValueError):
        JoinStrategy(JoinMethod.BLOCK_NESTED_LOOP, 0)


def test_predicate_estimate_eob_free_with_constant(cars_exact_catalog):
    est = predicate_estimate(cars_exact_catalog, parse_atom("isDProperty(traction,C)"))
    assert est.cardinality == pytest.approx(1.0)  # 3 / nKeys(arg1)=3
    assert est.cost == pytest.approx(1.0)


def test_predicate_estimate_eob_all_bound_below_one(cars_exact_catalog):
    est = predicate_estimate(
        cars_exact_catalog, parse_atom("isDProperty(traction,vehicle)")
    )
    assert est.cardinality == pytest.approx(3 / (3 * 2))
    assert est.cardinality <= 1.0


def test_predicate_estimate_iob_free(cars_exact_catalog):
    est = predicate_estimate(cars_exact_catalog, parse_atom("areClasses(C,O)"))
    assert est.cardinality == pytest.approx(12.0)


def test_predicate_estimate_bound_var_uses_bound_pattern(cars_exact_catalog):
    free = predicate_estimate(cars_exact_catalog, parse_atom("areClasses(C,O)"))
    bound = predicate_estimate(
        cars_exact_catalog, parse_atom("areClasses(C,O)"), {"C"}
    )
    assert bound.cardinality < free.cardinality


def test_reduction_factor_no_shared_vars():
    catalog = _manual_catalog()
    rf = reduction_factor(
        catalog, [parse_atom("isClass(A,B)")], parse_atom("areClasses(C,D)")
    )
    assert rf == 1.0


def test_reduction_factor_shared_var():
    catalog = _manual_catalog()
    # C: 4 distinct on the left (isClass arg 1), 12.0 on the right
    rf = reduction_factor(
        catalog, [parse_atom("isClass(C,B)")], parse_atom("areClasses(C,D)")
    )
    assert rf == pytest.approx(1 / 12.0)


def test_reduction_factor_two_shared_vars():
    catalog = _manual_catalog()
    rf = reduction_factor(
        catalog, [parse_atom("isClass(C,O)")], parse_atom("areClasses(C,O)")
    )
    assert rf == pytest.approx((1 / 12.0) * (1 / 10.0))


def test_join_estimate_cardinality_strategy_invariant():
    catalog = _manual_catalog()
    left = Estimate(cost=5.0, cardinality=7.0)
    cards = set()
    for strategy in (
        JoinStrategy(JoinMethod.NESTED_LOOP),
        JoinStrategy(JoinMethod.BLOCK_NESTED_LOOP, 4),
        JoinStrategy(JoinMethod.HASH_JOIN),
    ):
        est = join_estimate(
            catalog, left, [parse_atom("isClass(C,O)")],
            parse_atom("areClasses(C,X)"), strategy,
        )
        cards.add(round(est.cardinality, 9))
    assert len(cards) == 1


def test_nested_loop_degenerates_with_empty_left():
    catalog = _manual_catalog()
    left = Estimate(cost=5.0, cardinality=0.0)
    est = join_estimate(
        catalog, left, [parse_atom("isClass(C,O)")],
        parse_atom("areClasses(C,X)"), JoinStrategy(JoinMethod.NESTED_LOOP),
    )
    assert est.cost == 5.0


def test_nested_loop_monotone_in_instantiated_cost():
    catalog = _manual_catalog()
    low = dict(catalog.entries)
    stats = catalog.entries["areClasses"]
    cheap = IobStats(
        2, stats.domain_sizes, stats.distinct_values,
        dict(stats.cardinality), {p: 1.0 for p in all_patterns(2)},
    )
    low["areClasses"] = cheap
    cheaper = StatisticsCatalog(low, SamplingConfig())
    left = Estimate(cost=5.0, cardinality=7.0)
    args = ([parse_atom("isClass(C,O)")], parse_atom("areClasses(C,X)"),
            JoinStrategy(JoinMethod.NESTED_LOOP))
    assert (
        join_estimate(cheaper, left, *args).cost
        <= join_estimate(catalog, left, *args).cost
    )


def test_plan_estimate_single_atom(cars_exact_catalog):
    atom = parse_atom("areClasses(C,O)")
    assert plan_estimate(cars_exact_catalog, [atom], []) == predicate_estimate(
        cars_exact_catalog, atom
    )


def test_plan_estimate_orders_cars_query(cars_exact_catalog):
    nlj = JoinStrategy(JoinMethod.NESTED_LOOP)
    q = parse_query("q(O):-areClasses(C,O),isDProperty(traction,C).")
    q_prime = parse_query("q(O):-isDProperty(traction,C),areClasses(C,O).")
    cost_q = plan_estimate(cars_exact_catalog, q.body, [nlj]).cost
    cost_q_prime = plan_estimate(cars_exact_catalog, q_prime.body, [nlj]).cost
    assert cost_q_prime < cost_q


def test_plan_estimate_invariant_under_renaming(cars_exact_catalog):
    nlj = JoinStrategy(JoinMethod.NESTED_LOOP)
    a = [parse_atom("isDProperty(traction,C)"), parse_atom("areClasses(C,O)")]
    b = [parse_atom("isDProperty(traction,Z9)"), parse_atom("areClasses(Z9,W)")]
    assert plan_estimate(cars_exact_catalog, a, [nlj]) == plan_estimate(
        cars_exact_catalog, b, [nlj]
    )


def test_estimates_finite_and_nonnegative(cars_exact_catalog):
    from dobquery import default_strategies

    q = parse_query(
        "q(C,O,I):-areClasses(C,O),areIndividuals(I,C),subClassOf(C,C2)."
    )
    for strategy in default_strategies():
        est = plan_estimate(
            cars_exact_catalog, q.body, [strategy, strategy]
        )
        assert est.cost >= 0 and est.cardinality >= 0
        assert est.cost < float("inf")
