"""Cost and cardinality estimation for single predicates and joins.

Extensional predicates are costed from exact statistics: the expected
number of matching facts under a binding pattern is the cardinality
divided by the nKeys product of the bound arguments, and retrieval cost
equals that expected match count. Intensional predicates are looked up
from the sampled per-pattern statistics. Conjunctions combine the
per-predicate numbers with a System-R-style reduction factor and one of
three join strategies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .model import Atom, PredicateKind, SchemaError, schema_for
from .stats import BindingPattern, EobStats, StatisticsCatalog


@dataclass(frozen=True)
class Estimate:
    cost: float
    cardinality: float


class JoinMethod(Enum):
    NESTED_LOOP = "nlj"
    BLOCK_NESTED_LOOP = "bnlj"
    HASH_JOIN = "hash"


@dataclass(frozen=True)
class JoinStrategy:
    method: JoinMethod
    block_size: int = 32

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError(f"block size must be >= 1: {self.block_size}")

    def __str__(self) -> str:
        if self.method is JoinMethod.BLOCK_NESTED_LOOP:
            return f"{self.method.value}[{self.block_size}]"
        return self.method.value


def default_strategies(block_size: int = 32) -> tuple[JoinStrategy, ...]:
    return (
        JoinStrategy(JoinMethod.NESTED_LOOP),
        JoinStrategy(JoinMethod.BLOCK_NESTED_LOOP, block_size),
        JoinStrategy(JoinMethod.HASH_JOIN),
    )


def binding_pattern(atom: Atom, bound_vars) -> BindingPattern:
    """Pattern of an atom: constants and already-bound variables are bound."""
    return BindingPattern(
        tuple(not t.is_var or t.value in bound_vars for t in atom.args)
    )


def predicate_estimate(
    catalog: StatisticsCatalog, atom: Atom, bound_vars=frozenset()
) -> Estimate:
    """Cost and cardinality of a single predicate call."""
    schema = schema_for(atom.predicate, len(atom.args))
    pattern = binding_pattern(atom, bound_vars)
    entry = catalog.entries.get(atom.predicate)
    if entry is None:
        raise SchemaError(f"catalog has no entry for {atom.predicate}")
    if schema.kind is PredicateKind.EOB:
        stats: EobStats = entry
        card = float(stats.cardinality)
        for pos in pattern.bound_positions:
            card /= max(1, stats.n_keys[pos])
        return Estimate(cost=card, cardinality=card)
    return Estimate(
        cost=entry.cost[pattern], cardinality=entry.cardinality[pattern]
    )


def _distinct_at(catalog: StatisticsCatalog, atom: Atom, pos: int) -> float:
    entry = catalog.entries[atom.predicate]
    if isinstance(entry, EobStats):
        return max(1.0, float(entry.n_keys[pos]))
    return max(1.0, entry.distinct_values[pos])


def _min_distinct(catalog, atoms, var: str) -> float:
    """Distinct-value estimate of a variable over a set of atoms: the
    tightest count among its occurrences."""
    best = None
    for atom in atoms:
        for i, t in enumerate(atom.args):
            if t.is_var and t.value == var:
                d = _distinct_at(catalog, atom, i)
                best = d if best is None else min(best, d)
    return best if best is not None else 1.0


def shared_variables(left_atoms, right_atom: Atom) -> tuple[str, ...]:
    left_vars = {v for a in left_atoms for v in a.variables}
    return tuple(v for v in right_atom.variables if v in left_vars)


def reduction_factor(
    catalog: StatisticsCatalog, left_atoms, right_atom: Atom
) -> float:
    """Product over shared variables of 1/max(distinct left, distinct right),
    under independence and uniformity; 1.0 with no shared variables."""
    rf = 1.0
    for var in shared_variables(left_atoms, right_atom):
        d_left = _min_distinct(catalog, left_atoms, var)
        d_right = _min_distinct(catalog, [right_atom], var)
        rf /= max(d_left, d_right)
    return rf


def join_cardinality(left_card: float, right_card: float, rf: float) -> float:
    return left_card * right_card * rf


def nested_loop_cost(left_cost: float, left_card: float, inst_cost: float) -> float:
    return left_cost + left_card * inst_cost


def block_nested_loop_cost(
    left_cost: float, left_card: float, right_cost: float, block_size: int
) -> float:
    return left_cost + math.ceil(left_card / block_size) * right_cost


def hash_join_cost(left_cost: float, right_cost: float) -> float:
    return left_cost + right_cost


def join_estimate(
    catalog: StatisticsCatalog,
    left_estimate: Estimate,
    left_atoms,
    right_atom: Atom,
    strategy: JoinStrategy,
) -> Estimate:
    """Estimate of extending a left-deep prefix with one more subgoal.

    Cardinality is strategy-independent: card(L) * card(R under query
    constants only) * reduction factor. Cost per strategy: nested loop
    charges the instantiated right side once per left row; block nested
    loop charges the right side once per block, unscaled; hash join
    charges each side once.
    """
    r_const = predicate_estimate(catalog, right_atom)
    rf = reduction_factor(catalog, left_atoms, right_atom)
    card = join_cardinality(left_estimate.cardinality, r_const.cardinality, rf)
    if strategy.method is JoinMethod.NESTED_LOOP:
        sideways = set(shared_variables(left_atoms, right_atom))
        r_inst = predicate_estimate(catalog, right_atom, sideways)
        cost = nested_loop_cost(
            left_estimate.cost, left_estimate.cardinality, r_inst.cost
        )
    elif strategy.method is JoinMethod.BLOCK_NESTED_LOOP:
        cost = block_nested_loop_cost(
            left_estimate.cost,
            left_estimate.cardinality,
            r_const.cost,
            strategy.block_size,
        )
    else:
        cost = hash_join_cost(left_estimate.cost, r_const.cost)
    return Estimate(cost=cost, cardinality=card)


def plan_estimate(
    catalog: StatisticsCatalog, ordered_atoms, strategies
) -> Estimate:
    """Left-deep fold of predicate and join estimates over an ordering."""
    atoms = list(ordered_atoms)
    if not atoms:
        raise SchemaError("plan_estimate requires at least one atom")
    strategies = list(strategies)
    if len(strategies) != len(atoms) - 1:
        raise SchemaError(
            f"expected {len(atoms) - 1} join strategies, got {len(strategies)}"
        )
    estimate = predicate_estimate(catalog, atoms[0])
    for i, atom in enumerate(atoms[1:]):
        estimate = join_estimate(
            catalog, estimate, atoms[: i + 1], atom, strategies[i]
        )
    return estimate
