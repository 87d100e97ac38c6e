"""Physical evaluation of a plan over the base, step by step.

A fresh memo table backs each execution so the reported counters reflect
the chosen strategies honestly. Nested loop solves the next subgoal once
per incoming substitution with sideways variables bound; block nested
loop solves it once per block with only query constants bound and joins
in memory; hash join solves it once and joins both sides on the shared
variables (a cross product if there are none).
"""

from __future__ import annotations

from dataclasses import dataclass

from .costmodel import JoinMethod, JoinStrategy
from .engine import Counters, MemoTable, solve
from .model import Atom, Query, Term
from .optimizer import Plan


@dataclass
class StepCounters:
    inferred_facts: int
    eob_accesses: int

    @property
    def actual_cost(self) -> int:
        return self.inferred_facts + self.eob_accesses


@dataclass
class ExecutionReport:
    answers: list[Atom]
    inferred_fact_count: int
    eob_access_count: int
    per_step: list[StepCounters]

    @property
    def actual_cost(self) -> int:
        return self.inferred_fact_count + self.eob_access_count


def _bind_atom(atom: Atom, subst: dict[str, str]) -> Atom:
    args = tuple(
        Term.const(subst[t.value]) if t.is_var and t.value in subst else t
        for t in atom.args
    )
    return Atom(atom.predicate, args)


def _extensions(atom: Atom, answer: Atom) -> dict[str, str] | None:
    """Bindings a ground answer induces on an atom's variables."""
    ext: dict[str, str] = {}
    for t, g in zip(atom.args, answer.args):
        if t.is_var:
            prev = ext.setdefault(t.value, g.value)
            if prev != g.value:
                return None
        elif t.value != g.value:
            return None
    return ext


def _dedupe(substs):
    seen = set()
    out = []
    for s in substs:
        key = tuple(sorted(s.items()))
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out


def _merge_join(batch, atom, answers, shared):
    """In-memory equi-join of a substitution batch with solved answers."""
    out = []
    if not shared:
        for s in batch:
            for ans in answers:
                ext = _extensions(atom, ans)
                if ext is not None:
                    out.append({**s, **ext})
        return out
    table: dict[tuple, list[dict[str, str]]] = {}
    for ans in answers:
        ext = _extensions(atom, ans)
        if ext is None:
            continue
        table.setdefault(tuple(ext[v] for v in shared), []).append(ext)
    for s in batch:
        key = tuple(s[v] for v in shared)
        for ext in table.get(key, ()):
            out.append({**s, **ext})
    return out


def execute(base, plan: Plan) -> ExecutionReport:
    """Evaluate the plan's ordering with its per-step strategies."""
    memo = MemoTable()
    atoms = plan.atoms
    total = Counters()
    per_step: list[StepCounters] = []

    def track(result) -> None:
        total.inferred_facts += result.inferred_fact_count
        total.eob_accesses += result.eob_access_count
        per_step.append(
            StepCounters(result.inferred_fact_count, result.eob_access_count)
        )

    first = solve(base, atoms[0], memo)
    track(first)
    batch = []
    for ans in first.answers:
        ext = _extensions(atoms[0], ans)
        if ext is not None:
            batch.append(ext)
    batch = _dedupe(batch)

    for step, atom in enumerate(atoms[1:]):
        strategy = plan.strategies[step]
        bound_vars = set().union(*(set(a.variables) for a in atoms[: step + 1]))
        shared = tuple(v for v in atom.variables if v in bound_vars)
        inferred0, eob0 = total.inferred_facts, total.eob_accesses

        if not batch:
            per_step.append(StepCounters(0, 0))
            continue

        if strategy.method is JoinMethod.NESTED_LOOP:
            out = []
            for s in batch:
                result = solve(base, _bind_atom(atom, s), memo)
                total.inferred_facts += result.inferred_fact_count
                total.eob_accesses += result.eob_access_count
                for ans in result.answers:
                    ext = _extensions(_bind_atom(atom, s), ans)
                    if ext is not None:
                        out.append({**s, **ext})
            batch = _dedupe(out)
        elif strategy.method is JoinMethod.BLOCK_NESTED_LOOP:
            out = []
            size = strategy.block_size
            for start in range(0, len(batch), size):
                block = batch[start : start + size]
                result = solve(base, atom, memo)
                total.inferred_facts += result.inferred_fact_count
                total.eob_accesses += result.eob_access_count
                out.extend(_merge_join(block, atom, result.answers, shared))
            batch = _dedupe(out)
        else:  # hash join
            result = solve(base, atom, memo)
            total.inferred_facts += result.inferred_fact_count
            total.eob_accesses += result.eob_access_count
            batch = _dedupe(_merge_join(batch, atom, result.answers, shared))

        per_step.append(
            StepCounters(
                total.inferred_facts - inferred0, total.eob_accesses - eob0
            )
        )

    head = plan.query.head
    answers = {}
    for s in batch:
        ground = _bind_atom(head, s)
        answers.setdefault(str(ground), ground)
    ordered = [answers[k] for k in sorted(answers)]
    return ExecutionReport(
        ordered, total.inferred_facts, total.eob_accesses, per_step
    )


def uniform_plan(
    query: Query,
    strategy: JoinStrategy,
    order: tuple[int, ...] | None = None,
) -> Plan:
    """A plan using one strategy at every step, without estimates."""
    from .costmodel import Estimate

    if order is None:
        order = tuple(range(len(query.body)))
    return Plan(
        query,
        tuple(order),
        (strategy,) * (len(order) - 1),
        Estimate(0.0, 0.0),
    )


def execute_all_strategies(
    base,
    query: Query,
    order: tuple[int, ...] | None = None,
    block_size: int = 32,
) -> dict[JoinMethod, ExecutionReport]:
    """One report per strategy over the same ordering; answers must agree."""
    out = {}
    for method in JoinMethod:
        plan = uniform_plan(query, JoinStrategy(method, block_size), order)
        out[method] = execute(base, plan)
    return out
