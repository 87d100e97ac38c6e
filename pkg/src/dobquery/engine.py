"""Top-down rule evaluation with call-pattern tabling.

Every intensional call is canonicalized into a call pattern (constants
plus positional placeholders for free arguments) and answered from a
per-pattern table. Recursive patterns are evaluated to a fixpoint:
a call whose rules consumed another active (incomplete) table stays
active itself, and the outermost active call re-expands the whole
active group until no table grows, then marks the group completed.
This terminates on cyclic subclass/import graphs and never returns an
incomplete answer set.

Two work counters are carried through evaluation:
  * inferred facts  - one per distinct answer added to a table; a memo
    hit contributes nothing,
  * EOB accesses    - one per extensional fact returned by a match.
Their sum is the actual evaluation cost used by the experiments.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

from .model import Atom, DobError, PredicateKind, SchemaError, schema_for
from .store import OntologyBase

sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))

DEFAULT_MAX_TABLE_ENTRIES = 1_000_000

# Internal argument encoding: int = interned constant id, str = variable.
# Canonical call patterns use reserved '?<n>' variables, numbered by first
# occurrence, so alpha-equivalent calls share one table.


class EngineLimitError(DobError):
    """The tabling store exceeded its configured entry cap."""


@dataclass
class Counters:
    inferred_facts: int = 0
    eob_accesses: int = 0

    @property
    def actual_cost(self) -> int:
        return self.inferred_facts + self.eob_accesses


@dataclass
class EvaluationResult:
    answers: list[Atom]
    inferred_fact_count: int
    eob_access_count: int

    @property
    def actual_cost(self) -> int:
        return self.inferred_fact_count + self.eob_access_count


@dataclass
class _CompiledRule:
    head_vars: tuple[str, ...]
    body: tuple[tuple[str, tuple[int | str, ...], bool], ...]  # (pred, args, is_eob)


class MemoTable:
    """Answer tables keyed by canonical call pattern, tied to one base."""

    def __init__(self, max_entries: int = DEFAULT_MAX_TABLE_ENTRIES):
        self.max_entries = max_entries
        self.tables: dict[tuple, dict[tuple[int, ...], None]] = {}
        self.completed: set[tuple] = set()
        self._active: dict[tuple, None] = {}
        self._dep_stack: list[set[tuple]] = []
        self._revision = 0
        self._entries = 0
        self._base: OntologyBase | None = None
        self._rules: dict[str, list[_CompiledRule]] = {}
        self._unseen: dict[str, int] = {}

    def bind(self, base: OntologyBase):
        if self._base is None:
            self._base = base
            self._compile(base)
        elif self._base is not base:
            raise SchemaError("a MemoTable cannot be shared across bases")

    def _compile(self, base: OntologyBase):
        for rule in base.iob_program:
            head_vars = []
            for t in rule.head.args:
                if not t.is_var or t.value in head_vars:
                    raise SchemaError(
                        f"rule head must use distinct variables: {rule.head}"
                    )
                head_vars.append(t.value)
            body = []
            for atom in rule.body:
                schema = schema_for(atom.predicate, len(atom.args))
                args: list[int | str] = [
                    t.value if t.is_var else self.intern_const(t.value)
                    for t in atom.args
                ]
                body.append(
                    (atom.predicate, tuple(args), schema.kind is PredicateKind.EOB)
                )
            self._rules.setdefault(rule.head.predicate, []).append(
                _CompiledRule(tuple(head_vars), tuple(body))
            )

    def intern_const(self, text: str) -> int:
        """Id of a constant without mutating the shared symbol table.

        Constants never seen by the base get a memo-local negative id;
        they cannot match any fact or derived answer.
        """
        cid = self._base.symbols.lookup(text)
        if cid is not None:
            return cid
        local = self._unseen.get(text)
        if local is None:
            local = -(len(self._unseen) + 1)
            self._unseen[text] = local
        return local

    def _note_dependency(self, key: tuple):
        if self._dep_stack:
            self._dep_stack[-1].add(key)

    def _record(self, key: tuple, answer: tuple[int, ...], counters: Counters) -> bool:
        table = self.tables[key]
        if answer in table:
            return False
        table[answer] = None
        self._entries += 1
        if self._entries > self.max_entries:
            raise EngineLimitError(
                f"tabling store exceeded {self.max_entries} entries"
            )
        self._revision += 1
        counters.inferred_facts += 1
        return True


def _match_template(base, memo, counters, pred, args):
    """Ground rows matching a partially instantiated template.

    `args` holds constant ids and free variable names; the returned list
    pairs each matching row with the variable bindings it induces.
    """
    pattern = tuple(a if isinstance(a, int) else None for a in args)
    if any(isinstance(a, int) and a < 0 for a in args):
        rows: list[tuple[int, ...]] = []
    else:
        rows = base.match_rows(pred, pattern)
    out = []
    for row in rows:
        ext: dict[str, int] = {}
        ok = True
        for a, v in zip(args, row):
            if isinstance(a, str):
                prev = ext.setdefault(a, v)
                if prev != v:
                    ok = False
                    break
        if ok:
            out.append((row, ext))
    counters.eob_accesses += len(out)
    return out


def _unify_answers(answers, args):
    """Bindings induced by table answers against a call-site template."""
    out = []
    for row in answers:
        ext: dict[str, int] = {}
        ok = True
        for a, v in zip(args, row):
            if isinstance(a, str):
                prev = ext.setdefault(a, v)
                if prev != v:
                    ok = False
                    break
            elif a != v:
                ok = False
                break
        if ok:
            out.append(ext)
    return out


def _canonical_call(pred, args):
    """Rewrite a template into its canonical call pattern."""
    mapping: dict[str, str] = {}
    canon: list[int | str] = []
    for a in args:
        if isinstance(a, int):
            canon.append(a)
        else:
            canon.append(mapping.setdefault(a, f"?{len(mapping)}"))
    return (pred, tuple(canon)), mapping


def _eval_body(base, memo, counters, body, init_subst):
    """Left-to-right sideways-passing evaluation of a rule body."""
    substs = [init_subst]
    for pred, args, eob in body:
        if not substs:
            break
        out = []
        for s in substs:
            inst = tuple(
                s.get(a, a) if isinstance(a, str) else a for a in args
            )
            if eob:
                for _row, ext in _match_template(base, memo, counters, pred, inst):
                    out.append({**s, **ext})
            else:
                key, mapping = _canonical_call(pred, inst)
                answers = _solve_call(base, memo, counters, key)
                template = tuple(
                    mapping.get(a, a) if isinstance(a, str) else a for a in inst
                )
                for ext in _unify_answers(answers, template):
                    merged = dict(s)
                    for var, ph in mapping.items():
                        merged[var] = ext[ph]
                    out.append(merged)
        substs = out
    return substs


def _expand(base, memo, counters, key):
    """Run every rule of a call pattern once, adding new answers.

    The call's arguments are substituted into the rule body up front, so
    body evaluation only ever binds variables to constants (a variable
    bound earlier in the body is a constant by the time it is read again).
    """
    pred, cargs = key
    for rule in memo._rules.get(pred, []):
        head_map = dict(zip(rule.head_vars, cargs))
        body = tuple(
            (
                b_pred,
                tuple(
                    head_map.get(a, a) if isinstance(a, str) else a
                    for a in b_args
                ),
                b_eob,
            )
            for b_pred, b_args, b_eob in rule.body
        )
        for subst in _eval_body(base, memo, counters, body, {}):
            answer = tuple(
                subst[a] if isinstance(a, str) else a for a in cargs
            )
            memo._record(key, answer, counters)


def _solve_call(base, memo, counters, key):
    """Answers of a canonical call pattern as a snapshot list."""
    if key in memo.completed:
        return list(memo.tables[key])
    if key in memo._active:
        memo._note_dependency(key)
        return list(memo.tables[key])

    memo.tables[key] = {}
    memo._active[key] = None
    deps: set[tuple] = set()
    memo._dep_stack.append(deps)
    try:
        while True:
            rev = memo._revision
            _expand(base, memo, counters, key)
            if memo._revision == rev:
                break
    finally:
        memo._dep_stack.pop()

    deps.discard(key)
    deps -= memo.completed
    if not deps:
        memo.completed.add(key)
        del memo._active[key]
    elif next(iter(memo._active)) == key:
        # Outermost call of a recursive group: saturate the whole group,
        # re-running members whose inputs grew after they stabilized.
        while True:
            rev = memo._revision
            for other in list(memo._active):
                memo._dep_stack.append(set())
                try:
                    _expand(base, memo, counters, other)
                finally:
                    memo._dep_stack.pop()
            if memo._revision == rev:
                break
        for other in memo._active:
            memo.completed.add(other)
        memo._active.clear()
    else:
        memo._note_dependency(key)
    return list(memo.tables[key])


def _atom_template(memo, atom: Atom):
    return tuple(
        t.value if t.is_var else memo.intern_const(t.value) for t in atom.args
    )


def solve(
    base: OntologyBase, atom: Atom, memo: MemoTable | None = None
) -> EvaluationResult:
    """All valid instantiations of `atom` in the minimal model of the base.

    The memo may be shared across calls against the same base; repeated
    calls answered from completed tables add no inferred facts.
    """
    schema = schema_for(atom.predicate, len(atom.args))
    if memo is None:
        memo = MemoTable()
    memo.bind(base)
    counters = Counters()
    template = _atom_template(memo, atom)

    if schema.kind is PredicateKind.EOB:
        matches = _match_template(
            base, memo, counters, atom.predicate, template
        )
        rows = [row for row, _ext in matches]
    else:
        key, _mapping = _canonical_call(atom.predicate, template)
        # Constants and repeated variables are part of the call pattern, so
        # every table answer instantiates the original atom.
        rows = _solve_call(base, memo, counters, key)

    rows = sorted(set(rows))
    answers_out = [base.to_atom(atom.predicate, row) for row in rows]
    return EvaluationResult(
        answers_out, counters.inferred_facts, counters.eob_accesses
    )


def solve_sequence(
    base: OntologyBase,
    atoms,
    input_bindings=None,
    memo: MemoTable | None = None,
):
    """Evaluate a conjunction left to right under nested-loop semantics.

    Returns the complete substitutions (variable name -> constant text)
    and the accumulated counters.
    """
    atoms = list(atoms)
    if not atoms:
        raise SchemaError("solve_sequence requires at least one atom")
    if memo is None:
        memo = MemoTable()
    memo.bind(base)
    counters = Counters()

    substs = [dict(b) for b in (input_bindings if input_bindings is not None else [{}])]
    internal = []
    for s in substs:
        internal.append({v: memo.intern_const(c) for v, c in s.items()})

    body = []
    for atom in atoms:
        schema = schema_for(atom.predicate, len(atom.args))
        body.append(
            (
                atom.predicate,
                _atom_template(memo, atom),
                schema.kind is PredicateKind.EOB,
            )
        )

    results: dict[tuple, dict[str, int]] = {}
    for s in internal:
        for full in _eval_body(base, memo, counters, body, s):
            key = tuple(sorted(full.items()))
            results.setdefault(key, full)

    out = []
    for full in results.values():
        out.append({v: base.symbols.text(c) for v, c in full.items()})
    return out, counters


def bottom_up_oracle(base: OntologyBase) -> set[Atom]:
    """Naive fixpoint of the IOB program over the EOB facts (test oracle)."""
    derived: dict[str, set[tuple[int, ...]]] = {}
    compiled = []
    for rule in base.iob_program:
        head_args = tuple(
            t.value if t.is_var else base.symbols.intern(t.value)
            for t in rule.head.args
        )
        body = []
        for atom in rule.body:
            schema = schema_for(atom.predicate, len(atom.args))
            args = tuple(
                t.value if t.is_var else base.symbols.intern(t.value)
                for t in atom.args
            )
            body.append((atom.predicate, args, schema.kind is PredicateKind.EOB))
        compiled.append((rule.head.predicate, head_args, body))

    def match(pred, inst, eob):
        rows = base.rows(pred) if eob else derived.get(pred, ())
        for row in rows:
            ext = {}
            ok = True
            for a, v in zip(inst, row):
                if isinstance(a, str):
                    prev = ext.setdefault(a, v)
                    if prev != v:
                        ok = False
                        break
                elif a != v:
                    ok = False
                    break
            if ok:
                yield ext

    changed = True
    while changed:
        changed = False
        for head_pred, head_args, body in compiled:
            substs = [{}]
            for pred, args, eob in body:
                if not substs:
                    break
                nxt = []
                for s in substs:
                    inst = tuple(
                        s.get(a, a) if isinstance(a, str) else a for a in args
                    )
                    for ext in match(pred, inst, eob):
                        nxt.append({**s, **ext})
                substs = nxt
            bucket = derived.setdefault(head_pred, set())
            for s in substs:
                fact = tuple(
                    s[a] if isinstance(a, str) else a for a in head_args
                )
                if fact not in bucket:
                    bucket.add(fact)
                    changed = True

    out = set()
    for pred, rows in derived.items():
        for row in rows:
            out.add(base.to_atom(pred, row))
    return out
