"""Statistics catalog: exact counts for extensional predicates, adaptive
sampling estimates for intensional ones.

Extensional statistics are cardinality and per-argument distinct counts
(nKeys), computed by scan. Intensional cost and cardinality are estimated
per binding pattern with an urn-model sampling procedure: the predicate's
instantiation population is partitioned by one or more arguments, partitions
are drawn uniformly with replacement and evaluated through the engine, and
drawing stops once the accumulated metric sum z exceeds alpha * b(n), where
b(n) is the maximum metric value among the first k samples (double
sampling). The estimated mean is z / m.
"""

from __future__ import annotations

import math
import random
import statistics as _statistics
from dataclasses import dataclass, field
from datetime import datetime, timezone
from itertools import product

from . import engine
from .model import (
    ArgDomain,
    Atom,
    BUILTIN_SCHEMA,
    DobError,
    PredicateKind,
    SchemaError,
    Term,
    schema_for,
)
from .store import OntologyBase


class AnalyzerError(DobError):
    pass


@dataclass(frozen=True)
class BindingPattern:
    """Per-argument bound/free flags, written 'b'/'f' per position."""

    bound: tuple[bool, ...]

    def __str__(self) -> str:
        return "".join("b" if b else "f" for b in self.bound)

    def __len__(self) -> int:
        return len(self.bound)

    @property
    def all_free(self) -> bool:
        return not any(self.bound)

    @property
    def bound_positions(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bound) if b)

    @classmethod
    def parse(cls, text: str) -> BindingPattern:
        if any(c not in "bf" for c in text):
            raise AnalyzerError(f"bad binding pattern: {text!r}")
        return cls(tuple(c == "b" for c in text))

    @classmethod
    def free(cls, arity: int) -> BindingPattern:
        return cls((False,) * arity)


def all_patterns(arity: int) -> list[BindingPattern]:
    return [BindingPattern(p) for p in product((False, True), repeat=arity)]


@dataclass(frozen=True)
class EobStats:
    cardinality: int
    n_keys: tuple[int, ...]


@dataclass
class IobStats:
    arity: int
    domain_sizes: tuple[int, ...]
    distinct_values: tuple[float, ...]
    cardinality: dict[BindingPattern, float]
    cost: dict[BindingPattern, float]
    low_confidence: bool = field(default=False, compare=False)


@dataclass(frozen=True)
class SamplingConfig:
    d: float = 0.2
    p: float = 0.7
    k: int = 7
    m_max: int | None = None  # None: min(4n, 2000) per run
    seed: int = 0
    clt_factor: bool = False

    def validate(self):
        if self.d <= 0:
            raise AnalyzerError(f"relative error d must be positive: {self.d}")
        if not 0 <= self.p < 1:
            raise AnalyzerError(f"confidence p must lie in [0, 1): {self.p}")
        if self.k < 1:
            raise AnalyzerError(f"first-stage sample count must be >= 1: {self.k}")
        if self.clt_factor and self.p <= 0:
            raise AnalyzerError("the normal-quantile factor requires p > 0")


@dataclass
class SamplingRun:
    n: int
    m: int
    z: float
    b_of_n: float
    mean: float
    low_confidence: bool = False


def alpha(config: SamplingConfig) -> float:
    """Stopping-bound coefficient d*(d+1)/(1 - sqrt(p)).

    With the optional normal-quantile flag the 1/(1 - sqrt(p)) confidence
    factor is replaced by the (1+p)/2 standard-normal quantile.
    """
    config.validate()
    if config.clt_factor:
        factor = _statistics.NormalDist().inv_cdf((1 + config.p) / 2)
    else:
        factor = 1.0 / (1.0 - math.sqrt(config.p))
    return config.d * (config.d + 1) * factor


def compute_eob_stats(base: OntologyBase) -> dict[str, EobStats]:
    """Exact cardinality and per-argument distinct counts, by scan."""
    out: dict[str, EobStats] = {}
    for name, schema in BUILTIN_SCHEMA.items():
        if schema.kind is not PredicateKind.EOB:
            continue
        rows = base.rows(name)
        if not rows:
            out[name] = EobStats(0, (0,) * schema.arity)
            continue
        n_keys = tuple(
            len({row[i] for row in rows}) for i in range(schema.arity)
        )
        out[name] = EobStats(len(rows), n_keys)
    return out


def _domain_pool(base: OntologyBase, domain: ArgDomain) -> list[int]:
    """Constant-id pool a domain draws from; multiplicity follows the
    defining fact counts except for the value domain, which is distinct."""
    if domain is ArgDomain.CLASS:
        return [row[0] for row in base.rows("isClass")]
    if domain is ArgDomain.ONTOLOGY:
        return [row[0] for row in base.rows("isOntology")]
    if domain is ArgDomain.INDIVIDUAL:
        return [row[0] for row in base.rows("isIndividual")]
    if domain is ArgDomain.PROPERTY:
        return [row[0] for row in base.rows("isOProperty")] + [
            row[0] for row in base.rows("isDProperty")
        ]
    values: dict[int, None] = {}
    for row in base.rows("isStatement"):
        values.setdefault(row[2], None)
    return list(values)


def _domain_size_of(eob: dict[str, EobStats], domain: ArgDomain) -> int:
    if domain is ArgDomain.CLASS:
        return eob["isClass"].cardinality
    if domain is ArgDomain.ONTOLOGY:
        return eob["isOntology"].cardinality
    if domain is ArgDomain.INDIVIDUAL:
        return eob["isIndividual"].cardinality
    if domain is ArgDomain.PROPERTY:
        return eob["isOProperty"].cardinality + eob["isDProperty"].cardinality
    stats = eob["isStatement"]
    return stats.n_keys[2] if stats.cardinality else 0


def domain_size(catalog: StatisticsCatalog, predicate: str, arg_position: int) -> int:
    """Size of an argument's instantiation domain; positions are 1-based."""
    schema = schema_for(predicate)
    if not 1 <= arg_position <= schema.arity:
        raise SchemaError(
            f"{predicate} has no argument {arg_position}"
        )
    eob = {
        name: st
        for name, st in catalog.entries.items()
        if isinstance(st, EobStats)
    }
    return _domain_size_of(eob, schema.arg_domains[arg_position - 1])


def _pick_partition_arg(eob: dict[str, EobStats], predicate: str) -> int:
    """Most selective (largest-domain) argument position, 0-based."""
    schema = schema_for(predicate)
    sizes = [_domain_size_of(eob, d) for d in schema.arg_domains]
    return max(range(schema.arity), key=lambda i: (sizes[i], -i))


def _evaluate_sample(base, predicate, bound: dict[int, int], cache):
    """Cardinality and cost of one instantiated call, fresh memo per
    partition so the cost reflects a full derivation."""
    key = (predicate, tuple(sorted(bound.items())))
    hit = cache.get(key)
    if hit is not None:
        return hit
    arity = schema_for(predicate).arity
    args = []
    for i in range(arity):
        if i in bound:
            args.append(Term.const(base.symbols.text(bound[i])))
        else:
            args.append(Term.var(f"V{i}"))
    result = engine.solve(base, Atom(predicate, tuple(args)), engine.MemoTable())
    value = (float(len(result.answers)), float(result.actual_cost))
    cache[key] = value
    return value


def adaptive_sample(
    base: OntologyBase,
    predicate: str,
    pattern: BindingPattern,
    metric: str,
    config: SamplingConfig,
    *,
    partition_args: tuple[int, ...] | None = None,
    eob_stats: dict[str, EobStats] | None = None,
    sample_cache: dict | None = None,
) -> SamplingRun:
    """One urn-model sampling run for a predicate and binding pattern.

    Cardinality runs use the all-free pattern partitioned on one argument
    (most selective by default); cost runs with bound arguments partition
    on the bound arguments jointly. Positions in `partition_args` are
    0-based.
    """
    if metric not in ("cost", "cardinality"):
        raise AnalyzerError(f"unknown metric: {metric!r}")
    schema = schema_for(predicate)
    if schema.kind is not PredicateKind.IOB:
        raise AnalyzerError(f"sampling applies to IOB predicates: {predicate}")
    if len(pattern) != schema.arity:
        raise AnalyzerError(f"pattern arity mismatch for {predicate}")
    if metric == "cardinality" and not pattern.all_free:
        raise AnalyzerError("cardinality is sampled on the all-free pattern")
    config.validate()
    eob = eob_stats if eob_stats is not None else compute_eob_stats(base)
    cache = sample_cache if sample_cache is not None else {}

    if partition_args is None:
        if pattern.all_free:
            partition_args = (_pick_partition_arg(eob, predicate),)
        else:
            partition_args = pattern.bound_positions

    pools = [
        _domain_pool(base, schema.arg_domains[i]) for i in partition_args
    ]
    n = 1
    for pool in pools:
        n *= len(pool)
    if n == 0:
        return SamplingRun(n=0, m=0, z=0.0, b_of_n=0.0, mean=0.0,
                           low_confidence=True)

    rng = random.Random(f"{config.seed}|{predicate}|{pattern}|{metric}")
    m_cap = config.m_max if config.m_max is not None else min(4 * n, 2000)
    m_cap = max(m_cap, config.k)
    bound_free = [i for i in pattern.bound_positions if i not in partition_args]
    if bound_free:
        raise AnalyzerError(
            "partition arguments must cover the bound positions"
        )

    def draw():
        bound = {
            pos: pool[rng.randrange(len(pool))]
            for pos, pool in zip(partition_args, pools)
        }
        card, cost = _evaluate_sample(base, predicate, bound, cache)
        return card if metric == "cardinality" else cost

    z = 0.0
    samples = []
    for _ in range(config.k):
        v = draw()
        samples.append(v)
        z += v
    b_of_n = max(samples)
    m = len(samples)
    if b_of_n == 0.0:
        # All first-stage samples empty: the stopping rule z > alpha*b(n)
        # could never fire, so report a zero mean flagged as low confidence.
        return SamplingRun(n=n, m=m, z=z, b_of_n=0.0, mean=0.0,
                           low_confidence=True)
    bound_z = alpha(config) * b_of_n
    while z <= bound_z and m < m_cap:
        z += draw()
        m += 1
    return SamplingRun(n=n, m=m, z=z, b_of_n=b_of_n, mean=z / m)


def estimate_iob_stats(
    base: OntologyBase,
    predicate: str,
    config: SamplingConfig,
    *,
    eob_stats: dict[str, EobStats] | None = None,
    sample_cache: dict | None = None,
) -> IobStats:
    """Sampled cost for every binding pattern plus the cardinality model.

    The all-free cardinality is mean * n; instantiated-pattern cardinality
    divides by the estimated distinct values of each bound argument
    (uniformity assumption). Cost for patterns with bound arguments is the
    sampled partition mean; the all-free cost is mean * n over the most
    selective argument.
    """
    schema = schema_for(predicate)
    eob = eob_stats if eob_stats is not None else compute_eob_stats(base)
    cache = sample_cache if sample_cache is not None else {}
    arity = schema.arity
    domain_sizes = tuple(_domain_size_of(eob, d) for d in schema.arg_domains)

    free = BindingPattern.free(arity)
    card_run = adaptive_sample(
        base, predicate, free, "cardinality", config,
        eob_stats=eob, sample_cache=cache,
    )
    card_free = card_run.mean * card_run.n
    low_confidence = card_run.low_confidence

    distinct = tuple(
        min(card_free, float(size)) if size else 0.0 for size in domain_sizes
    )

    cardinality: dict[BindingPattern, float] = {}
    cost: dict[BindingPattern, float] = {}
    for pattern in all_patterns(arity):
        card = card_free
        for pos in pattern.bound_positions:
            card /= max(1.0, distinct[pos])
        cardinality[pattern] = card

        cost_run = adaptive_sample(
            base, predicate, free if pattern.all_free else pattern,
            "cost", config,
            partition_args=None if pattern.all_free else pattern.bound_positions,
            eob_stats=eob, sample_cache=cache,
        )
        low_confidence = low_confidence or cost_run.low_confidence
        if pattern.all_free:
            cost[pattern] = cost_run.mean * cost_run.n
        else:
            cost[pattern] = cost_run.mean

    return IobStats(
        arity=arity,
        domain_sizes=domain_sizes,
        distinct_values=distinct,
        cardinality=cardinality,
        cost=cost,
        low_confidence=low_confidence,
    )


@dataclass
class StatisticsCatalog:
    entries: dict[str, EobStats | IobStats]
    config: SamplingConfig
    created_at: str = field(default="", compare=False)

    def eob_stats(self, predicate: str) -> EobStats:
        st = self.entries.get(predicate)
        if not isinstance(st, EobStats):
            raise SchemaError(f"no extensional statistics for {predicate}")
        return st

    def iob_stats(self, predicate: str) -> IobStats:
        st = self.entries.get(predicate)
        if not isinstance(st, IobStats):
            raise SchemaError(f"no intensional statistics for {predicate}")
        return st


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def build_catalog(base: OntologyBase, config: SamplingConfig) -> StatisticsCatalog:
    """Exact EOB statistics plus sampled IOB statistics for all patterns."""
    config.validate()
    eob = compute_eob_stats(base)
    cache: dict = {}
    entries: dict[str, EobStats | IobStats] = dict(eob)
    for name, schema in BUILTIN_SCHEMA.items():
        if schema.kind is PredicateKind.IOB:
            entries[name] = estimate_iob_stats(
                base, name, config, eob_stats=eob, sample_cache=cache
            )
    return StatisticsCatalog(entries, config, created_at=_now())


def build_exact_catalog(
    base: OntologyBase, config: SamplingConfig | None = None
) -> StatisticsCatalog:
    """Catalog whose intensional numbers are computed exhaustively.

    Cardinalities come from the bottom-up fixpoint; per-pattern costs are
    exact partition means over the full domain pools. Used as the sampling
    oracle in tests and for reproducible plan golden cases.
    """
    config = config or SamplingConfig()
    eob = compute_eob_stats(base)
    cache: dict = {}
    model = engine.bottom_up_oracle(base)
    entries: dict[str, EobStats | IobStats] = dict(eob)
    for name, schema in BUILTIN_SCHEMA.items():
        if schema.kind is not PredicateKind.IOB:
            continue
        arity = schema.arity
        facts = [a for a in model if a.predicate == name]
        card_free = float(len(facts))
        domain_sizes = tuple(_domain_size_of(eob, d) for d in schema.arg_domains)
        distinct = tuple(
            float(len({a.args[i].value for a in facts})) for i in range(arity)
        )

        def exact_mean(partition_args: tuple[int, ...]) -> tuple[float, int]:
            pools = [
                _domain_pool(base, schema.arg_domains[i]) for i in partition_args
            ]
            n = 1
            for pool in pools:
                n *= len(pool)
            if n == 0:
                return 0.0, 0
            total = 0.0
            for combo in product(*pools):
                bound = dict(zip(partition_args, combo))
                _card, cost_v = _evaluate_sample(base, name, bound, cache)
                total += cost_v
            return total / n, n

        cardinality: dict[BindingPattern, float] = {}
        cost: dict[BindingPattern, float] = {}
        for pattern in all_patterns(arity):
            card = card_free
            for pos in pattern.bound_positions:
                card /= max(1.0, min(card_free, distinct[pos]))
            cardinality[pattern] = card
            if pattern.all_free:
                mean, n = exact_mean((_pick_partition_arg(eob, name),))
                cost[pattern] = mean * n
            else:
                mean, _n = exact_mean(pattern.bound_positions)
                cost[pattern] = mean
        entries[name] = IobStats(
            arity=arity,
            domain_sizes=domain_sizes,
            distinct_values=distinct,
            cardinality=cardinality,
            cost=cost,
        )
    return StatisticsCatalog(entries, config, created_at=_now())


# --- catalog file format ----------------------------------------------------
#   # dob catalog v1
#   # config d=<f> p=<f> k=<i> seed=<i> mmax=<i|auto> clt=<0|1>
#   # created <iso timestamp>
#   pred | kind | pattern | cardinality | cost | per-arg tail
# EOB rows carry one line (tail = nKeys); IOB rows carry one line per
# binding pattern (tail = estimated distinct values per argument).

CATALOG_HEADER = "# dob catalog v1"


def catalog_to_text(catalog: StatisticsCatalog) -> str:
    cfg = catalog.config
    mmax = "auto" if cfg.m_max is None else str(cfg.m_max)
    lines = [
        CATALOG_HEADER,
        f"# config d={cfg.d!r} p={cfg.p!r} k={cfg.k} seed={cfg.seed} "
        f"mmax={mmax} clt={int(cfg.clt_factor)}",
        f"# created {catalog.created_at or _now()}",
    ]
    for name, schema in BUILTIN_SCHEMA.items():
        st = catalog.entries.get(name)
        if st is None:
            continue
        if isinstance(st, EobStats):
            tail = " ".join(str(k) for k in st.n_keys)
            pattern = "f" * schema.arity
            lines.append(
                f"{name} | EOB | {pattern} | {st.cardinality} | "
                f"{st.cardinality} | {tail}"
            )
        else:
            tail = " ".join(repr(v) for v in st.distinct_values)
            for pattern in all_patterns(st.arity):
                lines.append(
                    f"{name} | IOB | {pattern} | "
                    f"{st.cardinality[pattern]!r} | {st.cost[pattern]!r} | {tail}"
                )
    return "\n".join(lines) + "\n"


def catalog_from_text(text: str) -> StatisticsCatalog:
    config = SamplingConfig()
    created = ""
    entries: dict[str, EobStats | IobStats] = {}
    iob_rows: dict[str, dict[BindingPattern, tuple[float, float]]] = {}
    iob_distinct: dict[str, tuple[float, ...]] = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("config "):
                fields = dict(
                    part.split("=", 1) for part in body[len("config "):].split()
                )
                config = SamplingConfig(
                    d=float(fields["d"]),
                    p=float(fields["p"]),
                    k=int(fields["k"]),
                    m_max=None if fields.get("mmax", "auto") == "auto"
                    else int(fields["mmax"]),
                    seed=int(fields["seed"]),
                    clt_factor=bool(int(fields.get("clt", "0"))),
                )
            elif body.startswith("created "):
                created = body[len("created "):]
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 6:
            raise AnalyzerError(f"catalog line {line_no}: expected 6 columns")
        name, kind, pattern_s, card_s, cost_s, tail = parts
        schema = schema_for(name)
        if kind == "EOB":
            n_keys = tuple(int(x) for x in tail.split()) if tail else ()
            if len(n_keys) != schema.arity:
                raise AnalyzerError(
                    f"catalog line {line_no}: nKeys arity mismatch for {name}"
                )
            entries[name] = EobStats(int(float(card_s)), n_keys)
        elif kind == "IOB":
            pattern = BindingPattern.parse(pattern_s)
            rows = iob_rows.setdefault(name, {})
            rows[pattern] = (float(card_s), float(cost_s))
            iob_distinct[name] = tuple(float(x) for x in tail.split())
        else:
            raise AnalyzerError(f"catalog line {line_no}: bad kind {kind!r}")

    eob = {n: st for n, st in entries.items() if isinstance(st, EobStats)}
    for name, rows in iob_rows.items():
        schema = schema_for(name)
        expected = set(all_patterns(schema.arity))
        if set(rows) != expected:
            raise AnalyzerError(f"catalog is missing patterns for {name}")
        entries[name] = IobStats(
            arity=schema.arity,
            domain_sizes=tuple(
                _domain_size_of(eob, d) for d in schema.arg_domains
            ),
            distinct_values=iob_distinct[name],
            cardinality={p: rows[p][0] for p in rows},
            cost={p: rows[p][1] for p in rows},
        )
    return StatisticsCatalog(entries, config, created_at=created)


def save_catalog(catalog: StatisticsCatalog, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(catalog_to_text(catalog))


def load_catalog(path) -> StatisticsCatalog:
    with open(path, encoding="utf-8") as fh:
        return catalog_from_text(fh.read())
