"""Branch-and-bound search over assignment ranges driven by separability tests.

A range ``[lo, hi]`` is tested by preparing the uniform superposition, applying
the range oracle and asking a detector whether query and answer registers are
entangled.  Separable sub-ranges contain no solution and are pruned;
entangled ones are halved until a single assignment remains, which is then
checked classically.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field

from .entdetect import (
    CopyEstimatorConfig,
    DetectionVerdict,
    ROUTES,
    analytic_test,
    ppt_test,
    purity_test,
    spa_test_estimated,
    spa_test_exact,
    transpose_spa,
)
from .errors import CapExceededError
from .formula import Assignment, Formula, evaluate
from .oracle import post_oracle_state
from .qsim import MAX_DENSE_DIM, RegisterLayout, density_from_state

ANALYTIC_MAX_QUBITS = 20
PURITY_MAX_QUBITS = 20

FOUND = "found"
NONE_EXIST = "none-exist"
ALL_SOLUTIONS = "all-solutions"
BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class SearchConfig:
    route: str = "analytic"
    mode: str = "minimal"
    estimator: CopyEstimatorConfig | None = None
    infer_complement: bool = True
    multi_solution: bool = False
    max_solutions: int | None = None
    max_detector_calls: int | None = None

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ValueError(f"unknown route {self.route!r}; expected one of {ROUTES}")
        if (self.estimator is not None) != (self.route == "spa-estimated"):
            raise ValueError("an estimator config is required for, and only for, route 'spa-estimated'")
        if self.mode not in ("minimal", "dxd"):
            raise ValueError(f"unknown register mode {self.mode!r}")


@dataclass(frozen=True)
class TraceEvent:
    depth: int
    lo: int
    hi: int
    verdict: str
    route: str
    copies: int = 0
    inferred: bool = False


@dataclass
class SearchTrace:
    events: list = field(default_factory=list)
    oracle_queries: int = 0
    detector_calls: int = 0
    classical_evaluations: int = 0
    pruned_mass: int = 0
    depth: int = 0
    levels: list = field(default_factory=list)   # (depth, surviving width, pruned mass)

    def to_dict(self) -> dict:
        return {
            "oracle_queries": self.oracle_queries,
            "detector_calls": self.detector_calls,
            "classical_evaluations": self.classical_evaluations,
            "pruned_mass": self.pruned_mass,
            "depth": self.depth,
            "levels": [list(level) for level in self.levels],
            "events": [asdict(e) for e in self.events],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["depth", "lo", "hi", "verdict", "copies", "inferred"])
        for e in self.events:
            writer.writerow([e.depth, e.lo, e.hi, e.verdict, e.copies, int(e.inferred)])
        return buf.getvalue()


@dataclass
class SearchOutcome:
    solutions: list
    status: str
    trace: SearchTrace

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "solutions": [str(a) for a in self.solutions],
            "solution_indices": [a.index for a in self.solutions],
            "trace": self.trace.to_dict(),
        }


class _Budget(Exception):
    pass


class _Detector:
    """Runs one route on range oracles and records every call in the trace."""

    def __init__(self, f: Formula, cfg: SearchConfig, trace: SearchTrace):
        self.f, self.cfg, self.trace = f, cfg, trace
        n = f.n
        route = cfg.route
        if route == "analytic":
            if n > ANALYTIC_MAX_QUBITS:
                raise CapExceededError(f"analytic route limited to n <= {ANALYTIC_MAX_QUBITS}")
            self.layout = None
            return
        self.layout = RegisterLayout.for_mode(n, cfg.mode)
        if route == "purity":
            if n > PURITY_MAX_QUBITS:
                raise CapExceededError(f"purity route limited to n <= {PURITY_MAX_QUBITS}")
            return
        if self.layout.dim > MAX_DENSE_DIM:
            raise CapExceededError(
                f"route {route!r} needs a {self.layout.dim}-dimensional density matrix "
                f"(cap {MAX_DENSE_DIM})")
        if route in ("spa-exact", "spa-estimated"):
            if self.layout.query_dim != self.layout.answer_dim:
                raise ValueError("SPA routes need a d⊗d register; use mode 'dxd'")
            self.spa = transpose_spa(self.layout.query_dim)

    def __call__(self, lo: int, hi: int, depth: int) -> DetectionVerdict:
        cfg, trace = self.cfg, self.trace
        if cfg.max_detector_calls is not None and trace.detector_calls >= cfg.max_detector_calls:
            raise _Budget
        trace.oracle_queries += 1
        trace.detector_calls += 1
        if cfg.route == "analytic":
            verdict = analytic_test(self.f, lo, hi)
        else:
            psi = post_oracle_state(self.f, lo, hi, self.layout)
            if cfg.route == "purity":
                verdict = purity_test(psi)
            elif cfg.route == "ppt":
                verdict = ppt_test(density_from_state(psi))
            elif cfg.route == "spa-exact":
                verdict = spa_test_exact(density_from_state(psi), self.spa)
            else:
                est = cfg.estimator
                # distinct seeds per call keep repeated calls independent but reproducible
                call_cfg = CopyEstimatorConfig(
                    est.copies, est.seed + (trace.detector_calls - 1) * est.repetitions, est.repetitions)
                verdict = spa_test_estimated(density_from_state(psi), self.spa, call_cfg)
        trace.events.append(TraceEvent(depth, lo, hi, verdict.verdict, cfg.route, verdict.copies))
        trace.depth = max(trace.depth, depth)
        return verdict


def _verify(f: Formula, index: int, trace: SearchTrace) -> bool:
    trace.classical_evaluations += 1
    return bool(evaluate(f, Assignment.from_index(index, f.n)))


def search(f: Formula, cfg: SearchConfig | None = None) -> SearchOutcome:
    """Find a solution (or all of them with ``cfg.multi_solution``) by range bisection."""
    cfg = cfg or SearchConfig()
    trace = SearchTrace()
    detect = _Detector(f, cfg, trace)
    size = 1 << f.n
    try:
        full = detect(0, size - 1, 0)
        if full.separable:
            return _separable_full_range(f, cfg, trace)
        if cfg.multi_solution:
            return _search_all(f, cfg, trace, detect)
        return _search_one(f, cfg, trace, detect)
    except _Budget:
        return SearchOutcome([], BUDGET_EXHAUSTED, trace)


def _separable_full_range(f: Formula, cfg: SearchConfig, trace: SearchTrace) -> SearchOutcome:
    # k = 0 and k = 2**n both give a product state; one evaluation tells them apart
    size = 1 << f.n
    if not _verify(f, 0, trace):
        trace.pruned_mass = size
        trace.levels.append((0, 0, size))
        return SearchOutcome([], NONE_EXIST, trace)
    trace.levels.append((0, size, 0))
    count = size if cfg.multi_solution else 1
    if cfg.max_solutions is not None:
        count = min(count, cfg.max_solutions)
    if cfg.route == "spa-estimated":
        # a noisy verdict does not prove k = 2**n: check everything reported
        if not all(_verify(f, i, trace) for i in range(1, count)):
            return SearchOutcome([], BUDGET_EXHAUSTED, trace)
    return SearchOutcome([Assignment.from_index(i, f.n) for i in range(count)], ALL_SOLUTIONS, trace)


def _search_one(f, cfg, trace, detect) -> SearchOutcome:
    lo, hi = 0, (1 << f.n) - 1
    depth = 0
    trace.levels.append((0, hi - lo + 1, 0))
    while hi > lo:
        mid = (lo + hi) // 2
        lower, upper = (lo, mid), (mid + 1, hi)
        if detect(*lower, depth + 1).entangled:
            keep, drop = lower, upper
        elif cfg.infer_complement:
            trace.events.append(TraceEvent(depth + 1, *upper, "entangled", cfg.route, 0, inferred=True))
            keep, drop = upper, lower
        elif detect(*upper, depth + 1).entangled:
            keep, drop = upper, lower
        else:
            # entangled parent with two separable halves: only a noisy detector gets here
            detect(lo, hi, depth)
            return SearchOutcome([], BUDGET_EXHAUSTED, trace)
        trace.pruned_mass += drop[1] - drop[0] + 1
        lo, hi = keep
        depth += 1
        trace.levels.append((depth, hi - lo + 1, trace.pruned_mass))
    if _verify(f, lo, trace):
        return SearchOutcome([Assignment.from_index(lo, f.n)], FOUND, trace)
    return SearchOutcome([], BUDGET_EXHAUSTED, trace)


def _search_all(f, cfg, trace, detect) -> SearchOutcome:
    found = []
    stack = [(0, (1 << f.n) - 1, 0)]
    while stack:
        lo, hi, depth = stack.pop()
        if lo == hi:
            if _verify(f, lo, trace):
                found.append(Assignment.from_index(lo, f.n))
                if cfg.max_solutions is not None and len(found) >= cfg.max_solutions:
                    break
            else:
                trace.pruned_mass += 1
            continue
        mid = (lo + hi) // 2
        lower, upper = (lo, mid, depth + 1), (mid + 1, hi, depth + 1)
        lower_hit = detect(lo, mid, depth + 1).entangled
        if lower_hit:
            upper_hit = detect(mid + 1, hi, depth + 1).entangled
        elif cfg.infer_complement:
            trace.events.append(TraceEvent(depth + 1, mid + 1, hi, "entangled", cfg.route, 0, inferred=True))
            upper_hit = True
        else:
            upper_hit = detect(mid + 1, hi, depth + 1).entangled
            if not upper_hit:
                if detect(lo, hi, depth).entangled:
                    return SearchOutcome(found, BUDGET_EXHAUSTED, trace)
                trace.pruned_mass += hi - lo + 1
                continue
        if upper_hit:
            stack.append(upper)
        else:
            trace.pruned_mass += hi - mid
        if lower_hit:
            stack.append(lower)
        else:
            trace.pruned_mass += mid - lo + 1
    if not found:
        return SearchOutcome([], BUDGET_EXHAUSTED, trace)
    return SearchOutcome(found, FOUND, trace)


def classical_baseline(f: Formula) -> SearchOutcome:
    """Ascending exhaustive scan; ``oracle_queries`` counts evaluations until the first hit."""
    trace = SearchTrace()
    table = f.truth_table()
    hits = table.nonzero()[0]
    if hits.size:
        first = int(hits[0])
        trace.oracle_queries = trace.classical_evaluations = first + 1
        trace.pruned_mass = first
        return SearchOutcome([Assignment.from_index(first, f.n)], FOUND, trace)
    trace.oracle_queries = trace.classical_evaluations = table.size
    trace.pruned_mass = table.size
    return SearchOutcome([], NONE_EXIST, trace)


def cost_model(trace: SearchTrace, n: int, m: int, copies: int) -> dict:
    """Counted work next to the asymptotic totals, all at the instance parameters.

    Each detector call is charged the ``N²n²`` gates of the copy-symmetrising
    network; each oracle query is charged ``n + m`` for verifying one
    assignment.
    """
    per_call = copies ** 2 * n ** 2
    detection = trace.detector_calls * per_call
    verification = trace.oracle_queries * (n + m)
    return {
        "n": n,
        "m": m,
        "copies": copies,
        "detector_calls": trace.detector_calls,
        "oracle_queries": trace.oracle_queries,
        "classical_evaluations": trace.classical_evaluations,
        "per_call_network_cost": per_call,
        "detection_cost": detection,
        "verification_cost": verification,
        "total_cost": detection + verification,
        "asymptotic_search": copies ** 2 * n ** 3,
        "asymptotic_sat": copies ** 2 * n ** 4 + copies ** 2 * n ** 3 * m,
        "classical_worst_case": (1 << n) * (n + m),
    }
