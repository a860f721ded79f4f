# Range bisection driven by separability verdicts, against an exhaustive scan.
from entsearch.formula import parse_expr, planted_formula
from entsearch.hsearch import SearchConfig, classical_baseline, cost_model, search

f = parse_expr("(x1 & x2) | x3")
out = search(f, SearchConfig(multi_solution=True))
print(out.status, [str(a) for a in out.solutions], "detector calls:", out.trace.detector_calls)
print(out.trace.to_csv())

print(" n  calls(infer)  calls(no infer)  classical")
for n in range(2, 13):
    g = planted_formula(n, (1 << n) - 1)
    on = search(g, SearchConfig(route="purity"))
    off = search(g, SearchConfig(route="purity", infer_complement=False))
    print(f"{n:2d}  {on.trace.detector_calls:12d}  {off.trace.detector_calls:15d}  "
          f"{classical_baseline(g).trace.classical_evaluations:9d}")

g = planted_formula(8, 77)
cost = cost_model(search(g).trace, 8, g.m, 16)
print({k: cost[k] for k in ("detector_calls", "detection_cost", "asymptotic_search", "classical_worst_case")})
