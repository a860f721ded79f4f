# Formulas, the range oracle and the reduced answer state.
import numpy as np

from entsearch.formula import count_solutions, enumerate_paths, parse_expr, solutions
from entsearch.oracle import post_oracle_state
from entsearch.qsim import ANSWER, RegisterLayout, answer_state_closed_form, purity, reduced_state

f = parse_expr("(x1 & x2) | x3")
print("n =", f.n, " m =", f.m)
print("solutions:", [str(a) for a in solutions(f)])
print("satisfying paths (1-based):", enumerate_paths(f))

# the oracle writes f(x) into the answer qubit of the uniform superposition
layout = RegisterLayout.minimal(f.n)
psi = post_oracle_state(f, 0, 7, layout)
print(np.round(psi.amplitudes.real.reshape(8, 2), 3))

# tracing out the query register leaves diag((2^n - k)/2^n, k/2^n)
for lo, hi in [(0, 7), (0, 3), (4, 7), (0, 0)]:
    k = count_solutions(f, lo, hi).k
    rho = reduced_state(post_oracle_state(f, lo, hi, layout), ANSWER)
    print(f"[{lo},{hi}] k={k}", np.round(np.diag(rho.matrix).real, 4),
          "closed form", np.diag(answer_state_closed_form(3, k).matrix),
          "purity", round(purity(rho), 4))
