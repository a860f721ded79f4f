"""How many copies are needed to tell a one-solution state from a no-solution state.

With ``L`` basis states the two post-oracle states overlap by
``δ = (L - 1) / L``; ``N`` copies overlap by ``δ**N``.  Driving that overlap
below a constant needs ``N ≈ L ln(1/c)`` copies, i.e. linear in the search
space.  All powers are evaluated in log space.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .formula import Formula, Op, Var, NOT, AND, planted_formula
from .oracle import post_oracle_state
from .qsim import RegisterLayout, inner_product

DELTA_SIM_MAX_QUBITS = 12
GRID_MIN_EXP, GRID_MAX_EXP = 1, 30
CSV_COLUMNS = ("L", "N", "delta", "log10_deltaN", "deltaN", "bound")


def log_delta_power(L, N):
    """``N * ln((L - 1) / L)``."""
    return N * np.log1p(-1.0 / np.asarray(L, dtype=float))


def guessing_bound(overlap: float) -> float:
    """Best success probability for telling apart two pure states with this overlap."""
    return 0.5 + 0.5 * math.sqrt(max(0.0, 1.0 - overlap * overlap))


@dataclass(frozen=True)
class DistinguishabilityPoint:
    L: int
    N: int
    delta: float
    log10_deltaN: float
    deltaN: float
    bound: float

    @classmethod
    def at(cls, L: int, N: int) -> "DistinguishabilityPoint":
        if L < 2 or N < 1:
            raise ValueError("need L >= 2 and N >= 1")
        log_dn = float(log_delta_power(L, N))
        delta_n = math.exp(log_dn)
        return cls(int(L), int(N), delta_analytic(L), log_dn / math.log(10), delta_n, guessing_bound(delta_n))

    def row(self) -> tuple:
        return (self.L, self.N, self.delta, self.log10_deltaN, self.deltaN, self.bound)


def delta_analytic(L: int) -> float:
    if L < 2:
        raise ValueError("search space dimension must be at least 2")
    return (L - 1) / L


def _contradiction(n: int) -> Formula:
    return Formula(n, Op(AND, (Var(1), Op(NOT, (Var(1),)))), source="x1 & !x1")


def delta_simulated(n: int, solution: int) -> float:
    """Overlap of simulated post-oracle states with one solution vs none (``L = 2**n``)."""
    if not 1 <= n <= DELTA_SIM_MAX_QUBITS:
        raise ValueError(f"n must be in [1, {DELTA_SIM_MAX_QUBITS}]")
    if not 0 <= solution < (1 << n):
        raise ValueError(f"solution index {solution} out of range for n={n}")
    layout = RegisterLayout.minimal(n)
    full = (1 << n) - 1
    with_solution = post_oracle_state(planted_formula(n, solution), 0, full, layout)
    without = post_oracle_state(_contradiction(n), 0, full, layout)
    return inner_product(with_solution, without).real


def copies_required(L: int, c: float) -> int:
    """Smallest ``N`` with ``((L - 1) / L) ** N <= c``."""
    if L < 2:
        raise ValueError("search space dimension must be at least 2")
    if not 0.0 < c < 1.0:
        raise ValueError("target overlap must lie strictly between 0 and 1")
    log_c = math.log(c)
    step = math.log1p(-1.0 / L)
    n = max(1, math.ceil(log_c / step))
    # guard the ceiling against rounding on either side
    while n * step > log_c:
        n += 1
    while n > 1 and (n - 1) * step <= log_c:
        n -= 1
    return n


def _axis(lo: int, hi: int, points: int) -> np.ndarray:
    if points < 1 or lo > hi:
        raise ValueError("empty grid axis")
    if not (2 ** GRID_MIN_EXP <= lo and hi <= 2 ** GRID_MAX_EXP):
        raise ValueError(f"grid axes must lie in [2**{GRID_MIN_EXP}, 2**{GRID_MAX_EXP}]")
    values = np.unique(np.rint(np.geomspace(lo, hi, points)).astype(np.int64))
    return values


def overlap_grid(L_range=(2, 2 ** 30), N_range=(2, 2 ** 30), points: int = 64) -> list:
    """Log-spaced (L, N) grid of overlap points, sorted by L then N."""
    Ls = _axis(*L_range, points)
    Ns = _axis(*N_range, points)
    return [DistinguishabilityPoint.at(int(L), int(N)) for L in Ls for N in Ns]


def grid_csv(points) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for p in points:
        writer.writerow([p.L, p.N, repr(p.delta), repr(p.log10_deltaN), repr(p.deltaN), repr(p.bound)])
    return buf.getvalue()


def ratio_table(exponents=(10, 12, 14, 16, 18, 20), c: float = 0.5) -> list:
    """``copies_required(L, c) / L`` against its limit ``ln(1/c)``."""
    limit = math.log(1.0 / c)
    rows = []
    for e in exponents:
        L = 1 << e
        N = copies_required(L, c)
        rows.append({"L": L, "N": N, "ratio": N / L, "limit": limit, "rel_error": N / L / limit - 1.0})
    return rows
