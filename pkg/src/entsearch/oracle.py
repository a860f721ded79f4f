"""Range-restricted entangling oracles ``|q>|a> -> |q>|a xor f_[lo,hi](q)>``.

Oracles act as amplitude permutations and are never stored as matrices,
except for the explicit unitarity check at small sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError
from .formula import Formula
from .qsim import PureState, RegisterLayout, uniform_superposition

UNITARY_CHECK_MAX_DIM = 1 << 12


@dataclass(frozen=True, eq=False)
class RangeOracle:
    formula: Formula
    lo: int
    hi: int
    layout: RegisterLayout

    def __post_init__(self):
        if self.layout.query_qubits != self.formula.n:
            raise ValueError("layout query register does not match formula width")
        if not 0 <= self.lo <= self.hi <= (1 << self.formula.n) - 1:
            raise ValueError(f"range [{self.lo}, {self.hi}] outside [0, {(1 << self.formula.n) - 1}]")

    @classmethod
    def full(cls, formula: Formula, layout: RegisterLayout) -> "RangeOracle":
        return cls(formula, 0, (1 << formula.n) - 1, layout)

    def flags(self) -> np.ndarray:
        """f_[lo,hi](x) for every query basis index x."""
        out = np.zeros(1 << self.formula.n, dtype=bool)
        out[self.lo:self.hi + 1] = self.formula.truth_table()[self.lo:self.hi + 1]
        return out

    def permutation(self) -> np.ndarray:
        """Target basis index for every source basis index."""
        da = self.layout.answer_dim
        grid = np.arange(self.layout.dim).reshape(-1, da)
        grid[self.flags()] ^= 1
        return grid.ravel()


def apply_oracle(oracle: RangeOracle, psi: PureState) -> PureState:
    if psi.dims != oracle.layout.dims:
        raise ValueError(f"state dims {psi.dims} do not match oracle layout {oracle.layout.dims}")
    amps = np.array(psi.amplitudes).reshape(-1, oracle.layout.answer_dim)
    flagged = oracle.flags()
    # flip the last answer qubit on flagged rows: swap columns a <-> a^1
    amps[flagged] = amps[flagged][:, np.arange(oracle.layout.answer_dim) ^ 1]
    return PureState(amps.ravel(), layout=oracle.layout)


def is_involutive_permutation(perm: np.ndarray) -> bool:
    """True iff the 0/1 matrix with ``P[perm[i], i] = 1`` is a permutation equal to its inverse.

    Works on the index map directly: P is a permutation iff ``perm`` is a
    bijection, and ``P @ P = I`` iff ``perm[perm]`` is the identity.
    """
    perm = np.asarray(perm)
    dim = perm.size
    if dim > UNITARY_CHECK_MAX_DIM:
        raise CapExceededError(f"unitarity check limited to dimension {UNITARY_CHECK_MAX_DIM}")
    if perm.min(initial=0) < 0 or perm.max(initial=0) >= dim:
        return False
    bijective = np.unique(perm).size == dim
    return bool(bijective and np.array_equal(perm[perm], np.arange(dim)))


def oracle_matrix(oracle: RangeOracle) -> np.ndarray:
    dim = oracle.layout.dim
    if dim > UNITARY_CHECK_MAX_DIM:
        raise CapExceededError(f"oracle matrix limited to dimension {UNITARY_CHECK_MAX_DIM}")
    mat = np.zeros((dim, dim))
    mat[oracle.permutation(), np.arange(dim)] = 1.0
    return mat


def oracle_unitary_check(oracle: RangeOracle) -> bool:
    return is_involutive_permutation(oracle.permutation())


def post_oracle_state(f: Formula, lo: int, hi: int, layout: RegisterLayout) -> PureState:
    oracle = RangeOracle(f, lo, hi, layout)
    return apply_oracle(oracle, uniform_superposition(layout))
