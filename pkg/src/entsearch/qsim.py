"""Dense pure states and density operators for the query/answer register.

Basis index of ``|x>|a>`` is ``x * answer_dim + a``: the query register holds
the high-order qubits.  In d⊗d mode the answer register has as many qubits as
the query register and the oracle writes only its last (least significant)
qubit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as scla
import scipy.sparse.linalg as spla

from .errors import CapExceededError

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

MAX_DENSE_DIM = 1 << 12     # side of the largest density matrix we materialise
MAX_STATE_DIM = 1 << 25
DXD_MAX_QUBITS = 6
_LANCZOS_MIN_DIM = 2048

QUERY, ANSWER = 0, 1


@dataclass(frozen=True)
class RegisterLayout:
    query_qubits: int
    answer_qubits: int = 1

    def __post_init__(self):
        if self.query_qubits < 1:
            raise ValueError("empty query register")
        if self.answer_qubits not in (1, self.query_qubits):
            raise ValueError("answer register must have 1 qubit or as many as the query register")
        if self.answer_qubits > 1 and self.query_qubits > DXD_MAX_QUBITS:
            raise CapExceededError(f"d⊗d mode is capped at n <= {DXD_MAX_QUBITS}")
        if self.dim > MAX_STATE_DIM:
            raise CapExceededError(f"state dimension 2**{self.query_qubits + self.answer_qubits} too large")

    @classmethod
    def minimal(cls, n: int) -> "RegisterLayout":
        return cls(n, 1)

    @classmethod
    def dxd(cls, n: int) -> "RegisterLayout":
        return cls(n, n)

    @classmethod
    def for_mode(cls, n: int, mode: str) -> "RegisterLayout":
        if mode == "minimal":
            return cls.minimal(n)
        if mode == "dxd":
            return cls.dxd(n)
        raise ValueError(f"unknown register mode {mode!r}")

    @property
    def mode(self) -> str:
        return "dxd" if self.answer_qubits == self.query_qubits else "minimal"

    @property
    def query_dim(self) -> int:
        return 1 << self.query_qubits

    @property
    def answer_dim(self) -> int:
        return 1 << self.answer_qubits

    @property
    def dim(self) -> int:
        return self.query_dim * self.answer_dim

    @property
    def dims(self) -> tuple:
        return (self.query_dim, self.answer_dim)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalised state vector with declared subsystem dimensions."""

    amplitudes: np.ndarray
    dims: tuple = None
    layout: RegisterLayout | None = None

    def __post_init__(self):
        amps = _readonly(np.ravel(self.amplitudes))
        object.__setattr__(self, "amplitudes", amps)
        dims = self.layout.dims if self.layout is not None else self.dims
        if dims is None:
            dims = (amps.size,)
        dims = tuple(int(d) for d in dims)
        object.__setattr__(self, "dims", dims)
        if int(np.prod(dims)) != amps.size:
            raise ValueError(f"dims {dims} do not match {amps.size} amplitudes")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalised: <psi|psi> = {norm!r}")

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class DensityOp:
    """Hermitian, trace-one, positive semidefinite matrix over ``dims``.

    ``check_psd=False`` skips the eigenvalue check; internal constructions
    that preserve positivity by construction use it, as does the Choi state,
    which is allowed to be indefinite.
    """

    matrix: np.ndarray
    dims: tuple = None
    check_psd: bool = True

    def __post_init__(self):
        mat = _readonly(self.matrix)
        object.__setattr__(self, "matrix", mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("density operator must be a square matrix")
        dims = (mat.shape[0],) if self.dims is None else tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if int(np.prod(dims)) != mat.shape[0]:
            raise ValueError(f"dims {dims} do not match matrix side {mat.shape[0]}")
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("matrix is not Hermitian")
        tr = np.trace(mat)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace is {tr!r}, expected 1")
        if self.check_psd:
            low = min_eigenvalue(mat)
            if low < -PSD_TOL:
                raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {low:.3e})")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return scla.eigvalsh(self.matrix)


def min_eigenvalue(matrix: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix.

    Dense LAPACK below 2048, Lanczos above (falls back to dense if it does
    not converge).  The Lanczos start vector is a fixed pseudo-random vector:
    results repeat, and it is not confined to a symmetry sector.
    """
    matrix = np.asarray(matrix)
    dim = matrix.shape[0]
    if dim < _LANCZOS_MIN_DIM:
        return float(scla.eigvalsh(matrix, subset_by_index=[0, 0])[0])
    v0 = np.random.default_rng(0).normal(size=dim).astype(matrix.dtype)
    try:
        vals = spla.eigsh(matrix, k=1, which="SA", v0=v0, tol=1e-13,
                          return_eigenvectors=False, maxiter=20 * dim)
        return float(vals[0])
    except spla.ArpackNoConvergence:
        return float(scla.eigvalsh(matrix, subset_by_index=[0, 0])[0])


def uniform_superposition(layout: RegisterLayout) -> PureState:
    """``H^{⊗n}|0>`` on the query register, answer register in ``|0...0>``."""
    amps = np.zeros((layout.query_dim, layout.answer_dim), dtype=complex)
    amps[:, 0] = 1.0 / np.sqrt(layout.query_dim)
    return PureState(amps, layout=layout)


def density_from_state(psi: PureState) -> DensityOp:
    if psi.dim > MAX_DENSE_DIM:
        raise CapExceededError(f"density matrix side {psi.dim} exceeds cap {MAX_DENSE_DIM}")
    v = psi.amplitudes
    return DensityOp(np.outer(v, v.conj()), psi.dims, check_psd=False)


def _bipartite(dims) -> tuple:
    if len(dims) != 2:
        raise ValueError(f"expected a bipartite operator, got dims {dims}")
    return dims


def partial_trace(rho: DensityOp, keep: int) -> DensityOp:
    """Reduced state on subsystem ``keep`` (0 = query/A, 1 = answer/B)."""
    da, db = _bipartite(rho.dims)
    m = rho.matrix.reshape(da, db, da, db)
    if keep == QUERY:
        out, dims = np.einsum("ajbj->ab", m), (da,)
    elif keep == ANSWER:
        out, dims = np.einsum("iaib->ab", m), (db,)
    else:
        raise ValueError("keep must be 0 (first subsystem) or 1 (second subsystem)")
    return DensityOp(out, dims, check_psd=False)


def reduced_state(psi: PureState, keep: int) -> DensityOp:
    """Same result as ``partial_trace(density_from_state(psi), keep)`` in O(D·d)."""
    da, db = _bipartite(psi.dims)
    m = psi.amplitudes.reshape(da, db)
    if keep == QUERY:
        return DensityOp(m @ m.conj().T, (da,), check_psd=False)
    if keep == ANSWER:
        return DensityOp(m.T @ m.conj(), (db,), check_psd=False)
    raise ValueError("keep must be 0 (first subsystem) or 1 (second subsystem)")


def answer_bit_marginal(rho_answer: DensityOp) -> DensityOp:
    """Marginal of the last answer qubit (identity for a one-qubit answer register)."""
    d = rho_answer.dim
    if d == 2:
        return rho_answer
    split = DensityOp(rho_answer.matrix, (d // 2, 2), check_psd=False)
    return partial_trace(split, ANSWER)


def answer_state_closed_form(n: int, k: int) -> DensityOp:
    """``(1/2**n)[(2**n - k)|0><0| + k|1><1|]``."""
    size = 1 << n
    if not 0 <= k <= size:
        raise ValueError(f"k={k} outside [0, {size}]")
    return DensityOp(np.diag([(size - k) / size, k / size]), (2,), check_psd=False)


def inner_product(psi1: PureState, psi2: PureState) -> complex:
    if psi1.dims != psi2.dims:
        raise ValueError("states have different layouts")
    return complex(np.vdot(psi1.amplitudes, psi2.amplitudes))


def purity(rho: DensityOp) -> float:
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho.matrix) ** 2))


def depolarize(rho: DensityOp, p: float) -> DensityOp:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing weight {p} outside [0, 1]")
    mixed = (1 - p) * rho.matrix + p * np.eye(rho.dim) / rho.dim
    return DensityOp(mixed, rho.dims, check_psd=rho.check_psd)


def tensor(rho_a: DensityOp, rho_b: DensityOp) -> DensityOp:
    return DensityOp(np.kron(rho_a.matrix, rho_b.matrix), (rho_a.dim, rho_b.dim), check_psd=False)


def bell_state() -> PureState:
    return PureState(np.array([1, 0, 0, 1]) / np.sqrt(2), dims=(2, 2))


def basis_state(index: int, dims) -> PureState:
    amps = np.zeros(int(np.prod(dims)), dtype=complex)
    amps[index] = 1.0
    return PureState(amps, dims=dims)


# --------------------------------------------------------------------------- #
# JSON export: row-major, complex entries as [re, im] pairs
# --------------------------------------------------------------------------- #

def _pairs(a: np.ndarray) -> list:
    return np.stack([a.real, a.imag], axis=-1).tolist()


def to_json(obj) -> dict:
    if isinstance(obj, PureState):
        return {"kind": "state", "dims": list(obj.dims), "data": _pairs(obj.amplitudes)}
    if isinstance(obj, DensityOp):
        return {"kind": "density", "dims": list(obj.dims), "data": _pairs(obj.matrix)}
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def from_json(record: dict):
    data = np.asarray(record["data"], dtype=float)
    values = data[..., 0] + 1j * data[..., 1]
    if record["kind"] == "state":
        return PureState(values, dims=tuple(record["dims"]))
    if record["kind"] == "density":
        return DensityOp(values, tuple(record["dims"]))
    raise ValueError(f"unknown record kind {record['kind']!r}")
