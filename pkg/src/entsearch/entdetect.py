"""Separability tests for bipartite states.

Routes
------
analytic
    Ground truth from the solution count of the oracle range.
purity
    A pure bipartite state is entangled iff its reduced state is mixed.
ppt
    Partial transpose on the second subsystem; conclusive for 2⊗2, 2⊗3 and
    for every pure state.
spa-exact
    Structural physical approximation of ``I ⊗ Λ``: the positive map mixed
    with the completely depolarising map, just enough to be completely
    positive.  ``rho`` is separable (w.r.t. ``Λ``) iff the smallest eigenvalue
    of the mixed output is at least ``d²|λ| / (d⁴|λ| + 1)``, where ``λ`` is
    the most negative eigenvalue of the induced map applied to the maximally
    entangled state on ``d²⊗d²``.
spa-estimated
    As ``spa-exact`` but the smallest eigenvalue is estimated from ``N``
    simulated copies and decided by an ``r``-fold majority vote.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as scla

from .errors import CapExceededError
from .formula import ENUMERATION_CAP, Formula, count_solutions
from .qsim import ANSWER, DensityOp, PureState, min_eigenvalue, purity, reduced_state

EIG_TOL = 1e-10
CHOI_CAP = 1 << 12          # largest d**4 for which choi_state() builds the matrix
DENSE_CHOI_MAX = 256        # above this SpaMap works from the factorised spectrum
BISECTION_STEPS = 50

SEPARABLE, ENTANGLED = "separable", "entangled"
ROUTES = ("analytic", "purity", "ppt", "spa-exact", "spa-estimated")


@dataclass(frozen=True)
class DetectionVerdict:
    verdict: str
    route: str
    statistic: float | None = None
    threshold: float | None = None
    copies: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def separable(self) -> bool:
        return self.verdict == SEPARABLE

    @property
    def entangled(self) -> bool:
        return self.verdict == ENTANGLED

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "route": self.route,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "copies": self.copies,
        }
        out.update(self.extra)
        return out


def _verdict(separable: bool) -> str:
    return SEPARABLE if separable else ENTANGLED


# --------------------------------------------------------------------------- #
# Maps on M_d, represented as superoperators on row-major vec(X)
# --------------------------------------------------------------------------- #

def transpose_superop(d: int) -> np.ndarray:
    i, j = np.divmod(np.arange(d * d), d)
    s = np.zeros((d * d, d * d))
    s[j * d + i, i * d + j] = 1.0
    return s


def identity_superop(d: int) -> np.ndarray:
    return np.eye(d * d)


def apply_superop(superop: np.ndarray, x: np.ndarray) -> np.ndarray:
    d = x.shape[0]
    return (superop @ x.reshape(d * d)).reshape(d, d)


def apply_local(matrix: np.ndarray, dims: tuple, superop: np.ndarray) -> np.ndarray:
    """``[I ⊗ Λ](matrix)`` where ``Λ`` acts on the second factor of ``dims``."""
    da, db = dims
    s4 = np.asarray(superop).reshape(db, db, db, db)
    m4 = matrix.reshape(da, db, da, db)
    return np.einsum("klij,aibj->akbl", s4, m4).reshape(da * db, da * db)


def partial_transpose(matrix: np.ndarray, dims: tuple) -> np.ndarray:
    da, db = dims
    return matrix.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(da * db, da * db)


def _random_pure(d: int, rng) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def _max_entangled(d: int) -> np.ndarray:
    v = np.zeros(d * d)
    v[np.arange(d) * (d + 1)] = 1.0 / np.sqrt(d)
    return np.outer(v, v)


@dataclass(frozen=True, eq=False)
class PositiveMapSpec:
    """A positive, not completely positive map ``Λ: M_d -> M_d``.

    Positivity is only checked on sampled pure inputs: a necessary condition,
    not a proof.  Non-complete-positivity is checked exactly via the Choi
    matrix.
    """

    kind: str
    d: int
    superop: np.ndarray = None
    samples: int = 256
    seed: int = 0

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("map dimension must be at least 2")
        if self.kind == "transpose":
            object.__setattr__(self, "superop", transpose_superop(self.d))
        elif self.kind == "custom":
            if self.superop is None:
                raise ValueError("custom map needs a superoperator matrix")
            superop = np.asarray(self.superop)
            if superop.shape != (self.d ** 2, self.d ** 2):
                raise ValueError(f"superoperator must be {self.d ** 2}x{self.d ** 2}")
            object.__setattr__(self, "superop", superop)
        else:
            raise ValueError(f"unknown map kind {self.kind!r}")
        self._validate()

    @classmethod
    def transpose(cls, d: int) -> "PositiveMapSpec":
        return cls("transpose", d)

    @classmethod
    def custom(cls, superop, d: int, **kw) -> "PositiveMapSpec":
        return cls("custom", d, np.asarray(superop), **kw)

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "transpose":
            return x.T
        return apply_superop(self.superop, x)

    def apply_local(self, matrix: np.ndarray, dims: tuple) -> np.ndarray:
        """``[I ⊗ Λ](matrix)``."""
        if self.kind == "transpose":
            return partial_transpose(matrix, dims)
        return apply_local(matrix, dims, self.superop)

    def choi_min_eigenvalue(self) -> float:
        """Most negative eigenvalue of ``[I⊗Λ]`` on the maximally entangled ``d⊗d`` state."""
        return min_eigenvalue(self.apply_local(_max_entangled(self.d), (self.d, self.d)))

    def _validate(self):
        rng = np.random.default_rng(self.seed)
        for _ in range(self.samples):
            v = _random_pure(self.d, rng)
            out = self.apply(np.outer(v, v.conj()))
            if np.max(np.abs(out - out.conj().T)) > 1e-10:
                raise ValueError("map does not preserve Hermiticity")
            if scla.eigvalsh(out)[0] < -EIG_TOL:
                raise ValueError("map is not positive on a sampled pure state")
            if abs(np.trace(out) - 1.0) > 1e-10:
                raise ValueError("map is not trace preserving")
        if self.choi_min_eigenvalue() >= -EIG_TOL:
            raise ValueError("map is completely positive; it cannot detect entanglement")


def _as_map(lam_map) -> PositiveMapSpec:
    if isinstance(lam_map, PositiveMapSpec):
        return lam_map
    return _RawMap(np.asarray(lam_map))


class _RawMap:
    # unvalidated superoperator, e.g. the identity map for a CP control
    kind = "custom"

    def __init__(self, superop):
        self.superop = superop
        self.d = int(round(np.sqrt(superop.shape[0])))

    def apply_local(self, matrix, dims):
        return apply_local(matrix, dims, self.superop)

    def choi_min_eigenvalue(self):
        return min_eigenvalue(self.apply_local(_max_entangled(self.d), (self.d, self.d)))


def choi_state(lam_map, d: int, cap: int = CHOI_CAP) -> DensityOp:
    """``[(I⊗I)⊗(I⊗Λ)]`` applied to the maximally entangled state on ``d²⊗d²``.

    Hermitian and trace one, but indefinite whenever ``Λ`` is not completely
    positive.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    if d ** 4 > cap:
        raise CapExceededError(f"Choi state of side d**4={d ** 4} exceeds cap {cap}")
    probe = _max_entangled(d * d)
    # I_{d^2} ⊗ (I_d ⊗ Λ): Λ touches only the last d-dimensional factor
    out = _as_map(lam_map).apply_local(probe, (d ** 3, d))
    return DensityOp(out, (d * d, d * d), check_psd=False)


def _choi_lambda(lam_map, d: int) -> float:
    """Most negative Choi eigenvalue (0 if the map is completely positive)."""
    lam_map = _as_map(lam_map)
    if d ** 4 <= DENSE_CHOI_MAX:
        low = choi_state(lam_map, d).eigenvalues()[0]
    else:
        # The d²⊗d² probe factorises into two d⊗d probes, so the spectrum is
        # the d⊗d Choi spectrum together with zeros.
        low = lam_map.choi_min_eigenvalue()
    return float(min(low, 0.0))


@dataclass(frozen=True, eq=False)
class SpaMap:
    """Structural physical approximation of ``I ⊗ Λ`` on ``d⊗d`` states.

    ``lam`` is the most negative eigenvalue of the Choi state, ``mixing`` the
    smallest depolarising weight that makes the mixed Choi matrix PSD (found
    by bisection) and ``threshold`` the separability bound on the smallest
    output eigenvalue.
    """

    base: PositiveMapSpec
    lam: float
    mixing: float
    threshold: float

    @property
    def d(self) -> int:
        return self.base.d

    @classmethod
    def build(cls, base: PositiveMapSpec) -> "SpaMap":
        d = base.d
        lam = _choi_lambda(base, d)
        mixing = _bisect_mixing(_MixedChoi(base, d, lam))
        return cls(base, lam, mixing, spa_threshold(lam, d))

    def apply(self, rho: DensityOp) -> DensityOp:
        d = self.d
        if tuple(rho.dims) != (d, d):
            raise ValueError(f"SPA map expects a {d}⊗{d} state, got dims {rho.dims}")
        mapped = self.base.apply_local(rho.matrix, rho.dims)
        mixed = self.mixing * np.trace(rho.matrix) * np.eye(d * d) / (d * d) + (1 - self.mixing) * mapped
        return DensityOp((mixed + mixed.conj().T) / 2, rho.dims, check_psd=False)

    def choi_min_eigenvalue(self, mixing: float) -> float:
        """Smallest eigenvalue of the Choi matrix of the map mixed with weight ``mixing``."""
        return _MixedChoi(self.base, self.d, self.lam)(mixing)


def spa_threshold(lam: float, d: int) -> float:
    """Separability bound ``d²|λ| / (d⁴|λ| + 1)`` for the SPA output."""
    mag = abs(lam)
    return d * d * mag / (d ** 4 * mag + 1)


class _MixedChoi:
    """Smallest Choi eigenvalue of ``p·(depolarising) + (1-p)·(I⊗Λ)`` as a function of p."""

    def __init__(self, lam_map, d, lam):
        self.dim = d ** 4
        self.choi = choi_state(lam_map, d).matrix if self.dim <= DENSE_CHOI_MAX else None
        self.lam = lam

    def __call__(self, mixing: float) -> float:
        if self.choi is not None:
            mixed = mixing * np.eye(self.dim) / self.dim + (1 - mixing) * self.choi
            return float(scla.eigvalsh(mixed)[0])
        # the depolarising part is a multiple of the identity: it shifts the spectrum
        return float(mixing / self.dim + (1 - mixing) * self.lam)


def _bisect_mixing(min_eig) -> float:
    if min_eig(0.0) >= 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(BISECTION_STEPS):
        mid = (lo + hi) / 2
        if min_eig(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


@functools.lru_cache(maxsize=None)
def transpose_spa(d: int) -> SpaMap:
    # SpaMap is immutable, so one instance per dimension is shared
    return SpaMap.build(PositiveMapSpec.transpose(d))


# --------------------------------------------------------------------------- #
# Tests
# --------------------------------------------------------------------------- #

def ppt_test(rho: DensityOp) -> DetectionVerdict:
    if len(rho.dims) != 2:
        raise ValueError(f"PPT test needs a bipartite state, got dims {rho.dims}")
    low = min_eigenvalue(partial_transpose(rho.matrix, rho.dims))
    return DetectionVerdict(_verdict(low >= -EIG_TOL), "ppt", low, 0.0)


def purity_test(psi: PureState) -> DetectionVerdict:
    """Entangled iff the reduced state of the second subsystem is mixed."""
    p = purity(reduced_state(psi, ANSWER))
    return DetectionVerdict(_verdict(p >= 1.0 - EIG_TOL), "purity", p, 1.0)


def analytic_test(f: Formula, lo: int, hi: int, cap: int = ENUMERATION_CAP) -> DetectionVerdict:
    if f.n > cap:
        raise CapExceededError(f"n={f.n} exceeds enumeration cap {cap}")
    k = count_solutions(f, lo, hi).k
    separable = k == 0 or k == (1 << f.n)
    return DetectionVerdict(_verdict(separable), "analytic", float(k), None, extra={"k": k})


def spa_test_exact(rho: DensityOp, spa: SpaMap) -> DetectionVerdict:
    out = spa.apply(rho)
    low = min_eigenvalue(out.matrix)
    return DetectionVerdict(_verdict(low >= spa.threshold - EIG_TOL), "spa-exact", low, spa.threshold)


@dataclass(frozen=True)
class CopyEstimatorConfig:
    copies: int
    seed: int = 0
    repetitions: int = 1

    def __post_init__(self):
        if self.copies < 1:
            raise ValueError("need at least one copy")
        if self.repetitions < 1 or self.repetitions % 2 == 0:
            raise ValueError("repetitions must be a positive odd number")


def _spectrum_probs(rho_prime) -> np.ndarray:
    mat = rho_prime.matrix if isinstance(rho_prime, DensityOp) else np.asarray(rho_prime)
    probs = np.clip(scla.eigvalsh(mat), 0.0, None)
    return probs / probs.sum()


def _sample_min(probs: np.ndarray, copies: int, seed: int) -> float:
    counts = np.random.default_rng(seed).multinomial(copies, probs)
    return counts.min() / copies


def estimate_min_eigenvalue(rho_prime, cfg: CopyEstimatorConfig) -> float:
    """Smallest empirical eigenvalue from ``cfg.copies`` simulated copies.

    Each copy yields one outcome drawn from the spectral distribution of
    ``rho_prime``; the estimate is the smallest relative frequency over the
    eigenvalue bins.  Uses ``cfg.seed`` only (repetitions are handled by
    :func:`spa_test_estimated`).
    """
    if cfg.copies < 1:
        raise ValueError("need at least one copy")
    return _sample_min(_spectrum_probs(rho_prime), cfg.copies, cfg.seed)


def estimator_error_bound(copies: int, eps: float, dim: int) -> float:
    """Hoeffding + union bound on ``P(|estimate - λ_min| > eps)``.

    ``|min_i f_i - min_i p_i| <= max_i |f_i - p_i|`` and every bin frequency
    concentrates as ``2 exp(-2 N eps²)``.
    """
    return min(1.0, 2.0 * dim * math.exp(-2.0 * copies * eps * eps))


def spa_test_estimated(rho: DensityOp, spa: SpaMap, cfg: CopyEstimatorConfig) -> DetectionVerdict:
    probs = _spectrum_probs(spa.apply(rho))
    estimates = [_sample_min(probs, cfg.copies, cfg.seed + i) for i in range(cfg.repetitions)]
    votes = sum(e >= spa.threshold - EIG_TOL for e in estimates)
    separable = 2 * votes > cfg.repetitions
    return DetectionVerdict(
        _verdict(separable),
        "spa-estimated",
        float(np.median(estimates)),
        spa.threshold,
        copies=cfg.copies * cfg.repetitions,
        extra={"separable_votes": int(votes), "repetitions": cfg.repetitions},
    )
