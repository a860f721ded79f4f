import numpy as np
import pytest

from entsearch.entdetect import (
    CopyEstimatorConfig,
    PositiveMapSpec,
    SpaMap,
    analytic_test,
    choi_state,
    estimate_min_eigenvalue,
    estimator_error_bound,
    identity_superop,
    partial_transpose,
    ppt_test,
    purity_test,
    spa_test_estimated,
    spa_test_exact,
    spa_threshold,
    transpose_spa,
    transpose_superop,
)
from entsearch.errors import CapExceededError
from entsearch.formula import parse_expr
from entsearch.oracle import post_oracle_state
from entsearch.qsim import (
    DensityOp,
    RegisterLayout,
    basis_state,
    bell_state,
    density_from_state,
    depolarize,
)


# --------------------------------------------------------------------------- #
# independent oracles: explicit Kronecker sums and numpy.linalg
# --------------------------------------------------------------------------- #

def unit(i, d):
    e = np.zeros((d, d))
    e[i // d, i % d] = 1
    return e


def oracle_choi(d, lam):
    """(1/d²) Σ_{ij} E_ij ⊗ (I ⊗ Λ)(E_ij) for the d²⊗d² probe, written as loops."""
    D = d * d
    out = np.zeros((D * D, D * D), dtype=complex)
    for i in range(D):
        for j in range(D):
            eij = np.zeros((D, D))
            eij[i, j] = 1
            # (I_d ⊗ Λ) on the D-dimensional block
            blk = np.zeros((D, D), dtype=complex)
            for a in range(d):
                for b in range(d):
                    sub = eij[a * d:(a + 1) * d, b * d:(b + 1) * d]
                    ea = np.zeros((d, d))
                    ea[a, b] = 1
                    blk += np.kron(ea, lam(sub))
            out += np.kron(eij, blk) / D
    return out


def oracle_partial_transpose(rho, d):
    out = np.zeros_like(rho)
    for a in range(d):
        for b in range(d):
            out[a * d:(a + 1) * d, b * d:(b + 1) * d] = rho[a * d:(a + 1) * d, b * d:(b + 1) * d].T
    return out


def random_mixture(rng, d=2, terms=None):
    terms = terms or int(rng.integers(1, 5))
    w = rng.dirichlet(np.ones(terms))
    rho = np.zeros((d * d, d * d), dtype=complex)
    for wi in w:
        v = rng.normal(size=d * d) + 1j * rng.normal(size=d * d)
        v /= np.linalg.norm(v)
        rho += wi * np.outer(v, v.conj())
    return DensityOp(rho, (d, d))


# --------------------------------------------------------------------------- #

def test_choi_matches_oracle():
    for d in (2, 3):
        got = choi_state(PositiveMapSpec.transpose(d), d).matrix
        assert np.allclose(got, oracle_choi(d, lambda x: x.T), atol=1e-14)


def test_choi_lambda_d2():
    lam_oracle = np.linalg.eigvalsh(oracle_choi(2, lambda x: x.T))[0]
    assert abs(lam_oracle + 0.5) < 1e-10
    assert abs(transpose_spa(2).lam - lam_oracle) < 1e-10


def test_identity_map_choi_psd():
    rho = choi_state(identity_superop(2), 2)
    assert np.linalg.eigvalsh(rho.matrix)[0] >= -1e-12
    assert abs(np.trace(rho.matrix) - 1) < 1e-12


def test_choi_cap():
    with pytest.raises(CapExceededError):
        choi_state(PositiveMapSpec.transpose(9), 9)


@pytest.mark.parametrize("d", [2, 3, 4, 8])
def test_lambda_is_minus_one_over_d(d):
    assert abs(transpose_spa(d).lam + 1 / d) < 1e-10


def test_threshold_expression():
    # d²|λ| / (d⁴|λ| + 1): 2/9 at d = 2, evaluated from the stored λ
    spa = transpose_spa(2)
    assert spa.threshold == spa_threshold(spa.lam, 2)
    assert abs(spa.threshold - 2 / 9) < 1e-12
    assert spa.threshold <= 1 / 4          # cannot exceed the largest possible minimum eigenvalue


@pytest.mark.parametrize("d", [2, 3])
def test_mixing_weight_minimal(d):
    spa = transpose_spa(d)
    mixed = lambda p: np.linalg.eigvalsh(
        p * np.eye(d ** 4) / d ** 4 + (1 - p) * oracle_choi(d, lambda x: x.T))[0]
    assert mixed(spa.mixing) >= -1e-10
    assert mixed(spa.mixing * (1 - 1e-3)) < -1e-10
    assert spa.choi_min_eigenvalue(spa.mixing) >= -1e-10
    # threshold coincides with the depolarising weight spread over the output
    assert abs(spa.threshold - spa.mixing / d ** 2) < 1e-12


def test_positive_map_validation():
    with pytest.raises(ValueError, match="completely positive"):
        PositiveMapSpec.custom(identity_superop(2), 2)
    with pytest.raises(ValueError):
        PositiveMapSpec.custom(-transpose_superop(2), 2)
    assert PositiveMapSpec.custom(transpose_superop(2), 2).choi_min_eigenvalue() < 0


def test_ppt_examples():
    v = ppt_test(density_from_state(bell_state()))
    assert v.entangled and abs(v.statistic + 0.5) < 1e-12
    assert abs(np.linalg.eigvalsh(oracle_partial_transpose(density_from_state(bell_state()).matrix, 2))[0]
               + 0.5) < 1e-12
    assert ppt_test(density_from_state(basis_state(1, (2, 2)))).separable
    with pytest.raises(ValueError):
        ppt_test(DensityOp(np.eye(4) / 4))


def test_partial_transpose_matches_oracle():
    rng = np.random.default_rng(0)
    rho = random_mixture(rng).matrix
    assert np.allclose(partial_transpose(rho, (2, 2)), oracle_partial_transpose(rho, 2))


def test_spa_exact_examples():
    spa = transpose_spa(2)
    assert spa_test_exact(DensityOp(np.eye(4) / 4, (2, 2)), spa).separable
    v = spa_test_exact(density_from_state(bell_state()), spa)
    assert v.entangled and abs(v.statistic - 1 / 6) < 1e-12
    f = parse_expr("x1 & !x1")
    rho = density_from_state(post_oracle_state(f, 0, 1, RegisterLayout.dxd(1)))
    assert spa_test_exact(rho, spa).separable == analytic_test(f, 0, 1).separable is True
    with pytest.raises(ValueError):
        spa_test_exact(DensityOp(np.eye(8) / 8, (2, 4)), spa)


def test_spa_agrees_with_ppt_on_mixtures():
    rng = np.random.default_rng(17)
    spa = transpose_spa(2)
    for _ in range(300):
        rho = random_mixture(rng)
        assert spa_test_exact(rho, spa).verdict == ppt_test(rho).verdict


def test_routes_agree_on_n1_states():
    spa = transpose_spa(2)
    for expr in ("x1", "!x1", "x1 | !x1", "x1 & !x1"):
        f = parse_expr(expr, n=1)
        for lo, hi in ((0, 0), (1, 1), (0, 1)):
            psi = post_oracle_state(f, lo, hi, RegisterLayout.dxd(1))
            rho = density_from_state(psi)
            verdicts = {analytic_test(f, lo, hi).verdict, ppt_test(rho).verdict,
                        spa_test_exact(rho, spa).verdict, purity_test(psi).verdict}
            assert len(verdicts) == 1, (expr, lo, hi, verdicts)


def test_analytic_examples(sample):
    v = analytic_test(sample, 0, 7)
    assert v.entangled and v.extra["k"] == 5
    assert analytic_test(sample, 0, 0).separable
    assert analytic_test(parse_expr("x1 | !x1"), 0, 1).separable
    with pytest.raises(CapExceededError):
        analytic_test(sample, 0, 7, cap=2)


def test_purity_test_reports_statistic(sample):
    psi = post_oracle_state(sample, 0, 7, RegisterLayout.minimal(3))
    v = purity_test(psi)
    assert v.entangled and abs(v.statistic - ((3 / 8) ** 2 + (5 / 8) ** 2)) < 1e-12


def test_verdict_fields_populated():
    rho = density_from_state(bell_state())
    spa = transpose_spa(2)
    for v in (ppt_test(rho), spa_test_exact(rho, spa),
              spa_test_estimated(rho, spa, CopyEstimatorConfig(64))):
        assert v.statistic is not None and v.threshold is not None


# --------------------------------------------------------------------------- #
# estimator
# --------------------------------------------------------------------------- #

def test_estimator_config_validation():
    with pytest.raises(ValueError):
        CopyEstimatorConfig(0)
    with pytest.raises(ValueError):
        CopyEstimatorConfig(10, repetitions=2)


def test_estimator_deterministic_spectrum():
    for n in (1, 7, 1000):
        assert estimate_min_eigenvalue(np.diag([1.0, 0.0]), CopyEstimatorConfig(n)) <= 1 / n


def test_estimator_half():
    est = estimate_min_eigenvalue(np.eye(2) / 2, CopyEstimatorConfig(4096, seed=3))
    assert abs(est - 0.5) < 0.05


def test_estimator_converges():
    rho = np.diag([0.6, 0.3, 0.1])
    assert abs(estimate_min_eigenvalue(rho, CopyEstimatorConfig(1 << 20, seed=1)) - 0.1) < 1e-2


def test_estimator_error_shrinks_with_copies():
    rho = np.diag([0.9, 0.1])
    errs = []
    for e in range(4, 15):
        ests = [estimate_min_eigenvalue(rho, CopyEstimatorConfig(1 << e, seed=s)) for s in range(200)]
        errs.append(np.median(np.abs(np.array(ests) - 0.1)))
    assert all(b <= a for a, b in zip(errs, errs[1:])), errs


def test_error_bound_decays():
    b = [estimator_error_bound(n, 0.05, 4) for n in (100, 1000, 10000)]
    assert b[0] == 1.0 and b[1] > b[2] and b[2] < 1e-20


def test_spa_estimated_bell():
    spa = transpose_spa(2)
    rho = density_from_state(bell_state())
    v = spa_test_estimated(rho, spa, CopyEstimatorConfig(1 << 14, seed=7, repetitions=5))
    assert v.entangled and v.copies == 5 * (1 << 14)
    agree = sum(spa_test_estimated(rho, spa, CopyEstimatorConfig(1 << 14, seed=s, repetitions=5)).entangled
                for s in range(100))
    assert agree >= 95


def test_spa_estimated_reproducible():
    spa = transpose_spa(2)
    rho = depolarize(density_from_state(bell_state()), 0.5)
    cfg = CopyEstimatorConfig(512, seed=11, repetitions=3)
    assert spa_test_estimated(rho, spa, cfg) == spa_test_estimated(rho, spa, cfg)


def test_single_copy_near_threshold_disagrees():
    spa = transpose_spa(2)
    # depolarised Bell state just on the separable side of the PPT boundary
    rho = depolarize(density_from_state(bell_state()), 0.7)
    exact = spa_test_exact(rho, spa)
    assert exact.separable and exact.statistic - exact.threshold < 0.01
    verdicts = [spa_test_estimated(rho, spa, CopyEstimatorConfig(1, seed=s)).verdict for s in range(200)]
    error_rate = np.mean([v != exact.verdict for v in verdicts])
    # one copy never occupies all four eigenvalue bins, so the estimate is 0
    assert error_rate > 0


def test_large_gap_matches_exact():
    spa = transpose_spa(2)
    for rho in (density_from_state(bell_state()), DensityOp(np.eye(4) / 4, (2, 2))):
        cfg = CopyEstimatorConfig(1 << 16, seed=2, repetitions=3)
        assert spa_test_estimated(rho, spa, cfg).verdict == spa_test_exact(rho, spa).verdict
