import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from conftest import hermite_function_oracle
from sgpe.errors import ConfigurationError, ContractError
from sgpe.hermite import eigenvalues, sigma_norm_sq
from sgpe.operators import (
    BandedOperator,
    CNSystem,
    OperatorKind,
    apply_A,
    apply_banded,
    bk_coefficients,
    build_BK_smooth,
    build_x2_truncated,
    check_assumptions,
    solve_cn_system,
)


def unit(K, k):
    e = np.zeros(K, dtype=complex)
    e[k] = 1
    return e


def test_apply_A_examples():
    np.testing.assert_array_equal(apply_A(unit(8, 0)), unit(8, 0))
    np.testing.assert_array_equal(apply_A(unit(8, 5)), 11 * unit(8, 5))
    np.testing.assert_array_equal(apply_A(np.zeros(8)), np.zeros(8))


def test_x2_on_e0():
    y = apply_banded(build_x2_truncated(3), unit(3, 0))
    np.testing.assert_allclose(y, [0.5, 0, math.sqrt(2) / 2], atol=1e-14, rtol=0)


def test_x2_scalar_case():
    op = build_x2_truncated(1)
    np.testing.assert_array_equal(op.diag0, [0.5])
    assert op.diag2.size == 0


def test_x2_entries_against_quadrature():
    # <x^2 e_m, e_n> by adaptive integration of the explicit Hermite functions
    op = build_x2_truncated(8).to_dense()
    for m in range(8):
        for n in range(m, min(m + 3, 8)):
            ref, _ = quad(lambda x: x * x * hermite_function_oracle(m, x) * hermite_function_oracle(n, x),
                          -np.inf, np.inf, epsabs=1e-13)
            assert abs(op[m, n] - ref) < 1e-10


@pytest.mark.parametrize("builder", [build_x2_truncated, lambda K: build_BK_smooth(K, 0.7)])
def test_dense_is_symmetric(builder):
    D = builder(30).to_dense()
    np.testing.assert_array_equal(D, D.T)


def test_bk_low_modes_match_x2_exactly():
    K, theta = 50, 0.8
    B = build_BK_smooth(K, theta).to_dense()
    X = build_x2_truncated(K).to_dense()
    top = int(math.floor(theta * K)) - 2
    np.testing.assert_array_equal(B[: top + 1, : top + 1], X[: top + 1, : top + 1])


def test_bk_coefficient_branches():
    K, theta = 20, 0.8
    m = np.arange(0, 30)
    alpha, beta = bk_coefficients(K, theta, m)
    low = m <= theta * K
    np.testing.assert_array_equal(beta[low], (2 * m[low] + 1) / 2)
    assert np.all(alpha[m > K] == 0) and np.all(beta[m > K] == 0)
    # the ramp reaches zero at m = K
    assert alpha[K] == 0 and beta[K] == 0
    cut = int(theta * K)
    assert beta[cut + 1] == pytest.approx(beta[cut] * (1 - 1 / (K - cut)))


def test_bk_theta_validation():
    for theta in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ConfigurationError):
            build_BK_smooth(10, theta)
    with pytest.raises(ConfigurationError):
        build_BK_smooth(1, 0.5)


def test_banded_operator_validation():
    with pytest.raises(ContractError):
        BandedOperator(4, np.ones(3), np.ones(2), OperatorKind.CUSTOM)
    with pytest.raises(ContractError):
        BandedOperator(4, np.ones(4), np.array([1.0, np.nan]), OperatorKind.CUSTOM)


def test_identity_like_operator(rng):
    op = BandedOperator(6, np.ones(6), np.zeros(4), OperatorKind.CUSTOM)
    c = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    np.testing.assert_array_equal(apply_banded(op, c), c)


def test_apply_banded_dimension_check():
    with pytest.raises(ContractError):
        apply_banded(build_x2_truncated(5), np.zeros(4))


def test_apply_matches_dense(rng):
    op = build_x2_truncated(40)
    c = rng.standard_normal(40) + 1j * rng.standard_normal(40)
    np.testing.assert_allclose(apply_banded(op, c), op.to_dense() @ c, atol=1e-13, rtol=0)
    np.testing.assert_allclose(op @ c, op.to_dense() @ c, atol=1e-13, rtol=0)


@given(st.floats(-10, 10), st.floats(-10, 10), st.integers(0, 2**32 - 1))
def test_apply_banded_linear(a, b, seed):
    rng = np.random.default_rng(seed)
    op = build_BK_smooth(24, 0.8)
    u = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    v = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    lhs = apply_banded(op, a * u + b * v)
    rhs = a * apply_banded(op, u) + b * apply_banded(op, v)
    assert np.max(np.abs(lhs - rhs)) < 1e-13 * (1 + abs(a) + abs(b)) * 50


def test_solve_zero_noise_is_diagonal():
    dt = 0.37
    for k in (0, 3, 9):
        phi = solve_cn_system(dt, 0.0, build_x2_truncated(10), unit(10, k))
        np.testing.assert_allclose(phi, unit(10, k) / (1 + 1j * dt * (2 * k + 1) / 2), atol=1e-15)


def test_solve_scalar_system():
    dt, chi = 0.01, 1.7
    phi = solve_cn_system(dt, chi, build_x2_truncated(1), np.array([2.0 + 1j]))
    expect = (2.0 + 1j) / (1 + 1j * (dt / 2 + math.sqrt(dt) * chi / 4))
    np.testing.assert_allclose(phi, [expect], rtol=1e-15)


def test_solve_residual(rng):
    K = 64
    sys_ = CNSystem(2.0**-6, 0.125 * 2.3, build_x2_truncated(K))
    rhs = rng.standard_normal(K) + 1j * rng.standard_normal(K)
    phi = sys_.solve(rhs)
    assert np.linalg.norm(sys_.apply_D(phi) - rhs) <= 1e-12 * np.linalg.norm(rhs)
    with pytest.raises(ContractError):
        sys_.solve(np.zeros(K - 1))


@pytest.mark.parametrize("builder", [build_x2_truncated, build_BK_smooth])
def test_cayley_transform_is_unitary(builder, rng):
    K = 80
    sys_ = CNSystem(2.0**-5, 0.4, builder(K))
    phi = rng.standard_normal(K) + 1j * rng.standard_normal(K)
    psi = sys_.solve(2 * phi - sys_.apply_D(phi))
    assert abs(np.linalg.norm(psi) - np.linalg.norm(phi)) < 1e-11 * np.linalg.norm(phi)
    np.testing.assert_allclose(sys_.apply_C(phi), 2 * phi - sys_.apply_D(phi), atol=1e-14)


def _growth_constant(B, j):
    """C(j) with |Im<[A^j,B]w,w>| / 4 <= C(j)/2 ||w||^2_j, computed exactly for the matrix."""
    K = B.K
    lam = eigenvalues(K) ** j
    Bd = B.to_dense()
    comm = lam[:, None] * Bd - Bd * lam[None, :]
    H = 1j * comm  # Hermitian since comm is real antisymmetric
    s = lam ** -0.5
    c = np.max(np.abs(np.linalg.eigvalsh(s[:, None] * H * s[None, :])))
    return c / 2


@pytest.mark.parametrize("K,j", [(16, 1), (48, 1), (32, 2)])
def test_cn_linear_step_growth_bounded_below_truncation(K, j, rng):
    # with sqrt(dt)|chi| < 1/(3 C(j)) one linear step at most doubles the Sigma^j norm
    B = build_x2_truncated(K)
    C = _growth_constant(B, j)
    C0 = 1.0 / (3.0 * C)
    dt = 2.0**-8
    for chi in (0.999 * C0 / math.sqrt(dt), -0.999 * C0 / math.sqrt(dt)):
        sys_ = CNSystem(dt, math.sqrt(dt) * chi, B)
        worst = 0.0
        for _ in range(20):
            phi = rng.standard_normal(K) + 1j * rng.standard_normal(K)
            phi /= np.sqrt(eigenvalues(K)) ** j
            psi = sys_.solve(sys_.apply_C(phi))
            worst = max(worst, sigma_norm_sq(psi, j) / sigma_norm_sq(phi, j))
        # the top mode is where the noise term acts most strongly
        psi = sys_.solve(sys_.apply_C(unit(K, K - 1)))
        worst = max(worst, sigma_norm_sq(psi, j) / sigma_norm_sq(unit(K, K - 1), j))
        assert worst <= 2.0


def test_assumption_report_smoothed_cutoff():
    rep = check_assumptions([8, 16, 32, 64], theta=0.8, j=1)
    assert rep.ok
    assert max(rep.values["symmetry"]) < 1e-12
    top = np.array(rep.values["top_mode_growth"]) / np.array(rep.K_list)
    assert np.all(top <= 2 * top[0])
    defect = rep.values["x2_defect"]
    assert all(b < a for a, b in zip(defect, defect[1:]))
    assert "commutator_form" not in rep.flags
    lines = list(rep.lines())
    assert len(lines) == len(rep.values)


def test_assumption_report_flags_growth():
    # a deliberately bad family whose bounded norm grows like K^2
    def bad(K):
        return BandedOperator(K, (np.arange(K) + 1.0) ** 3, np.zeros(K - 2), OperatorKind.CUSTOM)

    rep = check_assumptions([8, 16, 32, 64], builder=bad)
    assert not rep.ok
    assert rep.flags["norm_sigma_j+2_to_j"]


def test_assumption_rejects_small_K():
    with pytest.raises(ConfigurationError):
        check_assumptions([2, 8])
