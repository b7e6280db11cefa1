"""Determinant expansion terms against brute-force dense oracles."""

from itertools import combinations

import numpy as np
import pytest

from conftest import random_complex
from toepspec import (
    anti_conc_experiment,
    bidiag_subdet,
    build_z,
    corner_delta,
    corner_pk,
    det_sum_decomposition,
    dominance_report,
    lu_det,
    perm_sign,
)


# ---------------------------------------------------------------------------
# Permutation signs


def permutation_matrix_sign(x, n):
    order = list(x) + [i for i in range(n) if i not in set(x)]
    p = np.zeros((n, n))
    p[np.arange(n), order] = 1.0
    return int(round(np.linalg.det(p)))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_perm_sign_exhaustive(n):
    for k in range(n + 1):
        for x in combinations(range(n), k):
            assert perm_sign(x, n) == permutation_matrix_sign(x, n)


def test_perm_sign_validation():
    with pytest.raises(ValueError):
        perm_sign((1, 1), 4)
    with pytest.raises(ValueError):
        perm_sign((4,), 4)


# ---------------------------------------------------------------------------
# det(A + B) decomposition


def test_det_sum_random_sparse(rng):
    for _ in range(30):
        n = int(rng.integers(1, 7))
        a = random_complex(rng, n)
        b = random_complex(rng, n) * (rng.random((n, n)) < 0.4)
        got = det_sum_decomposition(a, b)
        want = np.linalg.det(a + b)
        assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


def test_det_sum_dense_and_trivial(rng):
    a = random_complex(rng, 4)
    b = random_complex(rng, 4)
    assert det_sum_decomposition(a, b) == pytest.approx(np.linalg.det(a + b), rel=1e-9)
    assert det_sum_decomposition(a, np.zeros((4, 4))) == pytest.approx(
        np.linalg.det(a), rel=1e-9
    )


def test_det_sum_guard(rng):
    a = random_complex(rng, 13)
    with pytest.raises(ValueError):
        det_sum_decomposition(a, a)
    with pytest.raises(ValueError):
        det_sum_decomposition(random_complex(rng, 3), random_complex(rng, 4))


# ---------------------------------------------------------------------------
# Bidiagonal sub-determinants


def dense_bidiag_minor(zfrak, x, y, n):
    b = zfrak * np.eye(n, dtype=complex) + np.diag(np.ones(n - 1, complex), 1)
    keep_r = [i for i in range(n) if i not in set(x)]
    keep_c = [j for j in range(n) if j not in set(y)]
    sub = b[np.ix_(keep_r, keep_c)]
    return np.linalg.det(sub) if sub.size else 1.0 + 0j


@pytest.mark.parametrize("zfrak", [1.3 - 0.7j, 2.0, 0.0])
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_bidiag_subdet_exhaustive(zfrak, n):
    for k in range(n + 1):
        for x in combinations(range(n), k):
            for y in combinations(range(n), k):
                got = bidiag_subdet(zfrak, x, y, n)
                want = dense_bidiag_minor(zfrak, x, y, n)
                assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


def test_bidiag_subdet_validation():
    with pytest.raises(ValueError):
        bidiag_subdet(1.0, (0, 1), (0,), 4)
    with pytest.raises(ValueError):
        bidiag_subdet(1.0, (0, 0), (0, 1), 4)
    with pytest.raises(ValueError):
        bidiag_subdet(1.0, (4,), (0,), 4)


# ---------------------------------------------------------------------------
# Expansion terms P_k


def test_corner_pk_p0_is_determinant(quad):
    z = 1.0
    delta = corner_delta(quad, 10, 3.0, seed=3)
    assert corner_pk(quad, z, delta, 0) == pytest.approx(
        lu_det(build_z(quad, z, 10)), rel=1e-12
    )


def test_corner_pk_sums_to_full_determinant(quad):
    # The terms of the expansion must re-assemble det(T_N(z) + Delta).
    n, z = 10, 1.0
    delta = corner_delta(quad, n, 3.0, seed=4)
    total = sum(corner_pk(quad, z, delta, k) for k in range(quad.d + 1))
    want = lu_det(build_z(quad, z, n) + delta)
    assert abs(total - want) <= 1e-9 * abs(want)


def test_corner_pk_sums_generic_sparse(quad, rng):
    # Same identity for an arbitrary sparse perturbation (not corner-shaped).
    n, z = 8, -0.4 + 0.9j
    delta = np.zeros((n, n), complex)
    idx = rng.integers(0, n, size=(3, 2))
    for i, j in idx:
        delta[i, j] = complex(rng.standard_normal(), rng.standard_normal())
    rank_cap = min(
        len({i for i, _ in idx}), len({j for _, j in idx})
    )
    total = sum(corner_pk(quad, z, delta, k) for k in range(rank_cap + 1))
    want = lu_det(build_z(quad, z, n) + delta)
    assert abs(total - want) <= 1e-9 * max(1.0, abs(want))


def test_corner_pk_vanishes_beyond_support_rank(quad):
    delta = corner_delta(quad, 12, 3.0, seed=5)  # two support rows/columns
    assert corner_pk(quad, 1.0, delta, 3) == 0j
    assert corner_pk(quad, 1.0, delta, 5) == 0j


def test_corner_pk_validation(quad, rng):
    delta = corner_delta(quad, 10, 3.0, seed=6)
    with pytest.raises(ValueError):
        corner_pk(quad, 1.0, delta, -1)
    with pytest.raises(ValueError):
        corner_pk(quad, 1.0, random_complex(rng, 14), 1)  # support too wide


# ---------------------------------------------------------------------------
# Dominance diagnostics


def test_dominance_report_fields(quad):
    delta = corner_delta(quad, 12, 3.0, seed=7)
    rep = dominance_report(quad, 3.0, delta)
    assert rep.n == 12 and rep.dd == 0 and rep.d0 == 2
    assert len(rep.p_values) == quad.d + 1
    assert rep.p_abs == tuple(abs(v) for v in rep.p_values)
    assert rep.log_normalizer == pytest.approx(12 * np.log(3.0), rel=1e-12)
    assert rep.normalized_pd > 0.0
    # Far outside the curve the zeroth term dominates overwhelmingly.
    assert abs(sum(rep.p_values[1:])) / abs(rep.p_values[0]) < 1e-3
    assert rep.ratio_above < 1e-3 and rep.ratio_below == 0.0


def test_dominance_report_middle_region(quad):
    delta = corner_delta(quad, 12, 3.0, seed=8)
    rep = dominance_report(quad, 1.0, delta)
    assert rep.dd == 1
    assert rep.normalized_pd == pytest.approx(
        rep.p_abs[1] / np.exp(rep.log_normalizer), rel=1e-9
    )


def test_dominance_report_rejects_boundary(quad):
    delta = corner_delta(quad, 12, 3.0, seed=9)
    with pytest.raises(ValueError):
        dominance_report(quad, 2.0, delta)


# ---------------------------------------------------------------------------
# Anti-concentration


def test_anti_conc_single_variable_exact_law():
    # Q = U with U uniform on [0,1]: P(|Q| <= eps) = eps exactly.
    table = anti_conc_experiment(
        k=1, n=1, coeffs={(0,): 1.0}, eps_grid=[0.05, 0.1], trials=40000, seed=1
    )
    for row in table.rows:
        assert row.frequency == pytest.approx(row.epsilon, abs=0.01)
        assert row.wilson_low <= row.epsilon <= row.wilson_high
        assert row.frequency <= row.bound


def test_anti_conc_rows_sorted_and_bounded():
    table = anti_conc_experiment(
        k=2,
        n=4,
        coeffs={(0, 1): 1.0, (2, 3): 0.5 - 0.5j},
        eps_grid=[0.1, 0.001, 0.01],
        trials=20000,
        seed=2,
    )
    eps = [row.epsilon for row in table.rows]
    assert eps == sorted(eps)
    assert table.c_star == 1.0
    for row in table.rows:
        assert row.frequency <= row.bound
        assert 0.0 <= row.wilson_low <= row.frequency <= row.wilson_high <= 1.0


def test_anti_conc_validation():
    with pytest.raises(ValueError):
        anti_conc_experiment(1, 2, {(0, 1): 1.0}, [0.1], 10, 0)  # not a 1-set
    with pytest.raises(ValueError):
        anti_conc_experiment(2, 4, {(1, 1): 1.0}, [0.1], 10, 0)  # repeated index
    with pytest.raises(ValueError):
        anti_conc_experiment(1, 1, {(0,): 1.0}, [0.5], 10, 0)  # eps > 1/e
    with pytest.raises(ValueError):
        anti_conc_experiment(1, 1, {(0,): 0.0}, [0.1], 10, 0)  # zero polynomial
