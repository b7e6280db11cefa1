"""Banded Toeplitz matrices and their determinant/trace identities.

Builders for T_N and its z-shifted and band-shifted variants, the bidiagonal
factorization check, exact word traces of mixed shift products, moment
integrals against the symbol curve, and the closed-form determinant as a sum
over root subsets (computed in log space so growth rates stay readable at
any N).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .linalg import LOG_SINGULAR, LogDet
from .symbol import Symbol, char_poly_coeffs, root_profile

__all__ = [
    "ShiftSpec",
    "build",
    "build_z",
    "build_shifted",
    "bidiagonal_factor_check",
    "trace_word",
    "moment_lhs",
    "moment_rhs",
    "widom_sum",
]


@dataclass(frozen=True)
class ShiftSpec:
    """Band split (dbar1, dbar2) with dbar1 + dbar2 equal to the symbol degree."""

    dbar1: int
    dbar2: int

    def __post_init__(self):
        if self.dbar1 < 0 or self.dbar2 < 0:
            raise ValueError("band widths must be nonnegative")

    def validate_for(self, s: Symbol) -> None:
        if self.dbar1 + self.dbar2 != s.d:
            raise ValueError(
                f"shift spec ({self.dbar1}, {self.dbar2}) does not split "
                f"the symbol degree {s.d}"
            )


def _fill_diagonal(t: np.ndarray, offset: int, value: complex) -> None:
    n = t.shape[0]
    if value == 0 or abs(offset) >= n:
        return
    if offset >= 0:
        idx = np.arange(n - offset)
        t[idx, idx + offset] = value
    else:
        idx = np.arange(n + offset)
        t[idx - offset, idx] = value


def build(s: Symbol, n: int) -> np.ndarray:
    """T_N with entries (T)_{i,j} = a_{j-i}."""
    if n < 1:
        raise ValueError("matrix size must be >= 1")
    t = np.zeros((n, n), dtype=complex)
    for k in range(-s.d2, s.d1 + 1):
        _fill_diagonal(t, k, s.coeff(k))
    return t


def build_z(s: Symbol, z: complex, n: int) -> np.ndarray:
    """T_N(z) = T_N - z Id."""
    t = build(s, n)
    idx = np.arange(n)
    t[idx, idx] -= z
    return t


def build_shifted(s: Symbol, z: complex, spec: ShiftSpec, n: int) -> np.ndarray:
    """Band-shifted variant: entry (i, j) = a'_{(j-i)+(d1-dbar1)} on the band
    -dbar2 <= j-i <= dbar1, where a'_k = a_k - z [k=0]."""
    spec.validate_for(s)
    if n < 1:
        raise ValueError("matrix size must be >= 1")
    ap = char_poly_coeffs(s, z)
    off = s.d1 - spec.dbar1
    t = np.zeros((n, n), dtype=complex)
    for delta in range(-spec.dbar2, spec.dbar1 + 1):
        t_idx = delta + off + s.d2
        _fill_diagonal(t, delta, ap[t_idx])
    return t


def bidiagonal_factor_check(s: Symbol, z: complex, n: int) -> float:
    """Max-entry defect of the bidiagonal factorization of the fully
    upper-shifted matrix of size N + d2:

        T_{N+d2}(z; d, 0) = a'_{d1} * prod_l (J + lam_l Id).

    Returns the maximum absolute entrywise difference (0 up to roundoff)."""
    prof = root_profile(s, z)
    m = n + s.d2
    lead = char_poly_coeffs(s, z)[-1]
    prod = np.eye(m, dtype=complex) * lead
    for lam in prof.roots:
        shifted = np.zeros_like(prod)
        shifted[:, 1:] = prod[:, :-1]
        prod = lam * prod + shifted
    target = build_shifted(s, z, ShiftSpec(s.d, 0), m)
    return float(np.max(np.abs(prod - target)))


def trace_word(ms, ns, n: int) -> int:
    """Exact trace of prod_t J^{m_t} (J*)^{n_t} on C^N.

    The product of shifts maps e_i to e_{i + total} when every intermediate
    index stays inside [0, N); counting surviving basis vectors reduces to
    the running prefix-shift extrema.  Unbalanced words trace to zero.
    """
    ms = [int(v) for v in ms]
    ns = [int(v) for v in ns]
    if len(ms) != len(ns):
        raise ValueError("exponent lists must have equal length")
    if any(v < 0 for v in ms + ns):
        raise ValueError("exponents must be nonnegative")
    if any(v > n for v in ms + ns):
        raise ValueError("exponents must not exceed the matrix size")
    shift = 0
    lo = 0
    hi = 0
    for m_t, n_t in reversed(list(zip(ms, ns))):
        shift += n_t
        hi = max(hi, shift)
        shift -= m_t
        lo = min(lo, shift)
    if shift != 0:
        return 0
    return max(0, n - hi + lo)


def moment_lhs(s: Symbol, z: complex, k: int, n: int) -> float:
    """(1/N) tr ((z Id - T_N)^k ((z Id - T_N)*)^k) computed densely.

    The adjoint factor is the conjugate transpose of the power, so the trace
    is just the squared Frobenius norm of (z Id - T_N)^k.  For the pure
    shift symbol a = lam at z = 0 this gives exactly (N - k)/N.
    """
    if k < 1:
        raise ValueError("moment order must be >= 1")
    m = -build_z(s, z, n)
    p = m
    for _ in range(k - 1):
        p = p @ m
    return float(np.vdot(p, p).real) / n


def moment_rhs(s: Symbol, z: complex, k: int, nodes: int = 2**14) -> float:
    """Circle average of |z - a|^{2k} by the periodic trapezoid rule,
    which is spectrally accurate for this smooth integrand."""
    if k < 1:
        raise ValueError("moment order must be >= 1")
    if nodes < 8:
        raise ValueError("need at least 8 quadrature nodes")
    theta = np.arange(nodes) * (2.0 * np.pi / nodes)
    vals = np.abs(z - s.eval_many(np.exp(1j * theta))) ** (2 * k)
    return float(vals.mean())


def widom_sum(s: Symbol, z: complex, n: int) -> LogDet:
    """det T_N(z) as the closed-form sum over d1-subsets of the roots,

        sum_I C_I a'_{d1}^N prod_{l in I} lam_l^N,
        C_I = prod_{j in I, k not in I} lam_j / (lam_j - lam_k),

    evaluated in log space (complex log-sum-exp) so the result is usable at
    sizes where the determinant itself would overflow.  Requires distinct
    roots; z too close to a root collision is rejected.
    """
    prof = root_profile(s, z)
    if prof.near_double:
        raise ValueError(
            "root pair too close for the subset formula at this z; "
            "perturb z or use an LU factorization"
        )
    lam = np.array(prof.roots, dtype=complex)
    d = s.d
    lead = complex(char_poly_coeffs(s, z)[-1])
    base = n * cmath.log(lead)
    log_terms: list[complex] = []
    for subset in combinations(range(d), s.d1):
        inside = set(subset)
        if any(lam[j] == 0 for j in subset):
            continue  # a zero root inside the subset kills the term exactly
        coef = 1.0 + 0j
        for j in subset:
            for k in range(d):
                if k not in inside:
                    coef *= lam[j] / (lam[j] - lam[k])
        if coef == 0:
            continue
        logt = base + cmath.log(coef)
        for j in subset:
            logt += n * cmath.log(lam[j])
        log_terms.append(logt)
    if not log_terms:
        return LogDet(LOG_SINGULAR, 1.0 + 0j, True)
    mx = max(t.real for t in log_terms)
    total = 0j
    for t in log_terms:
        total += cmath.exp(t - mx)
    mag = abs(total)
    if mag == 0.0:
        return LogDet(LOG_SINGULAR, 1.0 + 0j, True)
    return LogDet(mx + math.log(mag), total / mag, False)
