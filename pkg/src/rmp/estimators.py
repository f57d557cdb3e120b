"""Lyapunov exponent and CLT variance estimators.

Three independent routes are provided and cross-checked against each
other:

* Monte Carlo over the scalar cross terms log |a_1 + b_2 c_1 / a_2|
  (pairs for the exponent, non-overlapping triples for the variance),
* exact enumeration over atom pairs/triples for finite-support laws,
* closed forms for the solvable families (uniform / exponential /
  Cauchy rank-one and the binary two-point multiplier).

The variance of the chain is sigma^2 = C_0 + 2 C_1 where C_0, C_1 are
the lag-0 and lag-1 autocovariances of the cross-term sequence (lags
beyond 1 vanish because the sequence is 1-dependent).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .distributions import (
    DistributionSpec,
    EntryTriple,
    enumerate_atoms,
    make_stream,
    sample_triples,
)
from .parallel import chunk_sizes, map_chunks
from .product import NEG_INF, chain_log_norms

# Euler-Mascheroni constant, fixed to 20 digits so closed forms are
# constants rather than estimates.
EULER_GAMMA = 0.57721566490153286061

SAMPLE_CHUNK = 1 << 16
MAX_ATOMS = 64


class NoClosedFormError(ValueError):
    """No closed-form values for this spec's family/parameters."""


@dataclass(frozen=True)
class EstimateResult:
    """Point estimate with provenance.

    std_error is None on exact (non-Monte-Carlo) paths and NaN when the
    estimate degenerated (-inf samples).  minus_inf_events counts
    samples/chains whose cross term vanished exactly.
    """

    value: float
    std_error: float | None
    n_samples: int
    seed: int
    minus_inf_events: int = 0
    wall_time_s: float = 0.0


@dataclass(frozen=True)
class CovarianceLadder:
    """Autocovariances (c0, c1) of the cross-term sequence and the mean.

    sigma2 reconstructs the CLT variance as c0 + 2*c1 (lag >= 2 terms
    are identically zero by 1-dependence).  Standard errors are filled
    on the Monte Carlo path only.
    """

    c0: float
    c1: float
    lam: float
    c0_std_error: float | None = None
    c1_std_error: float | None = None

    @property
    def sigma2(self) -> float:
        return self.c0 + 2.0 * self.c1


def cross_term(xi1: EntryTriple, xi2: EntryTriple) -> float:
    """log |a_1 + b_2 c_1 / a_2|; -inf on exact cancellation."""
    v = xi1.a + xi2.b * xi1.c / xi2.a
    if v == 0.0:
        return NEG_INF
    return math.log(abs(v))


def cross_terms(t1, t2) -> np.ndarray:
    """Vectorized cross terms of two triple batches (a, b, c arrays)."""
    a1, _, c1 = t1
    a2, b2, _ = t2
    with np.errstate(divide="ignore"):
        return np.log(np.abs(a1 + b2 * c1 / a2))


# -- streaming mean/variance merge ----------------------------------------

def _mean(xs: np.ndarray) -> float:
    """Sample mean; exact (not just to rounding) for a constant batch."""
    lo, hi = xs.min(), xs.max()
    if lo == hi:
        return float(lo)
    return float(xs.mean())


def _moments(xs: np.ndarray):
    """(count, mean, sum of squared deviations) of a finite batch."""
    n = xs.size
    if n == 0:
        return 0, 0.0, 0.0
    mean = _mean(xs)
    m2 = float(((xs - mean) ** 2).sum())
    return n, mean, m2


def _merge(a, b):
    na, ma, sa = a
    nb, mb, sb = b
    if na == 0:
        return b
    if nb == 0:
        return a
    n = na + nb
    delta = mb - ma
    return n, ma + delta * nb / n, sa + sb + delta * delta * na * nb / n


def _mean_se(parts):
    """Combine per-chunk (count, mean, M2) into (mean, std error)."""
    n, mean, m2 = (0, 0.0, 0.0)
    for part in parts:
        n, mean, m2 = _merge((n, mean, m2), part)
    if n < 2:
        return mean, float("nan")
    return mean, math.sqrt(m2 / (n - 1)) / math.sqrt(n)


# -- Monte Carlo estimators ------------------------------------------------

def estimate_lambda_mc(
    spec: DistributionSpec, n_samples: int, seed: int = 0, threads: int = 1
) -> EstimateResult:
    """Lyapunov exponent as the mean cross term over independent pairs.

    Each sample draws a fresh pair (xi_1, xi_2); the estimate is the
    sample mean with std error = sample std / sqrt(n).  Any exactly
    cancelled sample makes the value -inf (the event count is
    reported); the mean is then -inf by convention, not an error.
    """
    if n_samples < 2:
        raise ValueError("need n_samples >= 2")
    t0 = time.perf_counter()
    sizes = chunk_sizes(n_samples, SAMPLE_CHUNK)

    def run(k: int):
        gen = make_stream(seed, k)
        m = sizes[k]
        t1 = sample_triples(spec, m, gen)
        t2 = sample_triples(spec, m, gen)
        x = cross_terms(t1, t2)
        neg = np.isneginf(x)
        n_inf = int(neg.sum())
        return (*_moments(x[~neg] if n_inf else x), n_inf)

    parts = map_chunks(run, len(sizes), threads)
    n_inf = sum(p[3] for p in parts)
    mean, se = _mean_se(p[:3] for p in parts)
    if n_inf:
        mean, se = NEG_INF, float("nan")
    return EstimateResult(
        value=mean,
        std_error=se,
        n_samples=n_samples,
        seed=seed,
        minus_inf_events=n_inf,
        wall_time_s=time.perf_counter() - t0,
    )


def estimate_sigma2_mc(
    spec: DistributionSpec, n_samples: int, seed: int = 0, threads: int = 1
):
    """CLT variance from independent non-overlapping triples.

    Each sample draws (xi_1, xi_2, xi_3) and contributes
    x = cross(xi_1, xi_2) and y = cross(xi_2, xi_3); the estimate is

        sigma2 = c0 + 2*c1,   c0 = mean(x^2) - lam^2,
                              c1 = mean(x*y) - lam^2,

    with lam the mean of x from the same run (shared samples reduce the
    variance of the assembled estimate).  Standard errors of sigma2,
    c0, c1 come from a leave-one-out jackknife, which accounts for the
    covariance between the moment estimates.  Returns
    (EstimateResult, CovarianceLadder); if any cross term cancelled
    exactly the variance is undefined (NaN) and the events are counted.
    """
    if n_samples < 2:
        raise ValueError("need n_samples >= 2")
    t0 = time.perf_counter()
    sizes = chunk_sizes(n_samples, SAMPLE_CHUNK)

    def run(k: int):
        gen = make_stream(seed, k)
        m = sizes[k]
        t1 = sample_triples(spec, m, gen)
        t2 = sample_triples(spec, m, gen)
        t3 = sample_triples(spec, m, gen)
        return cross_terms(t1, t2), cross_terms(t2, t3)

    parts = map_chunks(run, len(sizes), threads)
    x = np.concatenate([p[0] for p in parts])
    y = np.concatenate([p[1] for p in parts])
    bad = np.isneginf(x) | np.isneginf(y)
    n_inf = int(bad.sum())
    wall = lambda: time.perf_counter() - t0

    if n_inf:
        lam = NEG_INF if np.isneginf(x).any() else float(x.mean())
        nan = float("nan")
        result = EstimateResult(nan, nan, n_samples, seed, n_inf, wall())
        return result, CovarianceLadder(nan, nan, lam, nan, nan)

    n = n_samples
    s1, s2, s3 = float(x.sum()), float((x * x).sum()), float((x * y).sum())
    lam = _mean(x)
    # centered evaluations of m2 - lam^2 and cross - lam^2 (identical
    # algebraic quantities, immune to the raw-moment cancellation)
    c0 = _mean((x - lam) ** 2)
    c1 = _mean(x * y - lam * lam)
    sigma2 = c0 + 2.0 * c1

    # leave-one-out jackknife, vectorized over the removed sample
    l1 = (s1 - x) / (n - 1)
    l2 = (s2 - x * x) / (n - 1)
    l3 = (s3 - x * y) / (n - 1)
    jc0 = l2 - l1 * l1
    jc1 = l3 - l1 * l1

    def jse(t: np.ndarray) -> float:
        return math.sqrt((n - 1) / n * float(((t - t.mean()) ** 2).sum()))

    result = EstimateResult(sigma2, jse(jc0 + 2.0 * jc1), n_samples, seed, 0, wall())
    ladder = CovarianceLadder(c0, c1, lam, jse(jc0), jse(jc1))
    return result, ladder


def trajectory_lambda(
    spec: DistributionSpec,
    n: int,
    n_chains: int,
    seed: int = 0,
    threads: int = 1,
) -> EstimateResult:
    """Lyapunov exponent as the across-chain mean of log ||S_n|| / n.

    Runs n_chains independent accumulator chains of length n; the
    almost-sure limit of log ||S_n|| / n is the exponent.  Chains whose
    product collapsed contribute -inf and are counted.
    """
    if n < 2:
        raise ValueError("need chain length n >= 2")
    if n_chains < 1:
        raise ValueError("need n_chains >= 1")
    t0 = time.perf_counter()
    per_chain = chain_log_norms(spec, n, n_chains, seed, threads) / n
    n_inf = int(np.isneginf(per_chain).sum())
    value = float(per_chain.mean())
    if n_inf or n_chains < 2:
        se = float("nan")
    else:
        se = float(per_chain.std(ddof=1)) / math.sqrt(n_chains)
    return EstimateResult(
        value=value,
        std_error=se,
        n_samples=n_chains,
        seed=seed,
        minus_inf_events=n_inf,
        wall_time_s=time.perf_counter() - t0,
    )


# -- exact enumeration ------------------------------------------------------

def exact_discrete(spec: DistributionSpec):
    """(lambda, sigma2, ladder) by exact enumeration of a finite support.

    The exponent and second moment are sums over atom pairs; the lag-1
    cross expectation sums over atom triples (the middle atom couples
    both cross terms).  Exact up to float arithmetic.  If any atom pair
    cancels exactly, lambda = -inf and the variance is undefined (NaN).
    Raises NotDiscreteError for continuous families.
    """
    atoms = enumerate_atoms(spec)
    k = len(atoms)
    if k > MAX_ATOMS:
        raise ValueError(f"too many atoms for enumeration: {k} > {MAX_ATOMS}")
    p = np.array([pr for _, pr in atoms])
    X = np.empty((k, k))
    for i, (ti, _) in enumerate(atoms):
        for j, (tj, _) in enumerate(atoms):
            X[i, j] = cross_term(ti, tj)
    if np.isneginf(X).any():
        nan = float("nan")
        return NEG_INF, nan, CovarianceLadder(nan, nan, NEG_INF)
    lam = float(p @ X @ p)
    m2 = float(p @ (X * X) @ p)
    cross = float(np.einsum("i,j,k,ij,jk->", p, p, p, X, X))
    c0 = m2 - lam * lam
    c1 = cross - lam * lam
    sigma2 = c0 + 2.0 * c1
    return lam, sigma2, CovarianceLadder(c0, c1, lam)


# -- closed forms ------------------------------------------------------------

def closed_form(spec: DistributionSpec):
    """(lambda, sigma2) for the solvable families.

    Uniform rank-one is solvable only for supports [0, b], [-a, 0], or
    [-b, b]; other parameters raise NoClosedFormError rather than
    returning a non-oracle value.
    """
    f = spec.family
    if f == "CauchyRankOne":
        return math.log(2.0), math.pi**2 / 4.0
    if f == "ExponentialRankOne":
        return 1.0 - EULER_GAMMA - math.log(spec.theta), math.pi**2 / 6.0 - 1.0
    if f == "UniformRankOne":
        a, b = spec.a, spec.b
        if a == 0.0 and b > 0.0:
            return (
                2.0 * math.log(2.0) - 1.5 + math.log(b),
                1.25 - 2.0 * math.log(2.0) ** 2,
            )
        if b == 0.0 and a > 0.0:
            return (
                2.0 * math.log(2.0) - 1.5 + math.log(a),
                1.25 - 2.0 * math.log(2.0) ** 2,
            )
        if a == b:
            return math.log(2.0 * b) - 1.5, 1.25
        raise NoClosedFormError(
            f"no closed form for uniform support [-{a}, {b}]; "
            "solvable cases are a=0, b=0, or a=b"
        )
    if f == "BinaryHill":
        return _binary_closed_form(spec.alpha, spec.beta, spec.p)
    raise NoClosedFormError(f"no closed form for family {f}")


def _binary_closed_form(alpha: float, beta: float, p: float):
    """Closed-form exponent and variance of the two-point multiplier.

    Grouped by the three distinct log magnitudes: the like-pair terms
    L1 = log|alpha + 1/alpha^2| and L3 = log|beta + 1/beta^2|, and the
    mixed-pair combination L2 = log(|alpha + 1/beta^2| |beta + 1/alpha^2|).
    """
    q = 1.0 - p
    l1 = math.log(abs(alpha + 1.0 / alpha**2))
    l2 = math.log(abs(alpha + 1.0 / beta**2) * abs(beta + 1.0 / alpha**2))
    l3 = math.log(abs(beta + 1.0 / beta**2))
    lam = p * p * l1 + p * q * l2 + q * q * l3
    sigma2 = (
        p**2 * (1.0 + (2.0 - 3.0 * p) * p) * l1**2
        - 2.0 * q * p**2 * l1 * ((3.0 * p - 1.0) * l2 + 3.0 * q * l3)
        + q * (1.0 + 3.0 * (p - 1.0) * p) * p * l2**2
        + 2.0 * q**2 * (3.0 * p - 2.0) * p * l2 * l3
        - q**2 * (3.0 * p - 4.0) * p * l3**2
    )
    return lam, sigma2


# -- moment diagnostics -------------------------------------------------------

@dataclass(frozen=True)
class MomentDiagnostics:
    """Sample means (with std errors) of the integrability diagnostics.

    log_plus_ac   : log^+(|a| + |c|)
    log_one_plus_ba: log(1 + |b|/|a|)
    cross_sq      : (cross term)^2

    Finite sample means are evidence, not proof, that the corresponding
    expectations are finite.
    """

    log_plus_ac: float
    log_plus_ac_se: float
    log_one_plus_ba: float
    log_one_plus_ba_se: float
    cross_sq: float
    cross_sq_se: float
    n_samples: int
    seed: int


def moment_diagnostics(
    spec: DistributionSpec, n_samples: int, seed: int = 0, threads: int = 1
) -> MomentDiagnostics:
    """Estimate the three moment diagnostics from n_samples pairs."""
    if n_samples < 100:
        raise ValueError("need n_samples >= 100")
    sizes = chunk_sizes(n_samples, SAMPLE_CHUNK)

    def run(k: int):
        gen = make_stream(seed, k)
        m = sizes[k]
        t1 = sample_triples(spec, m, gen)
        t2 = sample_triples(spec, m, gen)
        a1, b1, c1 = t1
        u = np.maximum(0.0, np.log(np.abs(a1) + np.abs(c1)))
        v = np.log1p(np.abs(b1) / np.abs(a1))
        w = cross_terms(t1, t2) ** 2
        return _moments(u), _moments(v), _moments(w)

    parts = map_chunks(run, len(sizes), threads)
    (mu, su) = _mean_se(p[0] for p in parts)
    (mv, sv) = _mean_se(p[1] for p in parts)
    (mw, sw) = _mean_se(p[2] for p in parts)
    return MomentDiagnostics(mu, su, mv, sv, mw, sw, n_samples, seed)
