"""CLT harness and degeneracy detection.

Simulates the normalized statistic Z = (log ||S_n|| - n*lambda) / sqrt(n)
over many independent chains and compares it against N(0, sigma^2).
The pair (lambda, sigma^2) is an *input* (closed form, exact
enumeration, or a Monte Carlo run), so the harness tests a hypothesis
rather than re-estimating it: a wrong lambda shifts every Z by
sqrt(n) * error and fails the fit decisively.

The degeneracy check applies the necessary conditions for sigma^2 = 0
when the entry law has an atom (a, b, c): the exponent must equal
log |a + bc/a| and all support points must satisfy a quartic identity.
A failed check proves sigma^2 > 0; a passed check only means
degeneracy is not ruled out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .distributions import DistributionSpec, EntryTriple, enumerate_atoms
from .estimators import exact_discrete
from .product import NEG_INF, chain_log_norms

HISTOGRAM_BINS = 40


@dataclass(frozen=True)
class CltReport:
    """Empirical summary of the normalized statistic over many chains.

    Histogram bins cover [-5 sigma, 5 sigma] (out-of-range values are
    clipped into the edge bins, so counts always total
    m_chains - minus_inf_events).  ks_distance is None when
    sigma2_used = 0, where the reference law is degenerate.
    """

    n: int
    m_chains: int
    lambda_used: float
    sigma2_used: float
    empirical_mean: float
    empirical_var: float
    ks_distance: float | None
    histogram: tuple[tuple[float, float, int], ...]
    minus_inf_events: int
    seed: int


@dataclass(frozen=True)
class DegeneracyVerdict:
    """Outcome of the atomic-case degeneracy conditions.

    True means every necessary condition held for some atom
    ("degeneracy not ruled out"); False proves sigma^2 > 0.  Residuals
    are reported for the best candidate atom.
    """

    is_degenerate_candidate: bool
    atom: EntryTriple
    lambda_residual: float
    pairwise_residuals: tuple[tuple[EntryTriple, float], ...]
    lam: float
    sigma2: float
    tolerance: float


def ks_distance(samples, sigma2: float) -> float:
    """One-sample Kolmogorov-Smirnov distance against N(0, sigma2).

    sup_x |F_m(x) - Phi(x / sigma)| over the sorted samples, evaluating
    the empirical CDF from both sides of each jump.  Invariant under
    reordering of the samples.
    """
    if sigma2 <= 0.0:
        raise ValueError(f"need sigma2 > 0, got {sigma2}")
    xs = np.sort(np.asarray(samples, dtype=float))
    m = xs.size
    if m == 0:
        raise ValueError("need at least one sample")
    f = ndtr(xs / math.sqrt(sigma2))
    grid = np.arange(1, m + 1) / m
    d_plus = float((grid - f).max())
    d_minus = float((f - (grid - 1.0 / m)).max())
    return max(d_plus, d_minus)


def simulate_normalized(
    spec: DistributionSpec,
    n: int,
    m_chains: int,
    lam: float,
    sigma2: float,
    seed: int = 0,
    threads: int = 1,
) -> CltReport:
    """Simulate Z_k = (log ||S_n|| - n*lam) / sqrt(n) over m_chains chains.

    Chains that collapse to the zero matrix are excluded from the
    statistics and counted in minus_inf_events.
    """
    if n < 10:
        raise ValueError("need chain length n >= 10")
    if m_chains < 10:
        raise ValueError("need m_chains >= 10")
    if not math.isfinite(lam):
        raise ValueError(f"need finite lambda, got {lam}")
    log_norms = chain_log_norms(spec, n, m_chains, seed, threads)
    finite = ~np.isneginf(log_norms)
    n_inf = int(m_chains - finite.sum())
    z = (log_norms[finite] - n * lam) / math.sqrt(n)

    if z.size:
        emp_mean = float(z.mean())
        emp_var = float(z.var(ddof=1)) if z.size > 1 else 0.0
    else:
        emp_mean = float("nan")
        emp_var = float("nan")

    ks = None
    if sigma2 > 0.0 and z.size:
        ks = ks_distance(z, sigma2)

    half = 5.0 * math.sqrt(sigma2) if sigma2 > 0.0 else 1.0
    edges = np.linspace(-half, half, HISTOGRAM_BINS + 1)
    counts, _ = np.histogram(np.clip(z, -half, half), bins=edges)
    histogram = tuple(
        (float(edges[i]), float(edges[i + 1]), int(counts[i]))
        for i in range(HISTOGRAM_BINS)
    )
    return CltReport(
        n=n,
        m_chains=m_chains,
        lambda_used=lam,
        sigma2_used=sigma2,
        empirical_mean=emp_mean,
        empirical_var=emp_var,
        ks_distance=ks,
        histogram=histogram,
        minus_inf_events=n_inf,
        seed=seed,
    )


def degeneracy_check(spec: DistributionSpec, tolerance: float = 1e-9) -> DegeneracyVerdict:
    """Test the necessary conditions for a degenerate (sigma^2 = 0) CLT.

    Each atom (a, b, c) of the finite support is tried as the
    candidate: the exact exponent must equal log |a + bc/a| and every
    support point (a_j, b_j, c_j) must satisfy

        (a + b_j c / a_j)^2 (a_j + b c_j / a)^2 = (a + bc/a)^4.

    Residuals are compared at a relative tolerance.  Raises
    NotDiscreteError for continuous families.
    """
    if tolerance <= 0.0:
        raise ValueError("tolerance must be > 0")
    atoms = enumerate_atoms(spec)
    lam, sigma2, _ = exact_discrete(spec)

    best = None  # (worst normalized residual, verdict fields)
    for (atom, _) in atoms:
        d = atom.a + atom.b * atom.c / atom.a
        lam_atom = math.log(abs(d)) if d != 0.0 else NEG_INF
        lam_res = _diff(lam, lam_atom)
        lam_ok = lam_res <= tolerance * max(1.0, _finite_abs(lam_atom))

        rhs = d**4
        pairs = []
        worst = lam_res / max(1.0, _finite_abs(lam_atom))
        quartic_ok = True
        for (other, _) in atoms:
            lhs = (atom.a + other.b * atom.c / other.a) ** 2 * (
                other.a + atom.b * other.c / atom.a
            ) ** 2
            res = abs(lhs - rhs)
            pairs.append((other, res))
            rel = res / max(1.0, abs(rhs))
            worst = max(worst, rel)
            if rel > tolerance:
                quartic_ok = False
        verdict = lam_ok and quartic_ok
        entry = (worst, verdict, atom, lam_res, tuple(pairs))
        if verdict:
            best = entry
            break
        if best is None or entry[0] < best[0]:
            best = entry

    _, verdict, atom, lam_res, pairs = best
    return DegeneracyVerdict(
        is_degenerate_candidate=verdict,
        atom=atom,
        lambda_residual=lam_res,
        pairwise_residuals=pairs,
        lam=lam,
        sigma2=sigma2,
        tolerance=tolerance,
    )


def _diff(x: float, y: float) -> float:
    if x == y:  # covers the -inf / -inf case
        return 0.0
    return abs(x - y)


def _finite_abs(x: float) -> float:
    return abs(x) if math.isfinite(x) else 0.0
