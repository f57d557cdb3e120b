"""Overflow-safe log-norm of products of singular 2x2 matrices.

The product S_n = Y_n ... Y_2 Y_1 of matrices Y_j = [[a_j, b_j],
[c_j, b_j*c_j/a_j]] collapses to a rank-one matrix scaled by the
product of the scalar cross terms a_j + b_{j+1} c_j / a_{j+1}.  The
accumulator tracks log |that product| plus the generators of the
rank-one remainder, so log ||S_n|| (Hilbert-Schmidt norm) is computed
in log space and never overflows.  A naive rescaled-multiplication
oracle is kept alongside for validating the representation.

A cross term that is exactly zero makes S_n the zero matrix; this is a
legitimate state, represented by -inf, not an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import DistributionSpec, EntryTriple, make_stream, sample_triples
from .parallel import chunk_sizes, map_chunks

NEG_INF = float("-inf")

# chains per stream chunk / steps per sampling block for the vectorized kernel
CHAIN_CHUNK = 128
STEP_BLOCK = 4096

Matrix2 = np.ndarray  # 2x2 float64, row-major


@dataclass(frozen=True)
class ProductAccumulator:
    """Running state of log ||Y_n ... Y_1||.

    sum_log_terms is the accumulated log |product of cross terms|
    (-inf once any cross term vanished; the sign is never needed since
    only |.| enters the norm).  head_ratio = b_1/a_1 is fixed at the
    first absorb; tail = (a_n, c_n) generates the last column block;
    pending is the most recent triple, needed to form the next cross
    term.
    """

    n: int
    sum_log_terms: float
    head_ratio: float
    tail: tuple[float, float]
    pending: EntryTriple


def accumulator_init(xi: EntryTriple) -> ProductAccumulator:
    """State after absorbing the first matrix."""
    return ProductAccumulator(
        n=1,
        sum_log_terms=0.0,
        head_ratio=xi.b / xi.a,
        tail=(xi.a, xi.c),
        pending=xi,
    )


def accumulator_step(acc: ProductAccumulator, xi: EntryTriple) -> ProductAccumulator:
    """Absorb the next matrix on the left.

    The cross term couples the pending triple with the incoming one as
    pending.a + xi.b * pending.c / xi.a (note the asymmetry: the b
    comes from the *new* factor).  An exact zero sends the sum to -inf,
    where it stays.
    """
    cross = acc.pending.a + xi.b * acc.pending.c / xi.a
    if cross == 0.0:
        s = NEG_INF
    else:
        s = acc.sum_log_terms + math.log(abs(cross))
    return ProductAccumulator(
        n=acc.n + 1,
        sum_log_terms=s,
        head_ratio=acc.head_ratio,
        tail=(xi.a, xi.c),
        pending=xi,
    )


def log_norm(acc: ProductAccumulator) -> float:
    """log of the Hilbert-Schmidt norm of the absorbed product.

    ||S_n|| = |prod of cross terms| * sqrt((a_n^2 + c_n^2) * (1 + (b_1/a_1)^2));
    hypot keeps the tail factor overflow-safe.  Returns -inf iff the
    product collapsed to the zero matrix.
    """
    ta, tc = acc.tail
    return (
        acc.sum_log_terms
        + math.log(math.hypot(ta, tc))
        + math.log(math.hypot(1.0, acc.head_ratio))
    )


def build_matrix(xi: EntryTriple) -> Matrix2:
    """The singular matrix [[a, b], [c, b*c/a]] generated by a triple."""
    d = xi.b * xi.c / xi.a
    return np.array([[xi.a, xi.b], [xi.c, d]])


def direct_log_norm(matrices) -> float:
    """log Hilbert-Schmidt norm of Y_n ... Y_1 by naive multiplication.

    Every step rescales by a power of two at least the max-abs entry
    (keeping entries in [-1, 1]) and accumulates the log scale, so the
    running product never overflows for any n.  Power-of-two scaling
    and explicit scalar 2x2 multiplication keep the arithmetic free of
    rescaling rounding and FMA contraction, so an exactly cancelling
    product really reaches the zero matrix.  Returns -inf in that case.
    This is the oracle the accumulator is validated against; it shares
    no code with the accumulator path.
    """
    matrices = list(matrices)
    if not matrices:
        raise ValueError("need at least one matrix")
    total = 0.0
    m = np.asarray(matrices[0], dtype=float)
    s = [[float(m[0, 0]), float(m[0, 1])], [float(m[1, 0]), float(m[1, 1])]]

    def rescale(s, total):
        top = max(abs(v) for row in s for v in row)
        if top == 0.0:
            return None, total
        scale = _pow2_at_least(top)
        return [[v / scale for v in row] for row in s], total + math.log(scale)

    s, total = rescale(s, total)
    if s is None:
        return NEG_INF
    for m in matrices[1:]:
        m = np.asarray(m, dtype=float)
        y = [[float(m[0, 0]), float(m[0, 1])], [float(m[1, 0]), float(m[1, 1])]]
        s = [
            [
                y[0][0] * s[0][0] + y[0][1] * s[1][0],
                y[0][0] * s[0][1] + y[0][1] * s[1][1],
            ],
            [
                y[1][0] * s[0][0] + y[1][1] * s[1][0],
                y[1][0] * s[0][1] + y[1][1] * s[1][1],
            ],
        ]
        s, total = rescale(s, total)
        if s is None:
            return NEG_INF
    sq = sum(v * v for row in s for v in row)
    return total + 0.5 * math.log(sq)


def _pow2_at_least(x: float) -> float:
    """Smallest power of two >= x, for finite x > 0."""
    frac, exp = math.frexp(x)  # x = frac * 2**exp, frac in [0.5, 1)
    return math.ldexp(1.0, exp - 1) if frac == 0.5 else math.ldexp(1.0, exp)


# -- vectorized many-chain kernel -----------------------------------------

def chain_log_norms(
    spec: DistributionSpec,
    n: int,
    n_chains: int,
    seed: int,
    threads: int = 1,
) -> np.ndarray:
    """log ||S_n|| for n_chains independent chains of length n.

    Chains are partitioned into fixed-size chunks; chunk k draws from
    the (seed, k) substream, so the result is deterministic for a given
    (spec, n, n_chains, seed) regardless of the thread count.  Chains
    whose product collapsed carry -inf.
    """
    if n < 1:
        raise ValueError("chain length must be >= 1")
    if n_chains < 1:
        raise ValueError("need at least one chain")
    sizes = chunk_sizes(n_chains, CHAIN_CHUNK)

    def run(k: int) -> np.ndarray:
        return _chain_chunk(spec, n, sizes[k], make_stream(seed, k))

    return np.concatenate(map_chunks(run, len(sizes), threads))


def _chain_chunk(spec, n, width, gen) -> np.ndarray:
    """One chunk of ``width`` chains, sampled in step blocks."""
    sumlog = np.zeros(width)
    head_ratio = None
    prev = None  # (a, b, c) of the last absorbed step, shape (width,)
    done = 0
    while done < n:
        block = min(STEP_BLOCK, n - done)
        a, b, c = sample_triples(spec, block * width, gen)
        A = a.reshape(block, width)
        B = b.reshape(block, width)
        C = c.reshape(block, width)
        if prev is None:
            head_ratio = B[0] / A[0]
        else:
            pa, _, pc = prev
            with np.errstate(divide="ignore"):
                sumlog += np.log(np.abs(pa + B[0] * pc / A[0]))
        if block > 1:
            with np.errstate(divide="ignore"):
                cross = np.log(np.abs(A[:-1] + B[1:] * C[:-1] / A[1:]))
            sumlog += cross.sum(axis=0)
        prev = (A[-1], B[-1], C[-1])
        done += block
    pa, _, pc = prev
    return sumlog + np.log(np.hypot(pa, pc)) + np.log(np.hypot(1.0, head_ratio))
