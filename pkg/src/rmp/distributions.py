"""Joint laws of the entry triple (a, b, c) of a singular 2x2 random matrix.

A triple (a, b, c) with a != 0 determines the rank-one matrix
[[a, b], [c, b*c/a]].  The built-in families are:

* rank-one matrices [[x, x], [y, y]] with uniform, exponential, or
  standard-Cauchy entries ((a, b, c) = (x, x, y)),
* two-point "binary" multipliers x mapped to [[x, 1/x], [1, 1/x^2]],
* random Hill-type matrices [[1, x], [1/x, 1]],
* arbitrary finite atom lists and constant triples.

Specs are immutable and validated on construction; sampling is driven
by counter-based Philox streams so that (seed, chunk) pairs give
reproducible, independent substreams.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

BINARY_HILL = "BinaryHill"
UNIFORM_RANK_ONE = "UniformRankOne"
EXPONENTIAL_RANK_ONE = "ExponentialRankOne"
CAUCHY_RANK_ONE = "CauchyRankOne"
HILL_RANDOM = "HillRandom"
DISCRETE_ATOMS = "DiscreteAtoms"
CONSTANT_TRIPLE = "ConstantTriple"

FAMILIES = (
    BINARY_HILL,
    UNIFORM_RANK_ONE,
    EXPONENTIAL_RANK_ONE,
    CAUCHY_RANK_ONE,
    HILL_RANDOM,
    DISCRETE_ATOMS,
    CONSTANT_TRIPLE,
)

# families whose matrices have the rank-one form [[x, x], [y, y]]
RANK_ONE_FAMILIES = (UNIFORM_RANK_ONE, EXPONENTIAL_RANK_ONE, CAUCHY_RANK_ONE)

_MASK64 = (1 << 64) - 1
_ATOM_SUM_TOL = 1e-12


class SpecError(ValueError):
    """Malformed or invalid distribution document."""


class NotDiscreteError(ValueError):
    """Finite-support enumeration requested for a continuous family."""


@dataclass(frozen=True)
class EntryTriple:
    """One draw (a, b, c); the matrix it generates is [[a, b], [c, b*c/a]]."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise SpecError(f"{name} must be a real number, got {v!r}")
            if not math.isfinite(v):
                raise SpecError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.a == 0.0:
            raise SpecError("a must be nonzero")


def make_stream(seed: int, chunk: int = 0) -> np.random.Generator:
    """Counter-based random stream for (seed, chunk).

    Distinct (seed, chunk) keys yield statistically independent
    substreams, so chunked runs are deterministic for a given seed and
    chunk layout regardless of how chunks are scheduled.
    """
    key = np.array([seed & _MASK64, chunk & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class DistributionSpec:
    """Validated description of the joint law of (a, b, c).

    Field names mirror the JSON configuration grammar; only the fields
    relevant to ``family`` may be set.  Instances are immutable and
    safe to share across threads.
    """

    family: str
    alpha: float | None = None
    beta: float | None = None
    p: float | None = None
    a: float | None = None
    b: float | None = None
    theta: float | None = None
    value: EntryTriple | None = None
    atoms: tuple[tuple[EntryTriple, float], ...] | None = field(default=None)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise SpecError(
                f"family must be one of {', '.join(FAMILIES)}; got {self.family!r}"
            )
        if self.atoms is not None:
            object.__setattr__(self, "atoms", tuple(tuple(at) for at in self.atoms))
        _VALIDATORS[self.family](self)
        # normalize validated numerics so JSON integers behave like reals
        for name in ("alpha", "beta", "p", "a", "b", "theta"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, float(v))
        if self.atoms is not None:
            object.__setattr__(
                self, "atoms", tuple((t, float(p)) for t, p in self.atoms)
            )
        allowed = _FIELDS[self.family]
        for name in ("alpha", "beta", "p", "a", "b", "theta", "value", "atoms"):
            if name not in allowed and getattr(self, name) is not None:
                raise SpecError(f"{name} is not a parameter of {self.family}")

    # -- constructors ---------------------------------------------------

    @classmethod
    def binary_hill(cls, alpha: float, beta: float, p: float) -> "DistributionSpec":
        return cls(family=BINARY_HILL, alpha=alpha, beta=beta, p=p)

    @classmethod
    def uniform_rank_one(cls, a: float, b: float) -> "DistributionSpec":
        return cls(family=UNIFORM_RANK_ONE, a=a, b=b)

    @classmethod
    def exponential_rank_one(cls, theta: float) -> "DistributionSpec":
        return cls(family=EXPONENTIAL_RANK_ONE, theta=theta)

    @classmethod
    def cauchy_rank_one(cls) -> "DistributionSpec":
        return cls(family=CAUCHY_RANK_ONE)

    @classmethod
    def hill_random(cls, a: float, b: float) -> "DistributionSpec":
        return cls(family=HILL_RANDOM, a=a, b=b)

    @classmethod
    def constant_triple(cls, a: float, b: float, c: float) -> "DistributionSpec":
        return cls(family=CONSTANT_TRIPLE, value=EntryTriple(a, b, c))

    @classmethod
    def discrete_atoms(cls, atoms) -> "DistributionSpec":
        atoms = tuple(
            (t if isinstance(t, EntryTriple) else EntryTriple(*t), float(p))
            for t, p in atoms
        )
        return cls(family=DISCRETE_ATOMS, atoms=atoms)

    @property
    def is_discrete(self) -> bool:
        return self.family in (BINARY_HILL, DISCRETE_ATOMS, CONSTANT_TRIPLE)

    @property
    def is_rank_one(self) -> bool:
        return self.family in RANK_ONE_FAMILIES


# -- validation ----------------------------------------------------------

_FIELDS = {
    BINARY_HILL: ("alpha", "beta", "p"),
    UNIFORM_RANK_ONE: ("a", "b"),
    EXPONENTIAL_RANK_ONE: ("theta",),
    CAUCHY_RANK_ONE: (),
    HILL_RANDOM: ("a", "b"),
    DISCRETE_ATOMS: ("atoms",),
    CONSTANT_TRIPLE: ("value",),
}


def _need(spec, name) -> float:
    v = getattr(spec, name)
    if v is None:
        raise SpecError(f"{spec.family} requires field {name!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecError(f"{name} must be a real number, got {v!r}")
    if not math.isfinite(v):
        raise SpecError(f"{name} must be finite, got {v!r}")
    return float(v)


def _validate_binary(spec):
    alpha = _need(spec, "alpha")
    beta = _need(spec, "beta")
    p = _need(spec, "p")
    for name, x in (("alpha", alpha), ("beta", beta)):
        if x == 0.0:
            raise SpecError(f"{name} must be nonzero")
        if x == -1.0:
            raise SpecError(f"{name} must not be -1 (the log term degenerates)")
    if (alpha * beta**2 + 1.0) * (alpha**2 * beta + 1.0) == 0.0:
        raise SpecError(
            "alpha, beta must satisfy (alpha*beta^2+1)*(alpha^2*beta+1) != 0"
        )
    if not 0.0 <= p <= 1.0:
        raise SpecError(f"p must lie in [0, 1], got {p}")


def _validate_uniform(spec):
    a = _need(spec, "a")
    b = _need(spec, "b")
    # entries live on [-a, b]; a,b are the endpoint magnitudes
    if a < 0.0:
        raise SpecError(f"a must be >= 0 (interval is [-a, b]), got {a}")
    if b < 0.0:
        raise SpecError(f"b must be >= 0 (interval is [-a, b]), got {b}")
    if a + b == 0.0:
        raise SpecError("interval [-a, b] is degenerate; need a + b > 0")


def _validate_exponential(spec):
    theta = _need(spec, "theta")
    if theta <= 0.0:
        raise SpecError(f"theta must be > 0, got {theta}")


def _validate_cauchy(spec):
    pass


def _validate_hill(spec):
    a = _need(spec, "a")
    b = _need(spec, "b")
    if not a < b:
        raise SpecError(f"need a < b for the multiplier support [a, b], got [{a}, {b}]")


def _validate_constant(spec):
    if spec.value is None:
        raise SpecError("ConstantTriple requires field 'value'")
    if not isinstance(spec.value, EntryTriple):
        raise SpecError("value must be an EntryTriple")


def _validate_atoms(spec):
    if spec.atoms is None or len(spec.atoms) == 0:
        raise SpecError("DiscreteAtoms requires a nonempty 'atoms' list")
    total = 0.0
    for i, pair in enumerate(spec.atoms):
        if len(pair) != 2:
            raise SpecError(f"atoms[{i}] must be a (triple, probability) pair")
        t, p = pair
        if not isinstance(t, EntryTriple):
            raise SpecError(f"atoms[{i}]: first element must be an EntryTriple")
        if isinstance(p, bool) or not isinstance(p, (int, float)) or not math.isfinite(p):
            raise SpecError(f"atoms[{i}]: probability must be a finite real, got {p!r}")
        if p <= 0.0:
            raise SpecError(f"atoms[{i}]: probability must be strictly positive, got {p}")
        total += p
    if abs(total - 1.0) > _ATOM_SUM_TOL:
        raise SpecError(f"atom probabilities must sum to 1, got {total!r}")


_VALIDATORS = {
    BINARY_HILL: _validate_binary,
    UNIFORM_RANK_ONE: _validate_uniform,
    EXPONENTIAL_RANK_ONE: _validate_exponential,
    CAUCHY_RANK_ONE: _validate_cauchy,
    HILL_RANDOM: _validate_hill,
    DISCRETE_ATOMS: _validate_atoms,
    CONSTANT_TRIPLE: _validate_constant,
}


# -- parsing -------------------------------------------------------------

def parse_spec(text: str) -> DistributionSpec:
    """Parse a JSON configuration document into a validated spec.

    The document is an object with a "family" string plus the fields of
    that family, e.g. ``{"family": "BinaryHill", "alpha": 2, "beta": 3,
    "p": 0.5}``.  Raises SpecError naming the offending field.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"malformed JSON: {e}") from e
    if not isinstance(obj, dict):
        raise SpecError("document must be a JSON object")
    if "family" not in obj:
        raise SpecError("missing required field 'family'")
    family = obj["family"]
    if family not in FAMILIES:
        raise SpecError(f"family must be one of {', '.join(FAMILIES)}; got {family!r}")
    extra = set(obj) - {"family"} - set(_FIELDS[family])
    if extra:
        raise SpecError(f"unknown field(s) for {family}: {', '.join(sorted(extra))}")

    kwargs = {}
    for name in _FIELDS[family]:
        if name not in obj:
            continue
        raw = obj[name]
        if name == "value":
            kwargs[name] = _parse_triple(raw, "value")
        elif name == "atoms":
            kwargs[name] = _parse_atoms(raw)
        else:
            kwargs[name] = raw
    return DistributionSpec(family=family, **kwargs)


def _parse_triple(raw, where: str) -> EntryTriple:
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise SpecError(f"{where} must be a list [a, b, c] of three reals")
    try:
        return EntryTriple(*raw)
    except SpecError as e:
        raise SpecError(f"{where}: {e}") from e


def _parse_atoms(raw):
    if not isinstance(raw, list) or not raw:
        raise SpecError("atoms must be a nonempty list of [[a, b, c], p] pairs")
    out = []
    for i, pair in enumerate(raw):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise SpecError(f"atoms[{i}] must be a [[a, b, c], p] pair")
        triple = _parse_triple(pair[0], f"atoms[{i}]")
        out.append((triple, pair[1]))
    return tuple(out)


def load_spec(path: str) -> DistributionSpec:
    with open(path, "r", encoding="utf-8") as f:
        return parse_spec(f.read())


# -- sampling ------------------------------------------------------------

def sample_triples(spec: DistributionSpec, n: int, gen: np.random.Generator):
    """Draw n i.i.d. triples; returns float64 arrays (a, b, c) of length n.

    The stream is consumed in a fixed per-family order, so identical
    (spec, stream state) give identical arrays.  Components that must be
    nonzero are resampled on the measure-zero event of an exact 0.0.
    """
    f = spec.family
    if f == CONSTANT_TRIPLE:
        v = spec.value
        return (np.full(n, v.a), np.full(n, v.b), np.full(n, v.c))
    if f == BINARY_HILL:
        x = np.where(gen.random(n) < spec.p, spec.alpha, spec.beta)
        return (x, 1.0 / x, np.ones(n))
    if f == DISCRETE_ATOMS:
        av = np.array([t.a for t, _ in spec.atoms])
        bv = np.array([t.b for t, _ in spec.atoms])
        cv = np.array([t.c for t, _ in spec.atoms])
        cum = np.cumsum([p for _, p in spec.atoms])
        cum[-1] = max(cum[-1], 1.0)
        idx = np.searchsorted(cum, gen.random(n), side="right")
        return (av[idx], bv[idx], cv[idx])
    if f == UNIFORM_RANK_ONE:
        lo, hi = -spec.a, spec.b
        x = _nonzero(lambda k: gen.uniform(lo, hi, k), n)
        y = gen.uniform(lo, hi, n)
        return (x, x, y)
    if f == EXPONENTIAL_RANK_ONE:
        draw = lambda k: -np.log1p(-gen.random(k)) / spec.theta
        x = _nonzero(draw, n)
        y = draw(n)
        return (x, x, y)
    if f == CAUCHY_RANK_ONE:
        draw = lambda k: np.tan(np.pi * (gen.random(k) - 0.5))
        x = _nonzero(draw, n)
        y = draw(n)
        return (x, x, y)
    if f == HILL_RANDOM:
        x = _nonzero(lambda k: gen.uniform(spec.a, spec.b, k), n)
        return (np.ones(n), x, 1.0 / x)
    raise AssertionError(f"unhandled family {f}")


def _nonzero(draw, n: int) -> np.ndarray:
    x = draw(n)
    while True:
        mask = x == 0.0
        k = int(mask.sum())
        if k == 0:
            return x
        x[mask] = draw(k)


def sample_triple(spec: DistributionSpec, gen: np.random.Generator) -> EntryTriple:
    """Draw a single triple from the joint law, advancing the stream."""
    a, b, c = sample_triples(spec, 1, gen)
    return EntryTriple(float(a[0]), float(b[0]), float(c[0]))


def enumerate_atoms(spec: DistributionSpec):
    """Finite support of a discrete spec as [(EntryTriple, probability)].

    Probabilities are returned exactly as stated (no renormalization);
    zero-probability branches of a degenerate BinaryHill are dropped.
    Raises NotDiscreteError for continuous families.
    """
    f = spec.family
    if f == CONSTANT_TRIPLE:
        return [(spec.value, 1.0)]
    if f == BINARY_HILL:
        out = []
        if spec.p > 0.0:
            out.append((EntryTriple(spec.alpha, 1.0 / spec.alpha, 1.0), spec.p))
        if spec.p < 1.0:
            out.append((EntryTriple(spec.beta, 1.0 / spec.beta, 1.0), 1.0 - spec.p))
        return out
    if f == DISCRETE_ATOMS:
        return list(spec.atoms)
    raise NotDiscreteError(f"{f} is not discrete; finite support unavailable")
