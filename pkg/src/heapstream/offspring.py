"""Offspring distributions: laws on {1, 2, ...} that assign each vertex its
maximum number of children.

Three families are supported and can all be written in a small text grammar
(the ``--mu`` flag of the CLI):

    dirac:<k>          point mass at integer k >= 1
    geom:<p>           P(v = k) = p * (1-p)^(k-1) for k >= 1
    pmf:<p1>,<p2>,...  explicit finite law, entry i is P(v = i)

Sampling consumes a fixed number of generator draws per value (0 for dirac,
1 for the others, via inversion), so identically seeded streams are
bit-reproducible and the vectorized path matches the scalar one exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_PMF_SUM_TOL_PARSE = 1e-9   # tolerance for user-supplied pmfs
_PMF_SUM_TOL = 1e-12        # invariant for constructed distributions


@dataclass(frozen=True)
class OffspringDistribution:
    """Validated capacity law. Use :func:`dirac`, :func:`geometric`,
    :func:`explicit` or :func:`parse_spec` instead of the raw constructor."""

    kind: str                                   # "dirac" | "geometric" | "explicit"
    k: int = 0                                  # dirac atom
    p: float = 0.0                              # geometric success probability
    pmf: tuple[tuple[int, float], ...] = ()     # explicit (value, prob) pairs

    def __post_init__(self) -> None:
        if self.kind == "dirac":
            if not isinstance(self.k, int) or self.k < 1:
                raise ValueError(f"dirac atom must be an integer >= 1, got {self.k!r}")
        elif self.kind == "geometric":
            if not (0.0 < self.p <= 1.0):
                raise ValueError(f"geometric parameter must lie in (0, 1], got {self.p!r}")
        elif self.kind == "explicit":
            if not self.pmf:
                raise ValueError("explicit pmf must have at least one entry")
            total = 0.0
            seen: set[int] = set()
            for value, prob in self.pmf:
                if not isinstance(value, int) or value < 1:
                    raise ValueError(f"pmf support value must be an integer >= 1, got {value!r}")
                if value in seen:
                    raise ValueError(f"duplicate pmf support value {value}")
                seen.add(value)
                if not (0.0 < prob <= 1.0):
                    raise ValueError(f"pmf probability for value {value} must lie in (0, 1], got {prob!r}")
                total += prob
            if abs(total - 1.0) > _PMF_SUM_TOL:
                raise ValueError(f"pmf probabilities sum to {total!r}, expected 1 within {_PMF_SUM_TOL}")
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    @property
    def is_dirac_one(self) -> bool:
        """True iff this law is the point mass at 1 (the capacity-1 chain case)."""
        if self.kind == "dirac":
            return self.k == 1
        if self.kind == "geometric":
            return self.p == 1.0
        return len(self.pmf) == 1 and self.pmf[0][0] == 1

    def mean(self) -> float:
        if self.kind == "dirac":
            return float(self.k)
        if self.kind == "geometric":
            return 1.0 / self.p
        return sum(v * p for v, p in self.pmf)

    def spec_string(self) -> str:
        """Grammar text that parses back to an equivalent distribution."""
        if self.kind == "dirac":
            return f"dirac:{self.k}"
        if self.kind == "geometric":
            return f"geom:{self.p!r}"
        dense = {v: p for v, p in self.pmf}
        top = max(dense)
        return "pmf:" + ",".join(repr(dense.get(i, 0.0)) for i in range(1, top + 1))


def dirac(k: int) -> OffspringDistribution:
    return OffspringDistribution(kind="dirac", k=k)


def geometric(p: float) -> OffspringDistribution:
    return OffspringDistribution(kind="geometric", p=float(p))


def explicit(pairs) -> OffspringDistribution:
    pmf = tuple((int(v), float(p)) for v, p in pairs)
    return OffspringDistribution(kind="explicit", pmf=pmf)


def parse_spec(spec: str) -> OffspringDistribution:
    """Parse the ``dirac:<k>`` | ``geom:<p>`` | ``pmf:<p1>,...`` grammar.

    Zero-probability pmf entries are dropped; the remaining entries are
    renormalized (the input must already sum to 1 within 1e-9).
    """
    text = spec.strip()
    head, sep, rest = text.partition(":")
    if not sep:
        raise ValueError(f"malformed distribution spec {spec!r}: expected '<kind>:<args>'")
    if head == "dirac":
        try:
            k = int(rest)
        except ValueError:
            raise ValueError(f"malformed dirac spec: {rest!r} is not an integer") from None
        if k < 1:
            raise ValueError(f"dirac:{k} invalid: support values must be >= 1")
        return dirac(k)
    if head == "geom":
        try:
            p = float(rest)
        except ValueError:
            raise ValueError(f"malformed geom spec: {rest!r} is not a number") from None
        if not (0.0 < p <= 1.0):
            raise ValueError(f"geom:{rest} invalid: parameter must lie in (0, 1]")
        return geometric(p)
    if head == "pmf":
        tokens = rest.split(",") if rest else []
        if not tokens:
            raise ValueError("malformed pmf spec: no entries")
        probs = []
        for tok in tokens:
            try:
                probs.append(float(tok))
            except ValueError:
                raise ValueError(f"malformed pmf spec: {tok!r} is not a number") from None
        if any(p < 0.0 or p > 1.0 for p in probs):
            bad = next(p for p in probs if p < 0.0 or p > 1.0)
            raise ValueError(f"pmf entry {bad!r} outside [0, 1]")
        total = sum(probs)
        if abs(total - 1.0) > _PMF_SUM_TOL_PARSE:
            raise ValueError(f"pmf probabilities sum to {total!r}, expected 1 within {_PMF_SUM_TOL_PARSE}")
        pairs = [(i + 1, p / total) for i, p in enumerate(probs) if p > 0.0]
        if not pairs:
            raise ValueError("pmf has no positive entries")
        return explicit(pairs)
    raise ValueError(f"unknown distribution kind {head!r} in spec {spec!r}")


def sample(dist: OffspringDistribution, rng: np.random.Generator) -> int:
    """Draw one capacity. Consumes 0 uniforms for dirac, exactly 1 otherwise."""
    if dist.kind == "dirac":
        return dist.k
    u = rng.random()
    if dist.kind == "geometric":
        return _geom_from_uniform(u, dist.p)
    values, cdf = _explicit_tables(dist)
    idx = int(np.searchsorted(cdf, u, side="right"))
    return int(values[min(idx, len(values) - 1)])


def sample_array(dist: OffspringDistribution, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vectorized :func:`sample`; bit-identical to `size` scalar calls."""
    if size < 0:
        raise ValueError("size must be >= 0")
    if dist.kind == "dirac":
        return np.full(size, dist.k, dtype=np.int64)
    u = rng.random(size)
    if dist.kind == "geometric":
        if dist.p == 1.0:
            return np.ones(size, dtype=np.int64)
        k = np.ceil(np.log1p(-u) / math.log1p(-dist.p)).astype(np.int64)
        np.maximum(k, 1, out=k)
        return k
    values, cdf = _explicit_tables(dist)
    idx = np.searchsorted(cdf, u, side="right")
    np.minimum(idx, len(values) - 1, out=idx)
    return values[idx]


def _geom_from_uniform(u: float, p: float) -> int:
    if p == 1.0:
        return 1
    return max(1, math.ceil(math.log1p(-u) / math.log1p(-p)))


def _explicit_tables(dist: OffspringDistribution) -> tuple[np.ndarray, np.ndarray]:
    values = np.array([v for v, _ in dist.pmf], dtype=np.int64)
    cdf = np.cumsum([p for _, p in dist.pmf])
    return values, cdf
