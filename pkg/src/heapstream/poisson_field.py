"""Marked Poisson fields on strips of the upper half-plane.

An :class:`AtomField` holds the atoms (u, t, nu) falling in a box
(a, b) x (0, horizon], with positions and times uniform, the count Poisson
with mean equal to the box area, and capacities i.i.d. from an offspring
distribution. Atoms are kept sorted by time.

Rescaled views (the map (u, t) -> (c*u, t/c)) are materialized from the
*original* sample through a single accumulated factor rather than by
compounding per-call multiplications. Rescaling by c and then 1/c therefore
reproduces the source field bit-for-bit instead of drifting by an ulp, and
repeated rescaling never accumulates rounding error.
"""
from __future__ import annotations

import io
from typing import NamedTuple

import numpy as np

from .offspring import OffspringDistribution, sample_array


class Atom(NamedTuple):
    u: float
    t: float
    nu: int


class AtomField:
    """Immutable, time-sorted atom set on (a, b) x (0, horizon]."""

    __slots__ = ("a", "b", "horizon", "seed", "u", "t", "nu", "_base", "_factor")

    def __init__(self, a, b, horizon, u, t, nu, seed=None, _base=None, _factor=1.0):
        self.a = float(a)
        self.b = float(b)
        self.horizon = float(horizon)
        self.seed = seed
        self.u = _frozen(u, np.float64)
        self.t = _frozen(t, np.float64)
        self.nu = _frozen(nu, np.int64)
        # (u0, t0, a0, b0, h0): coordinates this field was materialized from,
        # shared by every rescaled view so factors compose with one rounding.
        self._base = _base if _base is not None else (self.u, self.t, self.a, self.b, self.horizon)
        self._factor = float(_factor)
        self._validate()

    def _validate(self) -> None:
        if not self.a < self.b:
            raise ValueError(f"strip bounds require a < b, got a={self.a!r}, b={self.b!r}")
        if not self.horizon > 0.0:
            raise ValueError(f"horizon must be > 0, got {self.horizon!r}")
        n = self.u.size
        if self.t.size != n or self.nu.size != n:
            raise ValueError("u, t, nu must have equal length")
        if n == 0:
            return
        if not (np.all(self.u > self.a) and np.all(self.u < self.b)):
            raise ValueError("atom positions must lie strictly inside (a, b)")
        if not (np.all(self.t > 0.0) and np.all(self.t <= self.horizon)):
            raise ValueError("atom times must lie in (0, horizon]")
        if not np.all(np.diff(self.t) > 0.0):
            raise ValueError("atom times must be strictly increasing (sorted, no ties)")
        if np.unique(self.u).size != n:
            raise ValueError("atom positions must be pairwise distinct")
        if np.any(self.nu < 1):
            raise ValueError("atom capacities must be >= 1")

    def __len__(self) -> int:
        return self.u.size

    @property
    def atoms(self) -> list[Atom]:
        return [Atom(float(u), float(t), int(nu)) for u, t, nu in zip(self.u, self.t, self.nu)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, AtomField):
            return NotImplemented
        return (
            self.a == other.a
            and self.b == other.b
            and self.horizon == other.horizon
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.nu, other.nu)
        )

    def __repr__(self) -> str:
        return (f"AtomField(a={self.a}, b={self.b}, horizon={self.horizon}, "
                f"atoms={len(self)}, seed={self.seed})")

    def restrict(self, a2: float, b2: float, s: float, t2: float) -> "AtomField":
        return restrict(self, a2, b2, s, t2)

    def scale(self, c: float) -> "AtomField":
        return scale(self, c)


def _frozen(arr, dtype) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=dtype)
    out.setflags(write=False)
    return out


def sample_field(a: float, b: float, horizon: float,
                 dist: OffspringDistribution, seed: int) -> AtomField:
    """Sample a field: Poisson((b-a)*horizon) many atoms, positions uniform on
    (a, b), times uniform on (0, horizon], capacities i.i.d. from `dist`.

    Pure function of its arguments. Draw order per attempt: count, positions,
    times, capacities. In the astronomically rare event that two positions or
    two times collide in floating point, the whole block is redrawn from the
    continuing generator stream, which keeps the output a deterministic
    function of the seed.
    """
    if not a < b:
        raise ValueError(f"sample_field requires a < b, got a={a!r}, b={b!r}")
    if not horizon > 0.0:
        raise ValueError(f"sample_field requires horizon > 0, got {horizon!r}")
    rng = np.random.default_rng(seed)
    area = (b - a) * horizon
    while True:
        n = int(rng.poisson(area))
        u = rng.uniform(a, b, n)
        t = horizon * (1.0 - rng.random(n))
        nu = sample_array(dist, rng, n)
        order = np.argsort(t)
        u, t, nu = u[order], t[order], nu[order]
        if _is_clean(u, t, a, b):
            return AtomField(a, b, horizon, u, t, nu, seed=seed)


def _is_clean(u: np.ndarray, t: np.ndarray, a: float, b: float) -> bool:
    n = u.size
    if n == 0:
        return True
    if np.unique(u).size != n or not np.all(np.diff(t) > 0.0):
        return False
    return bool(np.all(u > a) and np.all(u < b))


def restrict(field: AtomField, a2: float, b2: float, s: float, t2: float) -> AtomField:
    """Keep exactly the atoms with a2 < u < b2 and s < t <= t2.

    Times are not shifted; the result's box is (a2, b2) x (0, t2]. The window
    may be empty (s == t2).
    """
    if not (field.a <= a2 < b2 <= field.b):
        raise ValueError(f"restriction bounds ({a2!r}, {b2!r}) not inside ({field.a!r}, {field.b!r})")
    if not (0.0 <= s <= t2 <= field.horizon):
        raise ValueError(f"restriction window ({s!r}, {t2!r}] not inside (0, {field.horizon!r}]")
    keep = (field.u > a2) & (field.u < b2) & (field.t > s) & (field.t <= t2)
    return AtomField(a2, b2, t2, field.u[keep], field.t[keep], field.nu[keep], seed=field.seed)


def scale(field: AtomField, c: float) -> AtomField:
    """Map every atom (u, t, nu) to (c*u, t/c, nu); bounds and horizon follow.

    Label order and time order are both preserved (c > 0), so the atom list
    stays time-sorted. Coordinates are derived from the field's base sample
    with a single multiplication by the accumulated factor.
    """
    if not c > 0.0:
        raise ValueError(f"scale factor must be > 0, got {c!r}")
    u0, t0, a0, b0, h0 = field._base
    factor = field._factor * c
    return AtomField(
        a0 * factor, b0 * factor, h0 / factor,
        u0 * factor, t0 / factor, field.nu,
        seed=field.seed, _base=field._base, _factor=factor,
    )


def dump_atoms_csv(field: AtomField, fp) -> None:
    """Write the `u,t,nu` atom table; reals carry 17 significant digits so the
    text round-trips to the same doubles."""
    own = isinstance(fp, (str, bytes))
    out = open(fp, "w") if own else fp
    try:
        out.write("u,t,nu\n")
        for u, t, nu in zip(field.u, field.t, field.nu):
            out.write(f"{u:.17g},{t:.17g},{int(nu)}\n")
    finally:
        if own:
            out.close()


def load_atoms_csv(fp, a: float, b: float, horizon: float, seed=None) -> AtomField:
    own = isinstance(fp, (str, bytes))
    src = open(fp, "r") if own else fp
    try:
        header = src.readline().strip()
        if header != "u,t,nu":
            raise ValueError(f"bad atom CSV header {header!r}, expected 'u,t,nu'")
        u, t, nu = [], [], []
        for line in src:
            line = line.strip()
            if not line:
                continue
            su, st, snu = line.split(",")
            u.append(float(su))
            t.append(float(st))
            nu.append(int(snu))
    finally:
        if own:
            src.close()
    return AtomField(a, b, horizon, np.array(u), np.array(t), np.array(nu, dtype=np.int64), seed=seed)


def atoms_csv_text(field: AtomField) -> str:
    buf = io.StringIO()
    dump_atoms_csv(field, buf)
    return buf.getvalue()


def field_from_sequence(pairs, a: float = 0.0, b: float = 1.0,
                        times=None, horizon=None, seed=None) -> AtomField:
    """Embed an explicit (label, capacity) sequence as a field, arrival order
    becoming time order (t_i = i + 1 unless `times` is given). Used to replay
    hand-written sequences through the particle system."""
    pairs = list(pairs)
    n = len(pairs)
    u = np.array([p[0] for p in pairs], dtype=np.float64)
    nu = np.array([p[1] for p in pairs], dtype=np.int64)
    if times is None:
        t = np.arange(1, n + 1, dtype=np.float64)
    else:
        t = np.asarray(times, dtype=np.float64)
    if horizon is None:
        horizon = float(t[-1]) if n else 1.0
    return AtomField(a, b, horizon, u, t, nu, seed=seed)
