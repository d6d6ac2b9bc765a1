"""Event-driven particle system on a strip, and its space-time line diagram.

Atoms arrive in time order. Each atom (u, t, nu) creates a particle at
position u with nu lives; the living particle with the largest position
strictly below u (if any) becomes its father, loses one life, and dies when
none remain. The diagram records one horizontal line per atom (from the
father's position, or from the strip's left boundary when the atom roots a
new tree) and one vertical line per particle lifetime.

Counting rootless lines over a time window is the continuum analogue of the
sorter's tree count; the two are related by reading atoms in time order,
which the test suite checks exactly, realization by realization.

Window conventions are half-open, (s, t]: window counts over consecutive
windows then add up exactly to the count over their union.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .poisson_field import AtomField


class HLine(NamedTuple):
    t: float
    x0: float
    x1: float
    rootless: bool


class VLine(NamedTuple):
    x: float
    t0: float
    t1: float
    open: bool     # still alive at the horizon


@dataclass(frozen=True)
class WindowCounts:
    i_min: int
    i_max: int
    counts: tuple[int, ...]
    base: float = math.e

    def total(self) -> int:
        return int(sum(self.counts))


class GraphicalRep:
    """Line diagram of one simulation run, backed by flat arrays.

    father[i] is the index of the atom that atom i attached to (-1 for a
    root); death[i] is the index of the atom that consumed particle i's last
    life (-1 if the particle is still alive at the horizon).
    """

    __slots__ = ("a", "b", "horizon", "atom_u", "atom_t", "atom_nu", "father", "death")

    def __init__(self, a, b, horizon, atom_u, atom_t, atom_nu, father, death):
        self.a = float(a)
        self.b = float(b)
        self.horizon = float(horizon)
        self.atom_u = np.asarray(atom_u, dtype=np.float64)
        self.atom_t = np.asarray(atom_t, dtype=np.float64)
        self.atom_nu = np.asarray(atom_nu, dtype=np.int64)
        self.father = np.asarray(father, dtype=np.int64)
        self.death = np.asarray(death, dtype=np.int64)

    def __len__(self) -> int:
        return self.atom_u.size

    # -- line views --------------------------------------------------------

    def h_x_left(self) -> np.ndarray:
        """Left endpoint of each horizontal line (strip boundary for roots)."""
        if len(self) == 0:
            return np.empty(0, dtype=np.float64)
        safe = np.maximum(self.father, 0)
        return np.where(self.father >= 0, self.atom_u[safe], self.a)

    def rootless_heights(self) -> np.ndarray:
        return self.atom_t[self.father < 0]

    def death_times(self) -> np.ndarray:
        """Per particle: time its last life was consumed, horizon if open."""
        if len(self) == 0:
            return np.empty(0, dtype=np.float64)
        safe = np.maximum(self.death, 0)
        return np.where(self.death >= 0, self.atom_t[safe], self.horizon)

    def h_lines(self) -> list[HLine]:
        x0 = self.h_x_left()
        return [
            HLine(float(t), float(l), float(u), bool(f < 0))
            for t, l, u, f in zip(self.atom_t, x0, self.atom_u, self.father)
        ]

    def v_lines(self) -> list[VLine]:
        t1 = self.death_times()
        return [
            VLine(float(u), float(t), float(d), bool(k < 0))
            for u, t, d, k in zip(self.atom_u, self.atom_t, t1, self.death)
        ]

    def living_particles(self) -> list[tuple[float, int]]:
        """(position, remaining lives) of particles alive at the horizon,
        sorted by position."""
        n = len(self)
        used = np.bincount(self.father[self.father >= 0], minlength=n) if n else np.zeros(0, np.int64)
        alive = self.death < 0
        out = [(float(u), int(nu - c)) for u, nu, c, ok in
               zip(self.atom_u, self.atom_nu, used, alive) if ok]
        out.sort()
        return out

    # -- counting queries ---------------------------------------------------

    def count_roots(self, s: float, t: float) -> int:
        """Rootless lines with height in (s, t]."""
        if not (0.0 <= s < t <= self.horizon):
            raise ValueError(f"window ({s!r}, {t!r}] not inside (0, {self.horizon!r}]")
        h = self.rootless_heights()
        return int(np.count_nonzero((h > s) & (h <= t)))

    def count_crossings(self, x: float, s: float, t: float) -> int:
        """Horizontal lines with height in (s, t] crossing the vertical segment
        at position x (x_left <= x < x_right)."""
        if not (self.a <= x < self.b):
            raise ValueError(f"x={x!r} outside strip [{self.a!r}, {self.b!r})")
        if not (0.0 <= s < t <= self.horizon):
            raise ValueError(f"window ({s!r}, {t!r}] not inside (0, {self.horizon!r}]")
        x0 = self.h_x_left()
        mask = (self.atom_t > s) & (self.atom_t <= t) & (x0 <= x) & (x < self.atom_u)
        return int(np.count_nonzero(mask))

    def window_counts(self, i_min: int, i_max: int, base: float = math.e) -> WindowCounts:
        """Rootless-line counts over the windows (base^i, base^(i+1)],
        i = i_min..i_max. Consecutive windows tile, so the counts add up to
        the count over the full range exactly."""
        if i_min > i_max:
            return WindowCounts(i_min, i_max, (), base)
        required = base ** (i_max + 1)
        if required > self.horizon * (1.0 + 1e-9):
            raise ValueError(
                f"window range needs horizon >= {required!r}, rep has {self.horizon!r}")
        counts = []
        for i in range(i_min, i_max + 1):
            lo = base ** i
            hi = min(base ** (i + 1), self.horizon)
            counts.append(self.count_roots(lo, hi))
        return WindowCounts(i_min, i_max, tuple(counts), base)

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "strip": [self.a, self.b],
            "horizon": self.horizon,
            "h_lines": [
                {"t": l.t, "x0": l.x0, "x1": l.x1, "rootless": l.rootless}
                for l in self.h_lines()
            ],
            "v_lines": [
                {"x": l.x, "t0": l.t0, "t1": l.t1, "open": l.open}
                for l in self.v_lines()
            ],
        }


def simulate(field: AtomField) -> GraphicalRep:
    """Run the particle dynamics over a field's atoms (already time-sorted)."""
    n = len(field)
    if n == 0:
        e = np.empty(0, dtype=np.int64)
        return GraphicalRep(field.a, field.b, field.horizon,
                            np.empty(0), np.empty(0), e, e, e)
    from . import _kernels
    father, death, _ = _kernels.run_ranked(field.u, field.nu)
    return GraphicalRep(field.a, field.b, field.horizon,
                        field.u, field.t, field.nu, father, death)


# ---------------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------------

_SVG_STYLE = (
    "line.vline{stroke:#888;stroke-width:1}"
    "line.hline{stroke:#1f6fb2;stroke-width:1}"
    "line.hline.rootless{stroke:#c23b22}"
    "path.cross{stroke:#222;stroke-width:1;fill:none}"
    "rect.frame{fill:none;stroke:#000;stroke-width:1}"
)


def render_svg(rep: GraphicalRep, field: AtomField,
               width_px: int = 900, height_px: int = 500) -> str:
    """Standalone SVG of the diagram: crosses at atoms, vertical lifetime
    segments, horizontal father links (rootless ones reach the left edge)."""
    if width_px <= 0 or height_px <= 0:
        raise ValueError("pixel dimensions must be positive")
    pad = 20.0
    a, b, horizon = rep.a, rep.b, rep.horizon
    sx = (width_px - 2 * pad) / (b - a)
    sy = (height_px - 2 * pad) / horizon

    def X(x: float) -> float:
        return pad + (x - a) * sx

    def Y(t: float) -> float:
        return height_px - pad - t * sy

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px}" height="{height_px}" '
        f'viewBox="0 0 {width_px} {height_px}">',
        f"<style>{_SVG_STYLE}</style>",
        f'<rect class="frame" x="{pad}" y="{pad}" '
        f'width="{width_px - 2 * pad}" height="{height_px - 2 * pad}"/>',
    ]
    for v in rep.v_lines():
        parts.append(
            f'<line class="vline" x1="{X(v.x):.2f}" y1="{Y(v.t0):.2f}" '
            f'x2="{X(v.x):.2f}" y2="{Y(v.t1):.2f}"/>'
        )
    for h in rep.h_lines():
        cls = "hline rootless" if h.rootless else "hline"
        parts.append(
            f'<line class="{cls}" x1="{X(h.x0):.2f}" y1="{Y(h.t):.2f}" '
            f'x2="{X(h.x1):.2f}" y2="{Y(h.t):.2f}"/>'
        )
    r = 3.0
    for u, t in zip(field.u, field.t):
        cx, cy = X(float(u)), Y(float(t))
        parts.append(
            f'<path class="cross" d="M{cx - r:.2f} {cy - r:.2f}L{cx + r:.2f} {cy + r:.2f}'
            f'M{cx - r:.2f} {cy + r:.2f}L{cx + r:.2f} {cy - r:.2f}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
