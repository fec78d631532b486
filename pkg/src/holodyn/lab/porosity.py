"""Grid search for Julia-free holes in the balls ``B(z, 2**-j)``.

A lattice sample is a *hit* when its orbit stays bounded for the whole
escape budget (filled-Julia indicator).  For each candidate center ``q``
in the ball, the hole radius is the distance from ``q`` to the nearest
hit, capped so that the hole stays inside the ball.  Candidate centers
live on their own lattice, so refining the sample lattice can only add
hits and never enlarges a reported hole.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..core import MapSpec, escape_radius

#: Below this lattice size the probe is reported as low resolution.
LOW_RESOLUTION_GRID = 8
_CHUNK = 2048


@dataclass(frozen=True)
class PorosityProbe:
    z: complex
    j_values: tuple
    hole_radii: tuple
    grid: int
    center_grid: int
    escape_budget: int
    low_resolution: bool

    def rows(self):
        for j, rho in zip(self.j_values, self.hole_radii):
            yield j, 2.0**-j, rho

    def summary(self) -> dict:
        return {
            "z": [self.z.real, self.z.imag],
            "j_values": list(self.j_values),
            "hole_radii": list(self.hole_radii),
            "grid": self.grid,
            "center_grid": self.center_grid,
            "escape_budget": self.escape_budget,
            "low_resolution": self.low_resolution,
        }


def lattice(z: complex, R: float, g: int) -> np.ndarray:
    """Points of a ``g x g`` square lattice on ``[-R, R]^2 + z`` that lie in ``B(z, R)``."""
    if g < 1:
        raise ValueError("grid must be >= 1")
    if g == 1:
        return np.array([complex(z)])
    t = np.linspace(-R, R, g)
    pts = (t[None, :] + 1j * t[:, None]).ravel()
    return z + pts[np.abs(pts) <= R * (1 + 1e-12)]


def bounded_mask(map: MapSpec, pts: np.ndarray, escape_budget: int) -> np.ndarray:
    """True where the orbit survives ``escape_budget`` steps without escaping."""
    R = escape_radius(map)
    alive = np.ones(len(pts), dtype=bool)
    active = np.arange(len(pts))
    cur = pts.astype(np.complex128)
    for _ in range(escape_budget):
        if map.is_poly:
            cur = (cur * cur if map.d == 2 else cur**map.d) + map.c
            gone = ~np.isfinite(cur) | (np.abs(cur) > R)
        else:
            with np.errstate(over="ignore", invalid="ignore"):
                cur = map.a * np.exp(cur)
            gone = ~np.isfinite(cur) | (cur.real > R)
        if gone.any():
            alive[active[gone]] = False
            active, cur = active[~gone], cur[~gone]
        if not len(active):
            break
    return alive


def hole_radius(z: complex, R: float, centers: np.ndarray, hits: np.ndarray) -> float:
    """Largest ``min(R - |q - z|, dist(q, hits))`` over the centers, divided by ``R``."""
    room = R - np.abs(centers - z)
    if len(hits) == 0:
        return float(np.clip(np.max(room) / R, 0.0, 1.0))
    best = 0.0
    for lo in range(0, len(centers), _CHUNK):
        q = centers[lo : lo + _CHUNK]
        dist = np.min(np.abs(q[:, None] - hits[None, :]), axis=1)
        best = max(best, float(np.max(np.minimum(room[lo : lo + _CHUNK], dist))))
    return min(max(best / R, 0.0), 1.0)


def porosity_probe(
    map: MapSpec,
    z: complex,
    j_list: Sequence[int],
    grid: int,
    escape_budget: int = 200,
    center_grid: Optional[int] = None,
) -> PorosityProbe:
    """Relative hole radius ``rho_j`` in ``B(z, 2**-j)`` for each ``j``.

    ``grid = 1`` probes the single point ``z`` and gives ``rho`` in
    ``{0, 1}``.  An odd ``grid`` puts samples on the axes through ``z``,
    which matters when the Julia set is a segment through ``z``.
    """
    z = complex(z)
    if center_grid is None:
        center_grid = grid
    radii = []
    for j in j_list:
        R = 2.0 ** -int(j)
        pts = lattice(z, R, grid)
        hits = pts[bounded_mask(map, pts, escape_budget)]
        if grid == 1:
            radii.append(0.0 if len(hits) else 1.0)
            continue
        centers = lattice(z, R, center_grid)
        radii.append(hole_radius(z, R, centers, hits))
    return PorosityProbe(
        z=z,
        j_values=tuple(int(j) for j in j_list),
        hole_radii=tuple(radii),
        grid=grid,
        center_grid=center_grid,
        escape_budget=escape_budget,
        low_resolution=grid < LOW_RESOLUTION_GRID,
    )
