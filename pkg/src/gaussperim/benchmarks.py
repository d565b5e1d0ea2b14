"""Named benchmark geometries shared by the tests, the self-test and the CLI."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (Ball, DomainBall, FullSpace, Halfspace, Region, rotate_domain,
                       rotate_region, rotation_matrix, translate_domain, translate_region,
                       unit_cube)


@dataclass(frozen=True)
class Benchmark:
    name: str
    region: Region
    domain: object
    angle: float  # rotation angle (in the x1-x2 plane) that keeps the domain a valid domain
    shift: tuple[float, ...]

    @property
    def dim(self) -> int:
        return self.region.dim

    def rotated(self):
        R = rotation_matrix(self.dim, self.angle)
        return rotate_region(self.region, R), rotate_domain(self.domain, R)

    def translated(self):
        """Shift both the set and the window (the window stays put on full space)."""
        v = np.asarray(self.shift)
        dom = self.domain if isinstance(self.domain, FullSpace) else translate_domain(self.domain, v)
        return translate_region(self.region, v), dom


BENCHMARKS = {
    b.name: b
    for b in (
        Benchmark("halfspace-1d-cube", Halfspace((1.0,), 0.0), unit_cube(1), 0.0, (0.2,)),
        Benchmark("halfspace-2d-cube", Halfspace((0.0, 1.0), 0.0), unit_cube(2), 0.5 * math.pi,
                  (0.0, 0.2)),
        Benchmark("tilted-halfspace-2d-disk", Halfspace((0.6, 0.8), 0.1),
                  DomainBall((0.0, 0.0), 0.6), 0.7, (0.15, -0.1)),
        Benchmark("halfspace-2d-full", Halfspace((0.0, 1.0), 0.5), FullSpace(), 0.4, (0.0, 0.3)),
        Benchmark("ball-2d-full", Ball((0.3, 0.1), 0.4), FullSpace(), 1.1, (0.25, 0.0)),
    )
}


def benchmark(name: str) -> Benchmark:
    try:
        return BENCHMARKS[name]
    except KeyError:
        raise ValueError(f"unknown benchmark {name!r}; known: {', '.join(BENCHMARKS)}") from None
