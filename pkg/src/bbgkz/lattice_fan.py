"""Rank-2 cone and fan combinatorics.

The cone C is spanned by (0, 1) and (n, 1); its degree-one lattice points are
v_k = (k, 1) for k = 0..n.  A simplicial subdivision of C is determined by the
sorted list of ray indices 0 = i_0 < i_1 < ... < i_{r+1} = n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, NamedTuple


class LatticePoint(NamedTuple):
    a: int
    b: int

    @property
    def degree(self) -> int:
        return self.b

    def __add__(self, other):  # type: ignore[override]
        return LatticePoint(self.a + other[0], self.b + other[1])

    def __sub__(self, other):
        return LatticePoint(self.a - other[0], self.b - other[1])


def v(k: int) -> LatticePoint:
    """Degree-one generator (k, 1)."""
    return LatticePoint(k, 1)


def in_cone(c, n: int) -> bool:
    a, b = c
    return b >= 0 and 0 <= a <= n * b


def is_interior(c, n: int) -> bool:
    a, b = c
    return 0 < a < n * b


def degree_points(n: int, d: int, interior: bool = False) -> list[LatticePoint]:
    """Lattice points of C (or of its interior) with degree exactly ``d``."""
    if d == 0:
        return [] if interior else [LatticePoint(0, 0)]
    if interior:
        return [LatticePoint(a, d) for a in range(1, n * d)]
    return [LatticePoint(a, d) for a in range(0, n * d + 1)]


def points_up_to(n: int, degree_bound: int, interior: bool = False) -> list[LatticePoint]:
    pts: list[LatticePoint] = []
    for d in range(degree_bound + 1):
        pts.extend(degree_points(n, d, interior))
    return pts


class FanError(ValueError):
    pass


@dataclass(frozen=True)
class TwistedSector:
    """An element of Box(Sigma).

    ``m`` is None for the untwisted sector (0, 0).  For a twisted sector,
    (m, 1) = gamma_i * v_i + gamma_j * v_j with i < m < j adjacent rays.
    """

    m: int | None = None
    i: int | None = None
    j: int | None = None
    gamma_i: Fraction = Fraction(0)
    gamma_j: Fraction = Fraction(0)

    @property
    def twisted(self) -> bool:
        return self.m is not None

    @property
    def cone(self) -> tuple[int, int] | None:
        if self.m is None:
            return None
        return (self.i, self.j)

    def coordinates(self) -> dict[int, Fraction]:
        """Fractional coordinates gamma_k, keyed by ray index (empty if untwisted)."""
        if self.m is None:
            return {}
        return {self.i: self.gamma_i, self.j: self.gamma_j}

    @property
    def label(self) -> str:
        return "(0,0)" if self.m is None else f"({self.m},1)"

    @classmethod
    def untwisted(cls) -> "TwistedSector":
        return cls()

    @classmethod
    def in_cone(cls, m: int, i: int, j: int) -> "TwistedSector":
        if not i < m < j:
            raise FanError(f"point ({m},1) is not interior to the cone ({i},{j})")
        return cls(m, i, j, Fraction(j - m, j - i), Fraction(m - i, j - i))


@dataclass(frozen=True)
class Fan:
    n: int
    rays: tuple[int, ...]
    _ray_set: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rays = tuple(int(r) for r in self.rays)
        object.__setattr__(self, "rays", rays)
        if self.n < 1:
            raise FanError(f"n must be >= 1, got {self.n}")
        if len(rays) < 2 or rays[0] != 0 or rays[-1] != self.n:
            raise FanError(f"rays must start at 0 and end at n={self.n}: {list(rays)}")
        if any(b <= a for a, b in zip(rays, rays[1:])):
            raise FanError(f"rays must be strictly increasing: {list(rays)}")
        object.__setattr__(self, "_ray_set", frozenset(rays))

    @classmethod
    def from_dict(cls, data: dict) -> "Fan":
        return cls(int(data["n"]), tuple(data["rays"]))

    def to_dict(self) -> dict:
        return {"n": self.n, "rays": list(self.rays)}

    def __str__(self) -> str:
        return f"({self.n},{list(self.rays)})"

    def is_ray(self, k: int) -> bool:
        return k in self._ray_set

    @property
    def interior_rays(self) -> tuple[int, ...]:
        return self.rays[1:-1]

    @property
    def r(self) -> int:
        return len(self.rays) - 2

    def adjacent_pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.rays, self.rays[1:]))

    def is_cone(self, i: int, j: int) -> bool:
        i, j = min(i, j), max(i, j)
        return (i, j) in set(self.adjacent_pairs())

    def enclosing_cone(self, m: int) -> tuple[int, int]:
        for i, j in self.adjacent_pairs():
            if i <= m <= j:
                return i, j
        raise FanError(f"{m} outside [0, {self.n}]")

    def neighbours(self, k: int) -> tuple[int, int]:
        """Rays immediately left and right of the interior ray ``k``."""
        idx = self.rays.index(k)
        return self.rays[idx - 1], self.rays[idx + 1]


def adjacent_pairs(fan: Fan) -> list[tuple[int, int]]:
    return fan.adjacent_pairs()


def box_elements(fan: Fan) -> list[TwistedSector]:
    """Untwisted sector followed by the twisted sectors in increasing m."""
    out = [TwistedSector.untwisted()]
    for i, j in fan.adjacent_pairs():
        for m in range(i + 1, j):
            out.append(TwistedSector.in_cone(m, i, j))
    return out


def twisted_sectors(fan: Fan) -> list[TwistedSector]:
    return box_elements(fan)[1:]


def dual_sector(sector: TwistedSector) -> TwistedSector:
    if not sector.twisted:
        raise FanError("the untwisted sector has no dual twisted sector")
    return TwistedSector.in_cone(sector.i + sector.j - sector.m, sector.i, sector.j)


def box_count(i: int, j: int) -> int:
    """|Box(sigma_ij)|, counting (0, 0)."""
    if not i < j:
        raise FanError(f"need i < j, got ({i}, {j})")
    return j - i


def all_fans(n: int) -> Iterator[Fan]:
    """All 2^(n-1) subdivisions of the cone for this n."""
    inner = range(1, n)
    for size in range(n):
        for combo in itertools.combinations(inner, size):
            yield Fan(n, (0, *combo, n))
