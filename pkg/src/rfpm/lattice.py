"""Geometry of centered boxes in Z^2 and simply connected lattice animals.

Sites are plain ``(x, y)`` integer tuples. An animal is a nonempty,
4-connected set of sites whose complement in Z^2 is 4-connected (no holes,
including diagonal-pinch holes). The edge boundary is always taken in the
full lattice, never clipped to the box.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

Site = tuple[int, int]

ORIGIN: Site = (0, 0)

_N4 = ((1, 0), (-1, 0), (0, 1), (0, -1))
# 8-neighborhood ring in cyclic order; consecutive entries are 4-adjacent
# to each other, which is what makes run counting equivalent to local
# connectivity of both the animal and its complement.
_RING = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))


@dataclass(frozen=True)
class BoxSpec:
    """Centered box Lambda_N = { v in Z^2 : |v|_inf <= N }."""

    N: int

    def __post_init__(self):
        if self.N < 0:
            raise ValueError(f"box half-side must be >= 0, got {self.N}")

    @property
    def side(self) -> int:
        return 2 * self.N + 1

    @property
    def n_sites(self) -> int:
        return self.side * self.side

    def sites(self) -> list[Site]:
        """All sites in row-major order (y outer, x inner, each from -N to N)."""
        n = self.N
        return [(x, y) for y in range(-n, n + 1) for x in range(-n, n + 1)]

    def contains(self, site: Site) -> bool:
        x, y = site
        return abs(x) <= self.N and abs(y) <= self.N

    def index(self, site: Site) -> int:
        """Row-major index of a site, matching :meth:`sites` order."""
        x, y = site
        if not self.contains(site):
            raise ValueError(f"site {site} outside box N={self.N}")
        return (y + self.N) * self.side + (x + self.N)

    def is_boundary(self, site: Site) -> bool:
        x, y = site
        return max(abs(x), abs(y)) == self.N


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned nx-by-ny grid with sites (x, y), 0 <= x < nx, 0 <= y < ny.

    Not a paper object; used where a small non-centered lattice is handier
    than a full box (e.g. exercising samplers on a 2x2 grid).
    """

    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid dimensions must be >= 1")

    @property
    def n_sites(self) -> int:
        return self.nx * self.ny

    def sites(self) -> list[Site]:
        return [(x, y) for y in range(self.ny) for x in range(self.nx)]

    def contains(self, site: Site) -> bool:
        x, y = site
        return 0 <= x < self.nx and 0 <= y < self.ny

    def index(self, site: Site) -> int:
        x, y = site
        if not self.contains(site):
            raise ValueError(f"site {site} outside grid {self.nx}x{self.ny}")
        return y * self.nx + x

    def is_boundary(self, site: Site) -> bool:
        x, y = site
        return x in (0, self.nx - 1) or y in (0, self.ny - 1)


def sites_of_box(spec: BoxSpec) -> list[Site]:
    return spec.sites()


def neighbors4(site: Site) -> list[Site]:
    x, y = site
    return [(x + dx, y + dy) for dx, dy in _N4]


def edge_boundary(sites: Iterable[Site]) -> int:
    """Number of Z^2 edges with exactly one endpoint in the set.

    Counted in the full lattice: |dA| = 4|A| - 2 * (internal bonds).
    """
    s = set(sites)
    if not s:
        raise ValueError("edge boundary of the empty set is undefined")
    internal = sum(1 for (x, y) in s if (x + 1, y) in s) + sum(
        1 for (x, y) in s if (x, y + 1) in s
    )
    return 4 * len(s) - 2 * internal


def is_connected4(sites: Iterable[Site]) -> bool:
    s = set(sites)
    if not s:
        return False
    start = next(iter(s))
    seen = {start}
    stack = [start]
    while stack:
        cur = stack.pop()
        for nb in neighbors4(cur):
            if nb in s and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(s)


def has_no_holes(sites: Iterable[Site]) -> bool:
    """True iff the complement in Z^2 is 4-connected.

    Flood-fills the complement inside the bounding box padded by one; any
    empty cell unreached from the padding ring sits in a bounded component.
    """
    s = set(sites)
    if not s:
        return True
    xs = [x for x, _ in s]
    ys = [y for _, y in s]
    x0, x1 = min(xs) - 1, max(xs) + 1
    y0, y1 = min(ys) - 1, max(ys) + 1
    start = (x0, y0)
    seen = {start}
    stack = [start]
    while stack:
        cx, cy = stack.pop()
        for nx, ny in neighbors4((cx, cy)):
            if x0 <= nx <= x1 and y0 <= ny <= y1 and (nx, ny) not in seen and (nx, ny) not in s:
                seen.add((nx, ny))
                stack.append((nx, ny))
    total_empty = (x1 - x0 + 1) * (y1 - y0 + 1) - len(s)
    return len(seen) == total_empty


def is_simply_connected(sites: Iterable[Site]) -> bool:
    s = set(sites)
    if not s:
        return False
    return is_connected4(s) and has_no_holes(s)


def canonical_sites(sites: Iterable[Site]) -> tuple[Site, ...]:
    """Row-major (y, x) sorted tuple; the canonical serialized order."""
    return tuple(sorted(sites, key=lambda s: (s[1], s[0])))


@dataclass(frozen=True)
class LatticeAnimal:
    """Simply connected animal with its cached edge-boundary size."""

    sites: tuple[Site, ...]
    boundary_size: int

    @classmethod
    def from_sites(cls, sites: Iterable[Site], check: bool = True) -> "LatticeAnimal":
        canon = canonical_sites(sites)
        if check and not is_simply_connected(canon):
            raise ValueError("site set is not a simply connected animal")
        return cls(sites=canon, boundary_size=edge_boundary(canon))

    @property
    def size(self) -> int:
        return len(self.sites)

    def contains_origin(self) -> bool:
        return ORIGIN in set(self.sites)

    def to_line(self) -> str:
        """Canonical text form: ``size boundary x1,y1 x2,y2 ...``."""
        coords = " ".join(f"{x},{y}" for x, y in self.sites)
        return f"{self.size} {self.boundary_size} {coords}"

    @classmethod
    def from_line(cls, line: str) -> "LatticeAnimal":
        parts = line.split()
        size, boundary = int(parts[0]), int(parts[1])
        sites = []
        for tok in parts[2:]:
            xs, ys = tok.split(",")
            sites.append((int(xs), int(ys)))
        if len(sites) != size:
            raise ValueError("animal line: site count does not match header")
        animal = cls.from_sites(sites)
        if animal.boundary_size != boundary:
            raise ValueError("animal line: stated boundary does not match sites")
        return animal


def _ring_runs(occupied_test: Callable[[Site], bool], c: Site) -> tuple[int, int]:
    """(number of cyclic runs of occupied ring cells, occupied count)."""
    cx, cy = c
    flags = [occupied_test((cx + dx, cy + dy)) for dx, dy in _RING]
    count = sum(flags)
    if count in (0, 8):
        return (0 if count == 0 else 1), count
    runs = sum(1 for i in range(8) if flags[i] and not flags[i - 1])
    return runs, count


def can_add(occupied: set[Site], c: Site) -> bool:
    """True iff adding empty cell ``c`` keeps the animal simply connected.

    Local criterion: c has a filled 4-neighbor and the filled cells of its
    8-ring form a single cyclic run. Exact for simply connected animals
    under the 4-connected-set / 4-connected-complement convention.
    """
    if c in occupied:
        return False
    cx, cy = c
    if not any((cx + dx, cy + dy) in occupied for dx, dy in _N4):
        return False
    runs, _ = _ring_runs(occupied.__contains__, c)
    return runs == 1


def can_remove(occupied: set[Site], c: Site) -> bool:
    """True iff removing ``c`` keeps the animal nonempty and simply connected."""
    if c not in occupied or len(occupied) == 1:
        return False
    cx, cy = c
    if all((cx + dx, cy + dy) in occupied for dx, dy in _N4):
        return False  # interior cell: removal opens a hole
    runs, count = _ring_runs(occupied.__contains__, c)
    return count > 0 and runs == 1


def _parent_cell(occupied: set[Site], origin: Site = ORIGIN) -> Site:
    """Largest (row-major) non-origin cell whose removal stays valid.

    Every simply connected animal with >= 2 cells has at least two valid
    removals, so one of them is not the origin.
    """
    best = None
    for c in occupied:
        if c == origin:
            continue
        if can_remove(occupied, c):
            if best is None or (c[1], c[0]) > (best[1], best[0]):
                best = c
    assert best is not None, "simply connected animal with no removable cell"
    return best


def enumerate_animals(
    spec: BoxSpec, max_size: int, origin: Site = ORIGIN
) -> Iterator[LatticeAnimal]:
    """Yield every simply connected animal in the box containing the origin.

    Reverse search over the add/remove move graph: each animal of size k+1
    is emitted only from its canonical parent (itself minus its largest
    removable non-origin cell), so each appears exactly once and memory is
    proportional to the recursion depth. The count grows exponentially in
    ``max_size``; sizes much beyond 10 on non-trivial boxes are infeasible.
    """
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    if not spec.contains(origin):
        raise ValueError("origin outside box")

    occupied = {origin}
    yield LatticeAnimal(sites=(origin,), boundary_size=4)

    def candidates() -> list[Site]:
        cand = set()
        for x, y in occupied:
            for dx, dy in _N4:
                nb = (x + dx, y + dy)
                if nb not in occupied and spec.contains(nb):
                    cand.add(nb)
        return sorted(cand, key=lambda s: (s[1], s[0]))

    def recurse():
        if len(occupied) >= max_size:
            return
        for c in candidates():
            if not can_add(occupied, c):
                continue
            occupied.add(c)
            if _parent_cell(occupied, origin) == c:
                yield LatticeAnimal(
                    sites=canonical_sites(occupied),
                    boundary_size=edge_boundary(occupied),
                )
                yield from recurse()
            occupied.remove(c)

    yield from recurse()


def write_animals(animals: Iterable[LatticeAnimal], path) -> int:
    n = 0
    with open(path, "w") as fh:
        for a in animals:
            fh.write(a.to_line() + "\n")
            n += 1
    return n


def read_animals(path) -> list[LatticeAnimal]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(LatticeAnimal.from_line(line))
    return out
