"""Quenched Gaussian field on a box: generation, weights, persistence.

Each (site, color) entry is produced by a 64-bit counter hash keyed on
(seed, x, y, color) and pushed through the inverse normal CDF, so values
depend only on coordinates, never on generation order or box size: the
field on Lambda_4 is the restriction of the field on Lambda_8 for the
same seed. That nesting is what makes greedy-animal scores monotone in N
sample by sample.
"""

from __future__ import annotations

import enum
import os
import tempfile
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .lattice import BoxSpec, GridSpec, LatticeAnimal, Site


class FieldConvention(enum.Enum):
    """Variance convention for the per-color field entries.

    UNIT: entries ~ N(0, 1), strength enters the Hamiltonian as eps * h.
    LITERAL: entries ~ N(0, eps^-2), the stated distribution of the field;
    realized as the unit-variance draw divided by eps, so the bridge
    identity literal == unit / eps holds bit-for-bit at equal seeds.
    """

    UNIT = "unit-variance"
    LITERAL = "paper-literal"

    @property
    def short(self) -> str:
        return "unit" if self is FieldConvention.UNIT else "literal"

    @classmethod
    def from_short(cls, tag: str) -> "FieldConvention":
        if tag == "unit":
            return cls.UNIT
        if tag == "literal":
            return cls.LITERAL
        raise ValueError(f"unknown field convention tag {tag!r}")


_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLD = np.uint64(0x9E3779B97F4A7C15)


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _counter_normals(seed: int, xs, ys, alphas) -> np.ndarray:
    """Standard normals keyed by (seed, x, y, alpha); order-independent."""
    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        s = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLD)
        h = _mix(s ^ xs.astype(np.int64).view(np.uint64))
        h = _mix((h + _GOLD) ^ ys.astype(np.int64).view(np.uint64))
        h = _mix((h + _GOLD) ^ alphas.astype(np.int64).view(np.uint64))
    u = ((h >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0 ** -53)
    return ndtri(u)


@dataclass(frozen=True, eq=False)
class FieldRealization:
    """Frozen field h_i^alpha on a box: shape (n_sites, q), row-major sites."""

    spec: BoxSpec | GridSpec
    q: int
    epsilon: float
    seed: int
    convention: FieldConvention
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.spec.n_sites, self.q):
            raise ValueError("field array shape does not match spec and q")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite entries")
        self.values.setflags(write=False)

    def site_totals(self) -> np.ndarray:
        """Per-site sum over colors; the numerator contribution of one site."""
        cached = getattr(self, "_site_totals", None)
        if cached is None:
            cached = self.values.sum(axis=1)
            cached.setflags(write=False)
            object.__setattr__(self, "_site_totals", cached)
        return cached

    def value(self, site: Site, alpha: int) -> float:
        return float(self.values[self.spec.index(site), alpha])


def sample_field(
    spec: BoxSpec | GridSpec,
    q: int,
    epsilon: float,
    seed: int,
    convention: FieldConvention = FieldConvention.UNIT,
) -> FieldRealization:
    """Draw the quenched field; deterministic in (spec, q, eps, seed, convention)."""
    if q < 2:
        raise ValueError(f"need q >= 2 colors, got {q}")
    if not epsilon > 0:
        raise ValueError(f"field strength must be positive, got {epsilon}")
    sites = spec.sites()
    xs = np.repeat(np.array([s[0] for s in sites], dtype=np.int64), q)
    ys = np.repeat(np.array([s[1] for s in sites], dtype=np.int64), q)
    alphas = np.tile(np.arange(q, dtype=np.int64), len(sites))
    z = _counter_normals(seed, xs, ys, alphas).reshape(len(sites), q)
    if convention is FieldConvention.LITERAL:
        z = z / epsilon
    return FieldRealization(
        spec=spec, q=q, epsilon=float(epsilon), seed=int(seed), convention=convention, values=z
    )


def zero_field(
    spec: BoxSpec | GridSpec, q: int, epsilon: float = 1.0
) -> FieldRealization:
    """All-zero field; degenerate-disorder test hook."""
    return FieldRealization(
        spec=spec,
        q=q,
        epsilon=float(epsilon),
        seed=0,
        convention=FieldConvention.UNIT,
        values=np.zeros((spec.n_sites, q)),
    )


def constant_field(
    spec: BoxSpec | GridSpec, q: int, fill: float, epsilon: float = 1.0
) -> FieldRealization:
    return FieldRealization(
        spec=spec,
        q=q,
        epsilon=float(epsilon),
        seed=0,
        convention=FieldConvention.UNIT,
        values=np.full((spec.n_sites, q), float(fill)),
    )


def animal_weight(field: FieldRealization, animal: LatticeAnimal | tuple) -> float:
    """w(A) = sum over sites of A of the per-site color sums."""
    sites = animal.sites if isinstance(animal, LatticeAnimal) else tuple(animal)
    idx = [field.spec.index(s) for s in sites]
    return float(field.site_totals()[idx].sum())


_HEADER_PREFIX = "RFPM-FIELD"
_VERSION = "v1"


def save_field(field: FieldRealization, path) -> None:
    """Write the text format; 17 significant digits round-trips float64."""
    if not isinstance(field.spec, BoxSpec):
        raise ValueError("only box fields have an on-disk format")
    header = (
        f"{_HEADER_PREFIX} {_VERSION} N={field.spec.N} q={field.q} "
        f"eps={field.epsilon:.17g} seed={field.seed} conv={field.convention.short}"
    )
    dirname = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=dirname, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(header + "\n")
            for v in field.values.ravel():
                fh.write(f"{v:.17g}\n")
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


class FieldFormatError(ValueError):
    pass


def load_field(path) -> FieldRealization:
    with open(path) as fh:
        header = fh.readline().strip()
        parts = header.split()
        if len(parts) != 7 or parts[0] != _HEADER_PREFIX:
            raise FieldFormatError(f"bad field header: {header!r}")
        if parts[1] != _VERSION:
            raise FieldFormatError(f"unsupported field file version {parts[1]!r}")
        kv = dict(p.split("=", 1) for p in parts[2:])
        spec = BoxSpec(N=int(kv["N"]))
        q = int(kv["q"])
        eps = float(kv["eps"])
        seed = int(kv["seed"])
        conv = FieldConvention.from_short(kv["conv"])
        values = np.array([float(line) for line in fh if line.strip()])
    expected = spec.n_sites * q
    if values.size != expected:
        raise FieldFormatError(
            f"field payload has {values.size} entries, header implies {expected}"
        )
    return FieldRealization(
        spec=spec, q=q, epsilon=eps, seed=seed, convention=conv,
        values=values.reshape(spec.n_sites, q),
    )
