"""Random-field Potts model: energies, exact Gibbs tables, heat-bath
Monte Carlo, ground states, and the spontaneous magnetization estimator.

The Hamiltonian is H(s) = -[ sum_{i~j} delta(s_i, s_j)
                             + eps * sum_i h_i^{s_i} ],
with both sums over the finite lattice (field at every site, bonds
internal). The inverse temperature enters once, in the Gibbs weight
exp(-beta H). Under wired boundary conditions the |v|_inf = N sites are
clamped to the wired color and never updated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .field import FieldConvention, FieldRealization, sample_field
from .lattice import ORIGIN, BoxSpec, GridSpec, Site, neighbors4


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str  # "wired" | "free"
    color: int = 0

    def __post_init__(self):
        if self.kind not in ("wired", "free"):
            raise ValueError(f"unknown boundary condition {self.kind!r}")

    @property
    def is_wired(self) -> bool:
        return self.kind == "wired"


def wired(color: int = 0) -> BoundaryCondition:
    return BoundaryCondition("wired", color)


def free() -> BoundaryCondition:
    return BoundaryCondition("free")


@dataclass(frozen=True)
class GibbsParams:
    beta: float  # may be math.inf
    epsilon: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


@dataclass(eq=False)
class SpinConfig:
    spec: BoxSpec | GridSpec
    q: int
    spins: np.ndarray
    bc: BoundaryCondition

    def __post_init__(self):
        if self.spins.shape != (self.spec.n_sites,):
            raise ValueError("spin array length does not match spec")
        if self.spins.min() < 0 or self.spins.max() >= self.q:
            raise ValueError("spin labels must lie in 0..q-1")
        if self.bc.is_wired:
            if self.bc.color >= self.q:
                raise ValueError("wired color out of range")
            for i, s in enumerate(self.spec.sites()):
                if self.spec.is_boundary(s) and self.spins[i] != self.bc.color:
                    raise ValueError("wired boundary spin not clamped")

    def copy(self) -> "SpinConfig":
        return SpinConfig(self.spec, self.q, self.spins.copy(), self.bc)


def constant_config(
    spec, q: int, color: int, bc: BoundaryCondition
) -> SpinConfig:
    spins = np.full(spec.n_sites, color, dtype=np.int64)
    if bc.is_wired:
        for i, s in enumerate(spec.sites()):
            if spec.is_boundary(s):
                spins[i] = bc.color
    return SpinConfig(spec, q, spins, bc)


def random_config(spec, q: int, bc: BoundaryCondition, seed: int) -> SpinConfig:
    rng = np.random.Generator(np.random.Philox(seed))
    spins = rng.integers(0, q, size=spec.n_sites)
    if bc.is_wired:
        for i, s in enumerate(spec.sites()):
            if spec.is_boundary(s):
                spins[i] = bc.color
    return SpinConfig(spec, q, spins.astype(np.int64), bc)


def bonds(spec) -> list[tuple[int, int]]:
    """Internal nearest-neighbor index pairs, each once."""
    sites = spec.sites()
    out = []
    for s in sites:
        x, y = s
        for nb in ((x + 1, y), (x, y + 1)):
            if spec.contains(nb):
                out.append((spec.index(s), spec.index(nb)))
    return out


def neighbor_table(spec) -> np.ndarray:
    """(n_sites, 4) neighbor indices, -1 where the neighbor leaves the lattice."""
    sites = spec.sites()
    tab = np.full((len(sites), 4), -1, dtype=np.int64)
    for i, s in enumerate(sites):
        for k, nb in enumerate(neighbors4(s)):
            if spec.contains(nb):
                tab[i, k] = spec.index(nb)
    return tab


def update_sites(spec, bc: BoundaryCondition) -> np.ndarray:
    """Scan-order site indices the sampler may touch (wired sites excluded)."""
    sites = spec.sites()
    if not bc.is_wired:
        return np.arange(len(sites), dtype=np.int64)
    return np.array(
        [i for i, s in enumerate(sites) if not spec.is_boundary(s)], dtype=np.int64
    )


def _check_compat(config: SpinConfig, field: FieldRealization):
    if config.spec != field.spec or config.q != field.q:
        raise ValueError("spin configuration and field disagree on spec or q")


def energy(config: SpinConfig, field: FieldRealization, epsilon: float) -> float:
    """H(s); lower is more probable."""
    _check_compat(config, field)
    s = config.spins
    bond_term = sum(1 for i, j in bonds(config.spec) if s[i] == s[j])
    field_term = float(field.values[np.arange(len(s)), s].sum())
    return -(bond_term + epsilon * field_term)


# ---------------------------------------------------------------------------
# numba kernels


@njit(cache=True)
def _hb_sweeps(spins, neigh, hfield, beta, eps, upd, q, uniforms, rec_mode, rec_idx, qpow, counts):
    """Heat-bath sweeps in fixed scan order.

    rec_mode 0: no recording; 1: histogram of spins[rec_idx[0]] per sweep;
    2: histogram of the joint state of rec_idx (digits base q) per sweep.
    """
    n_sweeps = uniforms.shape[0]
    w = np.empty(q)
    for t in range(n_sweeps):
        for a in range(upd.shape[0]):
            i = upd[a]
            mx = -1e300
            for k in range(q):
                e = eps * hfield[i, k]
                for b in range(4):
                    j = neigh[i, b]
                    if j >= 0 and spins[j] == k:
                        e += 1.0
                w[k] = beta * e
                if w[k] > mx:
                    mx = w[k]
            z = 0.0
            for k in range(q):
                w[k] = np.exp(w[k] - mx)
                z += w[k]
            u = uniforms[t, a] * z
            acc = 0.0
            newk = q - 1
            for k in range(q):
                acc += w[k]
                if u < acc:
                    newk = k
                    break
            spins[i] = newk
        if rec_mode == 1:
            counts[spins[rec_idx[0]]] += 1
        elif rec_mode == 2:
            code = 0
            for d in range(rec_idx.shape[0]):
                code += spins[rec_idx[d]] * qpow[d]
            counts[code] += 1


@njit(cache=True)
def _icm_sweeps(spins, neigh, hfield, eps, upd, q, max_iters):
    """Zero-temperature sweeps (greedy conditional argmin of the energy)
    until a fixed point; ties go to the lowest color. Returns sweeps used."""
    for it in range(max_iters):
        changed = 0
        for a in range(upd.shape[0]):
            i = upd[a]
            best_k = 0
            best_e = -1e300
            for k in range(q):
                e = eps * hfield[i, k]
                for b in range(4):
                    j = neigh[i, b]
                    if j >= 0 and spins[j] == k:
                        e += 1.0
                if e > best_e:
                    best_e = e
                    best_k = k
            if spins[i] != best_k:
                spins[i] = best_k
                changed += 1
        if changed == 0:
            return it + 1
    return max_iters


def conditional_distribution(
    config: SpinConfig, field: FieldRealization, params: GibbsParams, site: Site
) -> np.ndarray:
    """Heat-bath single-site conditional P(s_i = k | rest), length q."""
    _check_compat(config, field)
    i = config.spec.index(site)
    neigh = neighbor_table(config.spec)
    e = np.array(
        [
            params.epsilon * field.values[i, k]
            + sum(
                1
                for j in neigh[i]
                if j >= 0 and config.spins[j] == k
            )
            for k in range(config.q)
        ]
    )
    w = np.exp(params.beta * (e - e.max()))
    return w / w.sum()


def heat_bath_sweep(
    config: SpinConfig,
    field: FieldRealization,
    params: GibbsParams,
    rng: np.random.Generator,
) -> SpinConfig:
    """One full sweep of single-site conditional resampling, in place."""
    return run_heat_bath(config, field, params, sweeps=1, rng=rng)


def run_heat_bath(
    config: SpinConfig,
    field: FieldRealization,
    params: GibbsParams,
    sweeps: int,
    rng: np.random.Generator,
    record: Optional[str] = None,
    record_sites: Optional[list[Site]] = None,
    chunk: int = 50000,
) -> SpinConfig | tuple[SpinConfig, np.ndarray]:
    """Run sweeps; optionally histogram a site color or a joint state per sweep.

    record="site": counts over colors of record_sites[0].
    record="state": counts over the q^k joint states of record_sites,
    encoded with the first site as the lowest digit.
    """
    _check_compat(config, field)
    if not math.isfinite(params.beta):
        raise ValueError("heat bath needs finite beta; use ground_state at beta=inf")
    neigh = neighbor_table(config.spec)
    upd = update_sites(config.spec, config.bc)
    q = config.q
    if record is None:
        rec_mode, rec_idx, qpow, counts = 0, np.zeros(1, np.int64), np.zeros(1, np.int64), np.zeros(1, np.int64)
    else:
        idx = [config.spec.index(s) for s in (record_sites or [ORIGIN])]
        rec_idx = np.array(idx, dtype=np.int64)
        if record == "site":
            rec_mode, qpow, counts = 1, np.zeros(1, np.int64), np.zeros(q, np.int64)
        elif record == "state":
            qpow = q ** np.arange(len(idx), dtype=np.int64)
            rec_mode, counts = 2, np.zeros(q ** len(idx), np.int64)
        else:
            raise ValueError(f"unknown record mode {record!r}")
    chunk = max(1, min(chunk, 5_000_000 // max(len(upd), 1)))
    done = 0
    while done < sweeps:
        m = min(chunk, sweeps - done)
        uniforms = rng.random((m, len(upd)))
        _hb_sweeps(
            config.spins, neigh, field.values, params.beta, params.epsilon,
            upd, q, uniforms, rec_mode, rec_idx, qpow, counts,
        )
        done += m
    if record is None:
        return config
    return config, counts


# ---------------------------------------------------------------------------
# exact Gibbs tables


_MAX_STATES = 2_000_000


@dataclass(eq=False)
class GibbsTable:
    spec: BoxSpec | GridSpec
    q: int
    bc: BoundaryCondition
    free_indices: np.ndarray  # site indices of unconstrained sites
    states: np.ndarray  # (n_states, n_free), lexicographic order
    energies: np.ndarray
    probs: np.ndarray
    base_spins: np.ndarray  # clamped values (arbitrary on free sites)

    def config_for_state(self, row: int) -> np.ndarray:
        spins = self.base_spins.copy()
        spins[self.free_indices] = self.states[row]
        return spins

    def marginal(self, site) -> np.ndarray:
        """Color distribution of one site under the table."""
        i = self.spec.index(site)
        out = np.zeros(self.q)
        where = np.where(self.free_indices == i)[0]
        if len(where) == 0:
            out[self.base_spins[i]] = 1.0
            return out
        col = self.states[:, where[0]]
        for k in range(self.q):
            out[k] = self.probs[col == k].sum()
        return out


def _enumerate_states(q: int, n: int) -> np.ndarray:
    """All q^n assignments, lexicographic with the last site fastest."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*([np.arange(q)] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


def _state_energies(spec, q, field, epsilon, bc, free_idx, states) -> np.ndarray:
    base = constant_config(spec, q, bc.color if bc.is_wired else 0, bc).spins
    n_states = states.shape[0]
    pos = {int(i): a for a, i in enumerate(free_idx)}
    bond_term = np.zeros(n_states)
    const = 0.0
    for i, j in bonds(spec):
        ai, aj = pos.get(i), pos.get(j)
        if ai is not None and aj is not None:
            bond_term += states[:, ai] == states[:, aj]
        elif ai is not None:
            bond_term += states[:, ai] == base[j]
        elif aj is not None:
            bond_term += states[:, aj] == base[i]
        else:
            const += float(base[i] == base[j])
    field_term = np.zeros(n_states)
    for i in range(spec.n_sites):
        a = pos.get(i)
        if a is not None:
            field_term += field.values[i, states[:, a]]
        else:
            const_f = float(field.values[i, base[i]])
            field_term += const_f
    return -(bond_term + const + epsilon * field_term)


def exact_gibbs(
    spec, q: int, field: FieldRealization, params: GibbsParams, bc: BoundaryCondition
) -> GibbsTable:
    """Full probability table over free-site assignments; refuses > 2e6 states."""
    if not math.isfinite(params.beta):
        raise ValueError("exact_gibbs needs finite beta; use ground_state at beta=inf")
    free_idx = update_sites(spec, bc)
    n_states = q ** len(free_idx)
    if n_states > _MAX_STATES:
        raise ValueError(f"state space of {n_states} configurations is too large")
    states = _enumerate_states(q, len(free_idx))
    energies = _state_energies(spec, q, field, params.epsilon, bc, free_idx, states)
    logw = -params.beta * (energies - energies.min())
    w = np.exp(logw)
    probs = w / w.sum()
    base = constant_config(spec, q, bc.color if bc.is_wired else 0, bc).spins
    return GibbsTable(
        spec=spec, q=q, bc=bc, free_indices=free_idx, states=states,
        energies=energies, probs=probs, base_spins=base,
    )


# ---------------------------------------------------------------------------
# ground states


@dataclass(frozen=True)
class GroundStateParams:
    """Annealing ladder for beta=inf searches; best of ``restarts`` chains."""

    beta0: float = 0.5
    beta1: float = 8.0
    sweeps: int = 150
    icm_max_iters: int = 500
    restarts: int = 2


def ground_state(
    spec,
    q: int,
    field: FieldRealization,
    epsilon: float,
    bc: BoundaryCondition,
    method: str = "anneal",
    seed: int = 0,
    params: GroundStateParams = GroundStateParams(),
) -> tuple[SpinConfig, float]:
    """Minimize H. ``exhaustive`` certifies (lexicographically least tie);
    ``anneal``/``icm`` return the best feasible configuration found."""
    free_idx = update_sites(spec, bc)
    if method == "exhaustive":
        n_states = q ** len(free_idx)
        if n_states > _MAX_STATES:
            raise ValueError("state space too large for exhaustive ground state")
        states = _enumerate_states(q, len(free_idx))
        energies = _state_energies(spec, q, field, epsilon, bc, free_idx, states)
        row = int(np.argmin(energies))  # first minimum = lexicographically least
        spins = constant_config(spec, q, bc.color if bc.is_wired else 0, bc).spins
        spins[free_idx] = states[row]
        config = SpinConfig(spec, q, spins, bc)
        e = energy(config, field, epsilon)
        assert abs(e - energies[row]) < 1e-9 * max(1.0, abs(e))
        return config, e
    if method not in ("anneal", "icm"):
        raise ValueError(f"unknown ground-state method {method!r}")
    neigh = neighbor_table(spec)
    upd = update_sites(spec, bc)
    betas = params.beta0 * (params.beta1 / params.beta0) ** (
        np.arange(params.sweeps) / max(params.sweeps - 1, 1)
    )
    dummy = np.zeros(1, np.int64)
    best: tuple[SpinConfig, float] | None = None
    for r in range(max(params.restarts, 1)):
        chain_seed = seed + 0x5851F42D * r
        config = random_config(spec, q, bc, chain_seed)
        if method == "anneal":
            rng = np.random.Generator(np.random.Philox(chain_seed + 0x9E3779B9))
            uniforms = rng.random((params.sweeps, len(upd)))
            for t in range(params.sweeps):
                _hb_sweeps(
                    config.spins, neigh, field.values, betas[t], epsilon, upd, q,
                    uniforms[t : t + 1], 0, dummy, dummy, dummy,
                )
        _icm_sweeps(config.spins, neigh, field.values, epsilon, upd, q, params.icm_max_iters)
        e = energy(config, field, epsilon)
        if best is None or e < best[1]:
            best = (config, e)
    return best


# ---------------------------------------------------------------------------
# spontaneous magnetization


@dataclass(frozen=True)
class MCParams:
    """How to estimate <delta(s_0, wired color)> per realization."""

    sweeps: int = 2000
    burnin: int = 500
    gs_method: str = "anneal"
    gs_params: GroundStateParams = GroundStateParams()


def origin_occupation(
    spec,
    q: int,
    field: FieldRealization,
    beta: float,
    epsilon: float,
    bc: BoundaryCondition,
    mc: MCParams,
    seed: int,
    target_color: int = 0,
) -> float:
    """<delta(s_0, target_color)> under the given boundary condition."""
    if not math.isfinite(beta):
        config, _ = ground_state(
            spec, q, field, epsilon, bc, method=mc.gs_method, seed=seed, params=mc.gs_params
        )
        return float(config.spins[spec.index(ORIGIN)] == target_color)
    params = GibbsParams(beta=beta, epsilon=epsilon)
    rng = np.random.Generator(np.random.Philox(seed))
    config = random_config(spec, q, bc, seed + 1)
    run_heat_bath(config, field, params, sweeps=mc.burnin, rng=rng)
    _, counts = run_heat_bath(
        config, field, params, sweeps=mc.sweeps, rng=rng,
        record="site", record_sites=[ORIGIN],
    )
    return float(counts[target_color] / counts.sum())


def magnetization(
    spec: BoxSpec,
    q: int,
    epsilon: float,
    beta: float,
    disorder_samples: int,
    mc_params: MCParams,
    base_seed: int,
    convention: FieldConvention = FieldConvention.UNIT,
    wired_color: int = 0,
    field_factory=None,
) -> tuple[float, float]:
    """Disorder-averaged wired-free overlap gap, normalized to [~, 1].

    m = (q/(q-1)) * E[ p_wired - p_free ], p_* = <delta(s_0, wired color)>.
    Returns (mean, standard error over realizations).
    """
    if disorder_samples < 2:
        raise ValueError("need at least 2 disorder samples")
    factory = field_factory or sample_field
    vals = np.empty(disorder_samples)
    for i in range(disorder_samples):
        seed = base_seed + i
        f = factory(spec, q, epsilon, seed, convention)
        p_w = origin_occupation(
            spec, q, f, beta, epsilon, wired(wired_color), mc_params, seed * 2 + 1,
            target_color=wired_color,
        )
        p_f = origin_occupation(
            spec, q, f, beta, epsilon, free(), mc_params, seed * 2 + 2,
            target_color=wired_color,
        )
        vals[i] = p_w - p_f
    scale = q / (q - 1)
    mean = scale * float(vals.mean())
    stderr = scale * float(vals.std(ddof=1) / math.sqrt(len(vals)))
    return mean, stderr
