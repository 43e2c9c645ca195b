import itertools

import numpy as np
import pytest

from rfpm.field import FieldConvention, constant_field, sample_field, zero_field
from rfpm.lattice import ORIGIN, BoxSpec, GridSpec
from rfpm.potts import (
    GibbsParams,
    GroundStateParams,
    MCParams,
    SpinConfig,
    bonds,
    conditional_distribution,
    constant_config,
    energy,
    exact_gibbs,
    free,
    ground_state,
    magnetization,
    origin_occupation,
    random_config,
    run_heat_bath,
    wired,
)

import oracles


def make_config(spec, q, spins, bc):
    """Clamp the boundary when wired, then build a config."""
    spins = np.asarray(spins, dtype=np.int64).copy()
    if bc.is_wired:
        for i, s in enumerate(spec.sites()):
            if spec.is_boundary(s):
                spins[i] = bc.color
    return SpinConfig(spec, q, spins, bc)


def grid_field(spec, q, seed, epsilon=1.0):
    return sample_field(spec, q, epsilon, seed=seed)


# ---------------------------------------------------------------------------
# energy


def test_energy_all_equal_zero_field():
    spec = BoxSpec(1)
    cfg = constant_config(spec, 3, 0, free())
    assert energy(cfg, zero_field(spec, 3), 1.0) == -12.0


def test_energy_single_site():
    spec = BoxSpec(0)
    field = sample_field(spec, 3, 1.0, seed=4)
    for c in range(3):
        cfg = constant_config(spec, 3, c, free())
        assert energy(cfg, field, 0.5) == pytest.approx(-0.5 * field.values[0, c])


def test_energy_ising_affine_identity():
    """q=2 energy equals the +-1 spin form on every configuration of the box."""
    spec = BoxSpec(1)
    field = sample_field(spec, 2, 1.0, seed=3)
    eps = 0.8
    pairs = bonds(spec)
    n_b = len(pairs)
    h0, h1 = field.values[:, 0], field.values[:, 1]
    for bc in (free(), wired(1)):
        for assignment in itertools.product((0, 1), repeat=spec.n_sites):
            cfg = make_config(spec, 2, assignment, bc)
            sigma = 2 * cfg.spins - 1
            ising = -(
                0.5 * n_b
                + 0.5 * sum(sigma[i] * sigma[j] for i, j in pairs)
                + eps * (0.5 * (h1 + h0).sum() + 0.5 * float(sigma @ (h1 - h0)))
            )
            assert energy(cfg, field, eps) == pytest.approx(ising, abs=1e-12)


def test_energy_color_permutation_invariance_zero_field():
    spec = BoxSpec(1)
    f = zero_field(spec, 3)
    cfg = random_config(spec, 3, free(), seed=5)
    permuted = SpinConfig(spec, 3, (cfg.spins + 1) % 3, free())
    assert energy(cfg, f, 1.0) == energy(permuted, f, 1.0)


# ---------------------------------------------------------------------------
# exact Gibbs


def test_exact_gibbs_uniform_at_tiny_beta():
    spec = GridSpec(2, 2)
    table = exact_gibbs(spec, 3, grid_field(spec, 3, 0), GibbsParams(1e-12, 1.0), free())
    assert np.allclose(table.probs, 1.0 / 81.0, atol=1e-9)


def test_exact_gibbs_matches_naive_summation():
    spec = GridSpec(2, 2)
    field = grid_field(spec, 3, 7)
    params = GibbsParams(0.9, 1.3)
    for bc in (free(),):
        table = exact_gibbs(spec, 3, field, params, bc)
        states, probs = oracles.naive_boltzmann(
            spec, 3, field, params.epsilon, bc, params.beta, energy, make_config
        )
        # both enumerate free sites in site order, last site fastest
        assert np.allclose(table.probs, probs, atol=1e-12)


def test_exact_gibbs_marginal_sums_to_one():
    spec = GridSpec(2, 2)
    table = exact_gibbs(spec, 3, grid_field(spec, 3, 1), GibbsParams(0.7, 1.0), free())
    for s in spec.sites():
        m = table.marginal(s)
        assert m.sum() == pytest.approx(1.0, abs=1e-12)


def test_exact_gibbs_wired_prefers_boundary_color():
    spec = BoxSpec(1)
    table = exact_gibbs(spec, 3, zero_field(spec, 3), GibbsParams(5.0, 1.0), wired(2))
    m = table.marginal(ORIGIN)
    assert m[2] > 0.99


def test_exact_gibbs_refuses_large_state_space():
    spec = BoxSpec(3)
    with pytest.raises(ValueError):
        exact_gibbs(spec, 4, sample_field(spec, 4, 1.0, seed=0), GibbsParams(1.0, 1.0), free())
    with pytest.raises(ValueError):
        exact_gibbs(
            GridSpec(2, 2), 3, grid_field(GridSpec(2, 2), 3, 0),
            GibbsParams(float("inf"), 1.0), free(),
        )


# ---------------------------------------------------------------------------
# heat bath


def test_conditional_closed_form():
    spec = BoxSpec(1)
    cfg = constant_config(spec, 3, 1, free())
    beta = 0.6
    p = conditional_distribution(cfg, zero_field(spec, 3), GibbsParams(beta, 1.0), ORIGIN)
    k = 4  # aligned neighbors of the center
    expected = np.exp(beta * k) / (np.exp(beta * k) + 2)
    assert p[1] == pytest.approx(expected, rel=1e-12)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


def test_heat_bath_deterministic():
    spec = GridSpec(3, 3)
    field = grid_field(spec, 3, 2)
    params = GibbsParams(0.8, 1.0)
    runs = []
    for _ in range(2):
        cfg = random_config(spec, 3, free(), seed=9)
        rng = np.random.Generator(np.random.Philox(17))
        run_heat_bath(cfg, field, params, sweeps=50, rng=rng)
        runs.append(cfg.spins.copy())
    assert np.array_equal(runs[0], runs[1])


def test_heat_bath_preserves_wired_boundary():
    spec = BoxSpec(2)
    field = sample_field(spec, 3, 1.0, seed=6)
    cfg = random_config(spec, 3, wired(1), seed=4)
    rng = np.random.Generator(np.random.Philox(0))
    run_heat_bath(cfg, field, GibbsParams(0.5, 1.0), sweeps=20, rng=rng)
    for i, s in enumerate(spec.sites()):
        if spec.is_boundary(s):
            assert cfg.spins[i] == 1


def test_heat_bath_refuses_infinite_beta():
    spec = GridSpec(2, 2)
    cfg = random_config(spec, 2, free(), seed=0)
    with pytest.raises(ValueError):
        run_heat_bath(
            cfg, grid_field(spec, 2, 0), GibbsParams(float("inf"), 1.0),
            sweeps=1, rng=np.random.Generator(np.random.Philox(0)),
        )


def test_single_site_detailed_balance():
    """pi(s) k(s -> s') == pi(s') k(s' -> s) for the heat-bath kernel."""
    spec = GridSpec(2, 2)
    q = 3
    rng = np.random.default_rng(0)
    for trial in range(20):
        field = grid_field(spec, q, trial)
        params = GibbsParams(0.4 + 0.1 * trial, 1.0)
        table = exact_gibbs(spec, q, field, params, free())

        def prob_of(spins):
            rows = np.where((table.states == spins[table.free_indices]).all(axis=1))[0]
            return float(table.probs[rows[0]])

        spins = rng.integers(0, q, size=spec.n_sites)
        site = spec.sites()[rng.integers(0, spec.n_sites)]
        cfg = make_config(spec, q, spins, free())
        cond = conditional_distribution(cfg, field, params, site)
        i = spec.index(site)
        for new_color in range(q):
            other = spins.copy()
            other[i] = new_color
            cfg2 = make_config(spec, q, other, free())
            cond2 = conditional_distribution(cfg2, field, params, site)
            lhs = prob_of(spins) * cond[new_color]
            rhs = prob_of(other) * cond2[spins[i]]
            assert abs(lhs - rhs) < 1e-10


def test_heat_bath_converges_to_exact_distribution():
    spec = GridSpec(2, 2)
    q = 3
    field = grid_field(spec, q, 3)
    params = GibbsParams(0.7, 1.0)
    table = exact_gibbs(spec, q, field, params, free())
    cfg = random_config(spec, q, free(), seed=1)
    rng = np.random.Generator(np.random.Philox(5))
    run_heat_bath(cfg, field, params, sweeps=2000, rng=rng)
    _, counts = run_heat_bath(
        cfg, field, params, sweeps=100_000, rng=rng,
        record="state", record_sites=list(spec.sites()),
    )
    emp = counts / counts.sum()
    # joint-state encoding: first recorded site is the lowest digit
    exact = np.zeros(q ** spec.n_sites)
    for row in range(len(table.states)):
        code = sum(int(table.states[row, k]) * q**k for k in range(spec.n_sites))
        exact[code] += table.probs[row]
    tv = 0.5 * np.abs(emp - exact).sum()
    assert tv < 0.02


# ---------------------------------------------------------------------------
# ground states


def test_ground_state_dominant_color_field():
    spec = BoxSpec(1)
    values = np.zeros((spec.n_sites, 3))
    values[:, 2] = 100.0
    from rfpm.field import FieldRealization

    field = FieldRealization(
        spec=spec, q=3, epsilon=1.0, seed=0,
        convention=FieldConvention.UNIT, values=values,
    )
    for method in ("exhaustive", "icm", "anneal"):
        cfg, e = ground_state(spec, 3, field, 1.0, free(), method=method, seed=1)
        assert np.all(cfg.spins == 2)
        assert e == pytest.approx(-12.0 - 9 * 100.0)


def test_ground_state_zero_field_wired():
    spec = BoxSpec(1)
    cfg, e = ground_state(spec, 3, zero_field(spec, 3), 1.0, wired(0), method="exhaustive")
    assert np.all(cfg.spins == 0)
    assert e == -12.0


def test_ground_state_heuristic_matches_exhaustive():
    """Annealed search finds the true optimum on >=90% of small instances."""
    spec = BoxSpec(1)
    params = GroundStateParams(restarts=6)
    hits = 0
    for seed in range(50):
        field = sample_field(spec, 3, 1.0, seed=seed)
        _, e_exact = ground_state(spec, 3, field, 1.0, free(), method="exhaustive")
        _, e_anneal = ground_state(
            spec, 3, field, 1.0, free(), method="anneal", seed=seed, params=params
        )
        assert e_anneal >= e_exact - 1e-9
        hits += abs(e_anneal - e_exact) < 1e-9
    assert hits >= 45


def test_ground_state_deterministic():
    spec = BoxSpec(2)
    field = sample_field(spec, 3, 1.0, seed=11)
    a = ground_state(spec, 3, field, 1.0, free(), method="anneal", seed=7)
    b = ground_state(spec, 3, field, 1.0, free(), method="anneal", seed=7)
    assert np.array_equal(a[0].spins, b[0].spins)
    assert a[1] == b[1]


# ---------------------------------------------------------------------------
# magnetization


def test_origin_occupation_ground_state_indicator():
    spec = BoxSpec(1)
    p = origin_occupation(
        spec, 3, zero_field(spec, 3), float("inf"), 1.0, wired(0),
        MCParams(gs_method="exhaustive"), seed=0,
    )
    assert p == 1.0


def test_magnetization_bounds_and_determinism():
    spec = BoxSpec(1)
    mc = MCParams(sweeps=400, burnin=100)
    m1, se1 = magnetization(spec, 3, 1.0, 1.2, 6, mc, base_seed=0)
    m2, se2 = magnetization(spec, 3, 1.0, 1.2, 6, mc, base_seed=0)
    assert (m1, se1) == (m2, se2)
    assert -1.5 <= m1 <= 1.5
    assert se1 >= 0.0


def test_magnetization_small_beta_near_zero():
    spec = BoxSpec(1)
    mc = MCParams(sweeps=2000, burnin=200)
    m, se = magnetization(spec, 3, 1.0, 1e-4, 8, mc, base_seed=3)
    assert abs(m) <= max(4 * se, 0.05)


def test_magnetization_needs_two_samples():
    with pytest.raises(ValueError):
        magnetization(BoxSpec(1), 3, 1.0, 1.0, 1, MCParams(), base_seed=0)


def test_spin_config_validation():
    spec = BoxSpec(1)
    with pytest.raises(ValueError):
        SpinConfig(spec, 2, np.full(spec.n_sites, 2, dtype=np.int64), free())
    with pytest.raises(ValueError):
        SpinConfig(spec, 2, np.zeros(4, dtype=np.int64), free())
    with pytest.raises(ValueError):
        SpinConfig(spec, 2, np.ones(spec.n_sites, dtype=np.int64), wired(0))
