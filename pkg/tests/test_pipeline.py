import dataclasses

import numpy as np
import pytest

from rodhom import fem, pipeline as pl, transform as tr
from rodhom.geometry import (ProductMesh, build_rectangle, compute_moments,
                             cross_mass)
from rodhom.homogenize import rod_tensor
from rodhom.material import MaterialProfile, make_isotropic

NY = 8


def layered_profile(contrast=5.0):
    return MaterialProfile([(-0.5, 0.0, make_isotropic(1.0, 1.0)),
                            (0.0, 0.5, make_isotropic(contrast, contrast))])


@pytest.fixture(scope="module")
def forms():
    return fem.assemble(layered_profile(), ProductMesh(build_rectangle(1.0, 4, 4), NY))


@pytest.fixture(scope="module")
def load(forms):
    return pl.make_loads(forms.mesh.cross, NY, 16, 6.0 / 16, "rod",
                         n_loads=1, seed=3)[0]


def test_config_validation():
    with pytest.raises(ValueError):
        pl.ExperimentConfig(gamma=-2.0)
    with pytest.raises(ValueError):
        pl.ExperimentConfig(delta=-0.1)
    with pytest.raises(ValueError):
        pl.ExperimentConfig(momentum_variant="bogus")
    with pytest.raises(ValueError):
        pl.ExperimentConfig(n_grid=(8, 12, 16))


def test_limit_matches_fiber_pullback(forms, load):
    for regime in ("rod", "stretch", "bend"):
        a = pl.limit_resolvent(forms, load, 0.0, regime)
        b = pl.fiber_pullback_resolvent(forms, load, 0.0, regime)
        scale = np.max(np.abs(a.values))
        assert np.max(np.abs(a.values - b.values)) < 1e-10 * scale


def test_reference_selfadjoint(forms):
    eps = 6.0 / 16
    f, g = pl.make_loads(forms.mesh.cross, NY, 16, eps, "rod", n_loads=2, seed=5)
    R = pl.LineResolvent(forms, eps, 0.0)
    lhs = pl.line_inner(forms, R.apply(f), g)
    rhs = pl.line_inner(forms, f, R.apply(g))
    assert abs(lhs - rhs) < 1e-10 * abs(lhs)


def test_zero_load(forms):
    z = tr.LineField(np.zeros((16 * NY, forms.mesh.cross.n_nodes * 3)), 0.25, NY)
    assert np.max(np.abs(pl.LineResolvent(forms, 0.25, 0.0).apply(z).values)) == 0.0
    assert np.max(np.abs(pl.limit_resolvent(forms, z, 0.0, "rod").values)) < 1e-15


def test_reference_energy_bound(forms, load):
    R = pl.LineResolvent(forms, load.eps, 0.0)
    u = R.apply(load)
    nu = pl.line_inner(forms, u, u).real
    nf = pl.line_inner(forms, load, load).real
    assert nu <= nf * (1 + 1e-12)


def test_reference_single_fiber_support(forms):
    n_c = forms.mesh.cross.n_nodes
    S = 16 * NY
    p = np.arange(S) // NY
    y = -0.5 + (np.arange(S) % NY) / NY
    k0 = 5
    vals = np.outer(np.exp(2j * np.pi * k0 * (p + y) / 16), np.ones(3 * n_c))
    f = tr.LineField(vals, 0.25, NY)
    u = pl.LineResolvent(forms, 0.25, 0.0).apply(f)
    b = tr.gelfand(u)
    mags = np.linalg.norm(b.values.reshape(16, -1), axis=1)
    assert np.max(np.delete(mags, k0)) < 1e-12 * mags[k0]


def test_zero_frequency_mode(forms):
    # a constant-in-x3 load is handled by the weight matrix alone
    md = compute_moments(forms.mesh.cross)
    n_c = forms.mesh.cross.n_nodes
    rng = np.random.default_rng(8)
    c = rng.standard_normal(3 * n_c)
    vals = np.tile(c, (16 * NY, 1))
    f = tr.LineField(vals, 0.25, NY)
    out = pl.limit_resolvent(forms, f, 0.0, "rod")
    Mw = cross_mass(forms.mesh.cross)
    E0 = pl._cross_embed(forms.mesh.cross, 0.0, "rod")
    mom = E0.conj().T @ (Mw @ c.reshape(n_c, 3)).reshape(-1)
    expected = E0 @ np.linalg.solve(md.C_rod, mom)
    assert np.max(np.abs(out.values - expected[None, :])) < 1e-12 * np.max(np.abs(expected))


def test_stretch_single_frequency_oracle(forms):
    # torsion/extension profile at one frequency against a 2x2 hand solve
    cross = forms.mesh.cross
    md = compute_moments(cross)
    rt = rod_tensor(forms)
    L, N, eps = 6.0, 16, 6.0 / 16
    theta = 2 * np.pi / L
    S = N * NY
    x3 = eps * (np.arange(S) // NY + (-0.5 + (np.arange(S) % NY) / NY))
    c = np.array([0.7, -0.3])
    prof = np.zeros((cross.n_nodes, 3), dtype=complex)
    prof[:, 0] = cross.nodes[:, 1] * c[0]
    prof[:, 1] = -cross.nodes[:, 0] * c[0]
    prof[:, 2] = c[1]
    f = tr.LineField(np.outer(np.exp(1j * theta * x3), prof.reshape(-1)), eps, NY)
    gamma = 0.0
    mh = np.linalg.solve(eps ** (-gamma) * theta ** 2 * rt.A_stretch + md.C_stretch,
                         md.C_stretch @ c)
    expected = np.outer(np.exp(1j * theta * x3),
                        (pl._cross_embed(cross, 0.0, "stretch") @ mh))
    out = pl.limit_resolvent(forms, f, gamma, "stretch")
    assert np.max(np.abs(out.values - expected)) < 1e-10 * np.max(np.abs(expected))


def test_make_loads_properties(forms):
    cross = forms.mesh.cross
    Mw = cross_mass(cross)
    a = pl.make_loads(cross, NY, 16, 0.25, "bend", n_loads=2, seed=1)
    b = pl.make_loads(cross, NY, 16, 0.25, "bend", n_loads=2, seed=1)
    for fa, fb in zip(a, b):
        assert np.array_equal(fa.values, fb.values)
    for f in a:
        assert abs(tr.line_norm_sq(f, Mw) - 1.0) < 1e-12
    # bend parity: in-plane part even, third component odd under x -> -x
    from rodhom.geometry import is_centrally_symmetric
    _, pairing = is_centrally_symmetric(cross)
    v = a[0].values.reshape(a[0].S, -1, 3)
    vr = v[:, pairing, :]
    assert np.max(np.abs(v[:, :, :2] - vr[:, :, :2])) < 1e-12
    assert np.max(np.abs(v[:, :, 2] + vr[:, :, 2])) < 1e-12


def test_theory_slope_table():
    assert pl.theory_slope("stretch", "all", 0, 0.0) == 1.0
    assert pl.theory_slope("stretch", "all", 1, 0.0) == 1.0
    assert pl.theory_slope("stretch", "all", 2, 0.0) == 2.0
    assert pl.theory_slope("rod", "12", 0, 0.0) == 0.5
    assert pl.theory_slope("rod", "3", 0, 0.0) == 1.0
    assert pl.theory_slope("rod", "3", 2, 0.0) == 1.5
    assert pl.theory_slope("bend", "12", 1, 0.0) == 0.0
    assert pl.theory_slope("bend", "3", 1, 0.0) == 0.5
    assert pl.theory_slope("bend", "3", 0, 0.0, momentum_variant="zero") == 0.5
    # delta beyond (gamma+2)/4 starts eating into the bend rate
    assert pl.theory_slope("bend", "3", 0, 0.0, delta=1.0) == 0.5
    assert pl.theory_slope("bend", "3", 0, 2.0) == 2.0


def test_stretch_rates_small(forms):
    cfg = pl.ExperimentConfig(n_grid=(8, 12, 16, 24), regimes=("stretch",),
                              orders=(0, 2), n_loads=1)
    rep = pl.rate_experiment(cfg, forms)
    assert rep.conclusive()
    for r in rep.rows:
        assert r["slope_fit"] >= r["slope_theory"] - 0.2
    rows = rep.csv_rows()
    assert len(rows) == 2 * 4
    assert set(rows[0]) == {"regime", "component", "order", "flags", "eps",
                            "err", "slope_fit", "slope_theory", "pass"}


def test_rate_experiment_bit_stable(forms):
    cfg = pl.ExperimentConfig(n_grid=(8, 12, 16, 24), regimes=("stretch",),
                              orders=(0,), n_loads=1)
    a = pl.rate_experiment(cfg, forms)
    b = pl.rate_experiment(cfg, forms)
    assert a.rows[0]["errs"] == b.rows[0]["errs"]
    assert a.rows[0]["slope_fit"] == b.rows[0]["slope_fit"]


def test_xi_ablation_small(forms):
    cfg = pl.ExperimentConfig(n_grid=(8, 12, 16, 24), orders=(0,), n_loads=1)
    rep = pl.xi_ablation(cfg, forms)
    row = rep.rows[0]
    assert row["conclusive"]
    assert row["slope_fit"] >= 1.8


def test_corrector_fields_scale_with_eps(forms):
    # first-order corrections shrink with the fiber quasimomenta
    errs = []
    for N in (8, 16):
        eps = 6.0 / N
        f = pl.make_loads(forms.mesh.cross, NY, N, eps, "stretch",
                          n_loads=1, seed=2)[0]
        u1, _ = pl.corrector_fields(forms, f, 0.0, "stretch")
        errs.append(pl.line_error_norm(forms, u1))
    assert errs[1] < errs[0]


def test_report_json_roundtrip(forms, tmp_path):
    cfg = pl.ExperimentConfig(n_grid=(8, 12, 16, 24), regimes=("stretch",),
                              orders=(0,), n_loads=1)
    rep = pl.rate_experiment(cfg, forms)
    p = tmp_path / "rates.csv"
    rep.write_csv(p)
    assert p.read_text().startswith("regime,")
    q = tmp_path / "report.json"
    rep.write_json(q)
    import json
    obj = json.loads(q.read_text())
    assert obj["all_pass"] == rep.all_pass()
    assert obj["config"]["seed"] == 0
