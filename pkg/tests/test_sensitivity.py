import csv
import io
import math

import numpy as np
import pytest

from netsense import dynamics as dy
from netsense import sensitivity as sens
from netsense.errors import NearPoleError, UnstableSystemError
from netsense.netgen import GraphSpec, InteractionMatrix, generate, interaction_matrix
from netsense.spectral import decompose
from oracles import brute_force_inverse

BENCH = dict(omega_n=math.sqrt(2), zeta=0.05, k=0.37949)


def stable_dyn(lam1, order=2, seed=0):
    rng = np.random.default_rng(seed)
    wn = float(rng.uniform(0.5, 2.0))
    if order == 1:
        return dy.first_order(wn, dy.max_stable_gain(wn, None, lam1, 0.1))
    zeta = float(rng.uniform(0.02, 0.5))
    return dy.second_order(wn, zeta, dy.max_stable_gain(wn, zeta, lam1, 0.1))


def test_decoupled_nodes_equal_f():
    a = InteractionMatrix.zeros(5)
    d = dy.second_order(**BENCH)
    for w in (0.1, 1.4, 9.0):
        x = sens.node_sensitivity(a, d, w)
        np.testing.assert_allclose(x, dy.f_eval(d, 1j * w), rtol=1e-14)
        assert sens.mean_sensitivity_direct(a, d, w) == pytest.approx(dy.f_eval(d, 1j * w), rel=1e-14)
        r = sens.mean_sensitivity_spectral(decompose(a), d, w)
        assert r.total == pytest.approx(dy.f_eval(d, 1j * w), rel=1e-14)
        assert r.first_mode == pytest.approx(dy.f_eval(d, 1j * w), rel=1e-14)


@pytest.mark.parametrize("seed", range(8))
def test_node_sensitivity_matches_brute_force(seed, graph_factory):
    g = graph_factory(seed + 100, n_max=9)
    assert g.n <= 8
    a = interaction_matrix(g)
    dec = decompose(a)
    d = stable_dyn(dec.eigenvalues[0], order=1 + seed % 2, seed=seed)
    for w in np.logspace(-1, 1, 5) * d.natural_frequency:
        x = sens.node_sensitivity(a, d, w)
        ref = brute_force_inverse(a.entries, d, w)
        assert np.max(np.abs(x - ref)) <= 1e-10 * max(1.0, np.max(np.abs(ref)))


def test_star_leaves_identical(star4):
    a = interaction_matrix(star4)
    d = dy.second_order(1.0, 0.01, 0.5)
    for w in np.logspace(-2, 2, 30):
        x = sens.node_sensitivity(a, d, w)
        # equal up to rounding in the pivoted LU
        assert np.max(np.abs(x[1:] - x[1])) <= 1e-15 * abs(x[1])


def test_complete_graph_mean_is_closed_loop_limit():
    a = interaction_matrix(generate(GraphSpec("complete", n=16)))
    d = dy.second_order(**BENCH)
    for w in np.logspace(-2, 2, 40):
        ref = 1.0 / (d.g(1j * w) - 1.0)
        assert abs(sens.mean_sensitivity_direct(a, d, w) - ref) <= 1e-10 * abs(ref)


def test_k4_residue_vanishes(k4):
    dec = decompose(interaction_matrix(k4))
    d = dy.second_order(**BENCH)
    for w in np.logspace(-2, 2, 20):
        r = sens.mean_sensitivity_spectral(dec, d, w)
        assert abs(r.residue_part) <= 1e-14 * abs(r.total)


@pytest.mark.parametrize("seed", range(50))
def test_spectral_matches_direct(seed, graph_factory):
    g = graph_factory(seed, n_max=200)
    a = interaction_matrix(g)
    dec = decompose(a)
    d = stable_dyn(dec.eigenvalues[0], order=1 + seed % 2, seed=seed)
    for w in np.logspace(-2, 2, 20) * d.natural_frequency:
        direct = sens.mean_sensitivity_direct(a, d, w)
        spec = sens.mean_sensitivity_spectral(dec, d, w)
        assert abs(spec.total - direct) <= 1e-8 * abs(direct)
        assert abs(spec.first_mode + spec.residue_part - spec.total) <= 1e-12 * abs(spec.total)


def test_near_pole_errors():
    # single edge: lambda = +-1; g(i) = 1 for g(s) = s^2 + 2 -> pole at omega = 1
    a = InteractionMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    d = dy.custom([2.0, 0.0, 1.0])
    with pytest.raises(NearPoleError) as err:
        sens.node_sensitivity(a, d, 1.0)
    assert err.value.omega == 1.0
    with pytest.raises(NearPoleError):
        sens.mean_sensitivity_spectral(decompose(a), d, 1.0)
    sens.node_sensitivity(a, d, 1.1)


def test_grid_validation():
    with pytest.raises(ValueError):
        sens.FrequencyGrid([1.0, 1.0])
    with pytest.raises(ValueError):
        sens.FrequencyGrid([0.0, 1.0])
    with pytest.raises(ValueError):
        sens.FrequencyGrid([])
    g = sens.default_grid(dy.second_order(2.0, 0.1, 0.5))
    assert len(g) == 400
    assert g.omegas[0] == pytest.approx(0.02) and g.omegas[-1] == pytest.approx(200)


# -- sweeps ------------------------------------------------------------------------


def _sweep(g, d, grid=None, nodes="spectral"):
    a = interaction_matrix(g) if g is not None else InteractionMatrix.zeros(1)
    dec = decompose(a)
    return a, dec, sens.sweep(a, dec, d, grid or sens.default_grid(d), nodes=nodes)


def check_sweep_invariants(sw):
    mean_nodes = sw.node_response.mean(axis=1)
    assert np.all(np.abs(mean_nodes - sw.mean_response) <= 1e-9 * np.abs(sw.mean_response))
    split = sw.first_mode + sw.residue_part
    assert np.all(np.abs(split - sw.mean_response) <= 1e-9 * np.abs(sw.mean_response))


def test_single_node_resonance():
    d = dy.second_order(1.0, 0.1, 1.0)
    _, _, sw = _sweep(None, d)
    peak = sw.omegas[np.argmax(np.abs(sw.mean_response))]
    target = math.sqrt(1 - 2 * 0.1**2)
    assert peak == sw.omegas[np.argmin(np.abs(sw.omegas - target))]


def test_complete_16_matches_er_limit():
    d = dy.second_order(**BENCH)
    lim = dy.er_limit_model(d)
    _, _, sw = _sweep(generate(GraphSpec("complete", n=16)), d)
    ref = dy.f_eval(lim, 1j * sw.omegas)
    assert np.max(np.abs(sw.mean_response - ref) / np.abs(ref)) <= 1e-9


@pytest.mark.parametrize("seed", range(6))
def test_sweep_invariants_small(seed, graph_factory):
    g = graph_factory(seed, n_max=9)
    lam1 = decompose(interaction_matrix(g)).eigenvalues[0]
    d = stable_dyn(lam1, seed=seed)
    a, dec, sw = _sweep(g, d, sens.log_grid(0.05, 20, 60))
    check_sweep_invariants(sw)
    _, _, sw2 = _sweep(g, d, sens.log_grid(0.05, 20, 60), nodes="direct")
    np.testing.assert_allclose(sw.node_response, sw2.node_response, rtol=1e-9)
    assert np.array_equal(sw.mean_response, sw2.mean_response)


def test_sweep_without_nodes(star4):
    _, _, sw = _sweep(star4, dy.second_order(1.0, 0.05, 0.5), nodes=None)
    assert sw.node_response is None
    with pytest.raises(ValueError):
        sw.to_csv(node_columns=True)
    with pytest.raises(ValueError):
        _sweep(star4, dy.second_order(1.0, 0.05, 0.5), nodes="bogus")


def test_conjugate_symmetry(graph_factory):
    g = graph_factory(3, n_max=30)
    a = interaction_matrix(g)
    d = stable_dyn(decompose(a).eigenvalues[0], seed=3)
    for w in (0.3, 1.0, 4.0):
        np.testing.assert_allclose(
            sens.node_sensitivity(a, d, -w), np.conj(sens.node_sensitivity(a, d, w)), rtol=1e-12
        )


@pytest.mark.parametrize("seed", range(4))
def test_permutation_equivariance(seed, graph_factory):
    g = graph_factory(seed, n_max=60)
    perm = np.random.default_rng(seed).permutation(g.n)
    a, b = interaction_matrix(g), interaction_matrix(g.relabel(perm))
    d = stable_dyn(decompose(a).eigenvalues[0], seed=seed)
    for w in (0.2, 1.0, 5.0):
        x, y = sens.node_sensitivity(a, d, w), sens.node_sensitivity(b, d, w)
        # relabel sends old node i to perm[i]
        np.testing.assert_allclose(y[perm], x, rtol=1e-10)
        assert abs(y.mean() - x.mean()) <= 1e-10 * abs(x.mean())


def test_cycle_nodes_all_equal():
    g = generate(GraphSpec("cycle", n=9))
    _, _, sw = _sweep(g, dy.second_order(1.0, 0.05, 0.5), sens.log_grid(0.1, 10, 40), nodes="direct")
    spread = np.abs(sw.node_response - sw.node_response[:, :1]).max(axis=1)
    assert np.all(spread <= 1e-12 * np.abs(sw.mean_response))


def test_unstable_rejected(star4):
    lam1 = decompose(interaction_matrix(star4)).eigenvalues[0]
    d = dy.second_order(1.0, 0.05, 1.1 / lam1)
    with pytest.raises(UnstableSystemError) as err:
        _sweep(star4, d)
    assert err.value.lambda_1 == pytest.approx(lam1)
    assert err.value.margin < 0


def test_sweep_csv_columns(star4):
    _, _, sw = _sweep(star4, dy.second_order(1.0, 0.05, 0.5), sens.log_grid(0.1, 10, 7))
    rows = list(csv.reader(io.StringIO(sw.to_csv())))
    assert rows[0] == [
        "omega", "re_mean", "im_mean", "mag_mean_db", "phase_mean_deg",
        "re_first", "im_first", "re_residue", "im_residue",
    ]
    assert len(rows) == 8
    r = [float(v) for v in rows[3]]
    z = complex(r[1], r[2])
    assert r[0] == sw.omegas[2]
    assert z == sw.mean_response[2]
    assert r[3] == pytest.approx(20 * math.log10(abs(z)), rel=1e-15)
    assert r[4] == pytest.approx(math.degrees(np.angle(z)), rel=1e-15)
    wide = list(csv.reader(io.StringIO(sw.to_csv(node_columns=True))))
    assert wide[0][9:] == [f"{p}_{i}" for i in range(4) for p in ("mag_db", "phase_deg")]
    assert sw.to_csv().endswith("\r\n")
