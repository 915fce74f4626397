import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from enn.activation import DctActivation, basis_matrix
from enn.data import Dataset
from enn.network import Layer, LayerSpec, Network, baseline_spec, enn_spec, forward, grid_points, init_network
from enn.prune import (UndefinedDistanceError, bump_angle, coeff_distance, detect_redundant_bumps, distribution_csv,
                       layer_angle_distribution, layer_angles, mask_report, merge_redundant_neurons,
                       prune_coefficients, pruned_distribution, threshold_for_fraction)
from enn.train import evaluate_mse


def trained_like(seed=0, hidden=(6, 5)):
    net = init_network(enn_spec(list(hidden)), 2, seed=seed, dct_bias=1.0)
    r = np.random.default_rng(seed)
    for l in net.layers:
        l.act.coeffs[:] = r.normal(size=l.act.coeffs.shape) * np.geomspace(1, 0.01, l.act.Q)
    return net


def probe(seed=0, n=500):
    r = np.random.default_rng(seed)
    return Dataset(r.uniform(-1, 1, (n, 2)), r.uniform(-1, 1, n))


# -- pruning ------------------------------------------------------------------


def test_null_prune_is_bitwise_noop():
    net = trained_like()
    d = probe()
    before = evaluate_mse(net, d)
    rep = prune_coefficients(net, 0.0, d)
    assert rep.pruned == 0 and rep.mse_before == rep.mse_after == before
    assert all(v == 0 for v in pruned_distribution(rep).values())


def test_null_prune_masks_exact_zeros():
    net = trained_like()
    net.layers[0].act.coeffs[0, 3] = 0.0
    assert prune_coefficients(net, 0.0).pruned == 1
    assert not net.layers[0].act.mask[0, 3]


def test_infinite_threshold_zeroes_output():
    net = trained_like()
    rep = prune_coefficients(net, math.inf)
    assert rep.pruned == rep.total_coeffs
    assert np.all(forward(net, probe().inputs) == 0.0)


def test_prune_rules_and_report():
    net = trained_like()
    rho = 0.01
    energy = [l.act.coeffs ** 2 for l in net.layers]
    rep = prune_coefficients(net, rho)
    expect = sum(int(np.sum(e <= rho)) for e in energy)
    assert rep.pruned == expect
    assert rep.per_layer_per_q.sum() == rep.pruned == sum(pruned_distribution(rep).values())
    for l, e in zip(net.layers, energy):
        assert np.all(l.act.coeffs[e <= rho] == 0.0) and np.all(~l.act.mask[e <= rho])
    assert 0 < rep.fraction < 1


def test_prune_errors():
    with pytest.raises(ValueError):
        prune_coefficients(trained_like(), -1.0)
    with pytest.raises(ValueError):
        prune_coefficients(init_network(baseline_spec("relu", [3]), 2), 0.1)


def test_pruned_fraction_monotone_in_rho():
    base = trained_like(3)
    fracs = [prune_coefficients(base.copy(), rho).fraction for rho in np.geomspace(1e-8, 10, 30)]
    assert all(a <= b for a, b in zip(fracs, fracs[1:]))


def test_pruning_one_coefficient_costs_half_its_energy():
    # on the N-point grid, removing F_q raises the activation's MSE by F_q^2 / 2
    N, Q = 64, 6
    F = np.random.default_rng(1).normal(size=Q)
    B = basis_matrix(Q, N)
    act = DctActivation(F.copy(), N)
    grid = np.arange(1, N + 1)
    full = act.value(grid)
    q = int(np.argmin(F ** 2))
    layer = Layer(np.zeros((1, 1)), np.zeros(1), DctActivation(F[None].copy(), N), LayerSpec(1, "dct", Q, N))
    prune_coefficients(Network(1, [layer]), F[q] ** 2)
    after = layer.act.neuron(0).value(grid)
    assert np.mean((full - after) ** 2) == pytest.approx(F[q] ** 2 / 2, abs=1e-9)
    np.testing.assert_allclose(full - after, F[q] * B[:, q], atol=1e-12)


@given(st.lists(st.floats(-3, 3, allow_subnormal=False), min_size=1, max_size=40), st.floats(0, 1))
def test_threshold_for_fraction_sort_and_scan(values, fraction):
    F = np.array(values)
    layer = Layer(np.zeros((1, F.size)), np.zeros(F.size), DctActivation(F[:, None].copy(), 8), LayerSpec(F.size, "dct", 1, 8))
    net = Network(1, [layer])
    rho = threshold_for_fraction(net, fraction)
    # oracle: scan the sorted energies for the first whose prune count reaches
    # fraction * T (up to 1e-9 of a coefficient)
    e = sorted(v * v for v in values)
    need = fraction * len(e) - 1e-9
    oracle = 0.0
    if need > 0:
        oracle = next(cand for cand in e if sum(x <= cand for x in e) >= need)
    assert rho == oracle
    assert sum(v * v <= rho for v in values) >= need


def test_threshold_fraction_endpoints():
    net = trained_like()
    assert threshold_for_fraction(net, 0.0) == 0.0
    top = max(float((l.act.coeffs ** 2).max()) for l in net.layers)
    assert threshold_for_fraction(net, 1.0) == top
    with pytest.raises(ValueError):
        threshold_for_fraction(net, 1.5)


def test_distribution_keys_and_csv(tmp_path):
    net = trained_like()
    rep = prune_coefficients(net, threshold_for_fraction(net, 0.3))
    hist = pruned_distribution(rep)
    assert set(hist) == {(l, 2 * q - 1) for l in (0, 1, 2) for q in range(1, 7)}
    distribution_csv(rep, tmp_path / "d.csv")
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "layer,frequency,pruned" and len(lines) == 19
    assert mask_report(net).pruned == rep.pruned


# -- distances ----------------------------------------------------------------


def test_coeff_distance_cases():
    f = np.array([1.0, -2.0, 0.5])
    assert coeff_distance(f, f) == pytest.approx(0.0, abs=1e-15)
    assert coeff_distance([1, 0], [0, 1]) == 1.0
    assert coeff_distance(f, -f) == pytest.approx(2.0)
    with pytest.raises(UndefinedDistanceError):
        coeff_distance([0, 0], [1, 0])
    with pytest.raises(ValueError):
        coeff_distance([1, 0], [1, 0, 0])


def test_bump_angle_cases():
    w = np.array([0.3, -0.7])
    assert bump_angle(w, 3 * w) == pytest.approx(0.0, abs=1e-7)
    assert bump_angle([1, 0], [0, 2]) == pytest.approx(math.pi / 2)
    with pytest.raises(UndefinedDistanceError):
        bump_angle([0, 0], [1, 1])


def test_bump_angle_high_precision_oracle(rng):
    from fractions import Fraction
    import decimal
    decimal.getcontext().prec = 50
    for _ in range(100):
        a, b = rng.normal(size=4), rng.normal(size=4)
        dot = sum(Fraction(x) * Fraction(y) for x, y in zip(a, b))
        na = sum(Fraction(x) ** 2 for x in a)
        nb = sum(Fraction(y) ** 2 for y in b)
        c = decimal.Decimal(dot.numerator) / decimal.Decimal(dot.denominator)
        den = (decimal.Decimal(na.numerator) / na.denominator * decimal.Decimal(nb.numerator) / nb.denominator).sqrt()
        expect = math.acos(float(c / den))
        assert bump_angle(a, b) == pytest.approx(expect, abs=1e-9)


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.lists(st.floats(-5, 5), min_size=3, max_size=3),
       st.floats(0.01, 100))
def test_distance_properties(a, b, k):
    a, b = np.array(a), np.array(b)
    if np.linalg.norm(a) < 1e-3 or np.linalg.norm(b) < 1e-3:
        return
    d = coeff_distance(a, b)
    assert 0.0 <= d <= 2.0 and d == pytest.approx(coeff_distance(b, a), abs=1e-12)
    t = bump_angle(a, b)
    assert 0.0 <= t <= math.pi and t == pytest.approx(bump_angle(b, a), abs=1e-12)
    assert bump_angle(a, k * a) == pytest.approx(0.0, abs=1e-6)


# -- redundancy ---------------------------------------------------------------


def duplicated_net():
    net = init_network(enn_spec([4]), 2, seed=3, dct_bias=1.0)
    h, o = net.layers
    h.W[:, 3] = h.W[:, 1]
    h.b[3] = h.b[1]
    h.act.coeffs[3] = h.act.coeffs[1]
    return net


def test_duplicate_detected_at_zero():
    rep = detect_redundant_bumps(duplicated_net())
    assert [(l, m, m2) for l, m, m2, *_ in rep.pairs] == [(0, 1, 3)]
    _, _, _, d, a = rep.pairs[0]
    assert d == pytest.approx(0.0, abs=1e-12) and a == pytest.approx(0.0, abs=1e-7)


def test_orthogonal_layer_has_no_pairs():
    net = init_network(enn_spec([2]), 2)
    net.layers[0].W[:] = np.eye(2)
    assert len(detect_redundant_bumps(net)) == 0


def test_detection_matches_exhaustive_oracle():
    net = init_network(enn_spec([20]), 2, seed=4, dct_bias=1.0)
    rep = detect_redundant_bumps(net, 0.2, math.radians(30))
    layer = net.layers[0]
    oracle = []
    for m in range(20):
        for m2 in range(m + 1, 20):
            F1, F2 = layer.act.coeffs[m], layer.act.coeffs[m2]
            d = 1 - F1 @ F2 / math.sqrt((F1 @ F1) * (F2 @ F2))
            w1, w2 = layer.W[:, m], layer.W[:, m2]
            a = math.acos(max(-1, min(1, w1 @ w2 / math.sqrt((w1 @ w1) * (w2 @ w2)))))
            if d < 0.2 and a < math.radians(30):
                oracle.append((0, m, m2))
    assert [(l, m, m2) for l, m, m2, *_ in rep.pairs] == oracle
    assert len(oracle) > 0


def test_detection_tolerances_validated():
    with pytest.raises(ValueError):
        detect_redundant_bumps(duplicated_net(), 0.0)


def test_redundancy_csv(tmp_path):
    rep = detect_redundant_bumps(duplicated_net())
    rep.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "layer,m,m2,distance,angle" and lines[1].startswith("0,1,3,")


def test_merging_exact_duplicate_preserves_output():
    net = duplicated_net()
    merged = merge_redundant_neurons(net, detect_redundant_bumps(net))
    assert merged.layers[0].width == 3 and merged.layers[1].W.shape == (3, 1)
    pts = grid_points(64)
    assert np.abs(forward(merged, pts) - forward(net, pts)).max() < 1e-9
    assert net.layers[0].width == 4  # original untouched


def test_merge_refuses_non_redundant_and_output_pairs():
    net = init_network(enn_spec([2]), 2)
    net.layers[0].W[:] = np.eye(2)
    rep = detect_redundant_bumps(duplicated_net())
    rep.pairs = [(0, 0, 1, 0.0, 0.0)]
    with pytest.raises(ValueError):
        merge_redundant_neurons(net, rep)
    rep.pairs = [(1, 0, 0, 0.0, 0.0)]
    with pytest.raises(ValueError):
        merge_redundant_neurons(net, rep)


def test_merge_overlapping_pairs_greedy():
    net = init_network(enn_spec([3]), 2, seed=1)
    h = net.layers[0]
    for m in (1, 2):
        h.W[:, m] = h.W[:, 0]
        h.b[m] = h.b[0]
        h.act.coeffs[m] = h.act.coeffs[0]
    rep = detect_redundant_bumps(net)
    assert len(rep) == 3
    merged = merge_redundant_neurons(net, rep)
    assert merged.layers[0].width == 1
    pts = grid_points(16)
    assert np.abs(forward(merged, pts) - forward(net, pts)).max() < 1e-9


# -- angle distributions -------------------------------------------------------


def test_angle_histogram_two_neurons():
    net = init_network(enn_spec([2]), 2, seed=2)
    counts, edges = layer_angle_distribution(net, 0, bins=18)
    assert counts.sum() == 1 and edges[0] == 0 and edges[-1] == pytest.approx(math.pi)


def test_angle_histogram_duplicates_at_zero():
    net = init_network(enn_spec([5]), 2)
    net.layers[0].W[:] = net.layers[0].W[:, :1]
    counts, _ = layer_angle_distribution(net, 0, bins=36)
    assert counts[0] == 10 and counts.sum() == 10


def test_random_wide_layer_concentrates_at_right_angle():
    net = init_network(enn_spec([256] * 4), 2, seed=0)
    for layer in (1, 2, 3):
        assert abs(layer_angles(net, layer).mean() - math.pi / 2) < 0.1
    with pytest.raises(IndexError):
        layer_angle_distribution(net, 9)
