import math

import numpy as np
import pytest

import depin as dp
from conftest import assert_log_close, random_instance


GEO = dp.geometric_kernel(0.5, n_max=48)
SRW = dp.srw_kernel(16)
LAW = dp.disorder_law("gaussian")


def test_model_spec_validation():
    with pytest.raises(ValueError):
        dp.ModelSpec("ising", 1.0, 0.0, GEO)
    with pytest.raises(ValueError):
        dp.ModelSpec("pinning", -0.5, 0.0, GEO)
    with pytest.raises(ValueError):
        dp.ModelSpec("copolymer", 1.0, -0.1, GEO)
    dp.ModelSpec("pinning", 0.0, -3.0, GEO)  # negative h fine for pinning


def test_input_validation(gaussian_law):
    om = dp.sample_disorder(gaussian_law, 10, 0)
    model = dp.ModelSpec("pinning", 1.0, 0.0, SRW)
    with pytest.raises(ValueError):
        dp.log_partition_pinning(model, om, 7)  # off the period grid
    with pytest.raises(ValueError):
        dp.log_partition_pinning(model, om, 20)  # sample too short
    mc = dp.ModelSpec("copolymer", 1.0, 0.0, SRW)
    with pytest.raises(ValueError):
        dp.log_partition_copolymer(mc, om, 7)
    with pytest.raises(ValueError):
        dp.log_partition_copolymer(model, om, 8)  # kind mismatch
    with pytest.raises(ValueError):
        dp.log_partition_pinning(mc, om, 8)


def test_single_excursion_position():
    om = dp.sample_disorder(LAW, 2, 9)
    model = dp.ModelSpec("pinning", 1.3, 0.7, SRW)
    table = dp.log_partition_pinning(model, om, 2)
    expected = 1.3 * om.values[1] - 0.7 + math.log(0.5)
    assert table.final_logz == pytest.approx(expected, abs=1e-14)
    assert table.logz[0] == 0.0


def test_geometric_beta0_n2():
    om = dp.sample_disorder(LAW, 2, 1)
    model = dp.ModelSpec("pinning", 0.0, 0.0, GEO)
    table = dp.log_partition_pinning(model, om, 2)
    assert math.exp(table.final_logz) == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("i", range(12))
def test_pinning_matches_oracle(i):
    om, beta, h = random_instance(100 + i, 16)
    model = dp.ModelSpec("pinning", beta, h, GEO)
    got = dp.log_partition_pinning(model, om, 16).final_logz
    want = dp.brute_force_pinning(GEO, om, beta, h, 16)
    assert_log_close(got, want.value)


@pytest.mark.parametrize("i", range(8))
def test_pinning_matches_oracle_period2(i):
    om, beta, h = random_instance(300 + i, 16)
    model = dp.ModelSpec("pinning", beta, h, SRW)
    got = dp.log_partition_pinning(model, om, 16).final_logz
    want = dp.brute_force_pinning(SRW, om, beta, h, 16)
    assert_log_close(got, want.value)


@pytest.mark.parametrize("i", range(12))
def test_copolymer_matches_oracle(i):
    om, beta, h = random_instance(200 + i, 14)
    model = dp.ModelSpec("copolymer", beta, abs(h), SRW)
    got = dp.log_partition_copolymer(model, om, 14).final_logz
    want = dp.brute_force_copolymer(SRW, om, beta, abs(h), 14)
    assert_log_close(got, want.value)


def test_copolymer_beta_h_zero_equals_pinning():
    om = dp.sample_disorder(LAW, 12, 4)
    mc = dp.ModelSpec("copolymer", 0.0, 0.0, SRW)
    mp = dp.ModelSpec("pinning", 0.0, 0.0, SRW)
    zc = dp.log_partition_copolymer(mc, om, 12).final_logz
    zp = dp.log_partition_pinning(mp, om, 12).final_logz
    assert zc == pytest.approx(zp, abs=1e-13)


def test_copolymer_s1_one_step_convention():
    # an s=1 kernel: length-1 excursions have no interior and keep full mass
    kern = GEO
    om = dp.sample_disorder(LAW, 1, 5)
    model = dp.ModelSpec("copolymer", 1.7, 0.9, kern)
    table = dp.log_partition_copolymer(model, om, 1)
    assert table.final_logz == pytest.approx(math.log(kern.density[0]), abs=1e-14)


def test_copolymer_charge_reflection():
    # flipping all charges multiplies Z by exp(beta sum w) once the contact
    # sites are recharged; the partner sum is enumerated independently
    n, beta = 12, 0.9
    om = dp.sample_disorder(LAW, n, 21)
    flipped = dp.DisorderSample(-om.values, om.seed, om.law)
    model = dp.ModelSpec("copolymer", beta, 0.0, SRW)
    lhs = dp.log_partition_copolymer(model, flipped, n).final_logz
    partner = dp.copolymer_reflection_partner(om, beta, n)
    rhs = beta * float(om.values[:n].sum()) + math.log(partner)
    assert lhs == pytest.approx(rhs, abs=1e-12)


@pytest.mark.parametrize("i", range(8))
def test_constrained_pinning_matches_oracle(i):
    om, beta, _h = random_instance(400 + i, 16)
    model = dp.ModelSpec("pinning", beta, 0.4, GEO)
    table = dp.log_partition_constrained(model, om, 16)
    want = dp.brute_force_constrained(GEO, om, beta, 16)
    got_j = table.logz_j[-1]
    for j in range(len(got_j)):
        if j in want:
            assert_log_close(float(got_j[j]), want[j])
        else:
            assert got_j[j] == -math.inf


@pytest.mark.parametrize("i", range(6))
@pytest.mark.parametrize("kern,kind_n", [(GEO, 15), (SRW, 14)])
def test_constrained_copolymer_matches_oracle(i, kern, kind_n):
    om, beta, _h = random_instance(500 + i, kind_n)
    n = kind_n - kind_n % kern.period
    model = dp.ModelSpec("copolymer", beta, 0.2, kern)
    table = dp.log_partition_constrained(model, om, n)
    want = dp.brute_force_constrained(kern, om, beta, n, kind="copolymer")
    got_j = table.logz_j[-1]
    for j in range(len(got_j)):
        if j in want:
            assert_log_close(float(got_j[j]), want[j])
        else:
            assert got_j[j] == -math.inf


def test_constrained_first_row_and_infeasible():
    om = dp.sample_disorder(LAW, 8, 3)
    model = dp.ModelSpec("pinning", 1.1, 0.0, SRW)
    table = dp.log_partition_constrained(model, om, 8)
    # one contact at position 8 means a single excursion of length 8
    assert table.logz_j[-1][1] == pytest.approx(
        1.1 * om.values[7] + math.log(SRW.density[3]), abs=1e-13)
    # more contacts than positions/period is impossible
    assert table.logz_j[2][3] == -math.inf
    assert table.logz_j[0][0] == 0.0


@pytest.mark.parametrize("kind,h", [("pinning", -0.8), ("pinning", 0.6),
                                    ("copolymer", 0.5)])
def test_constrained_reconstruction_identity(kind, h):
    kern = GEO if kind == "pinning" else SRW
    n = 64 if kind == "pinning" else 32
    om = dp.sample_disorder(LAW, n, 77)
    model = dp.ModelSpec(kind, 1.2, h, kern)
    table = dp.log_partition_constrained(model, om, n)
    counts = np.arange(table.logz_j.shape[1], dtype=float)
    lhs = dp.logsumexp_1d(table.logz_j[-1] - h * counts)
    if kind == "pinning":
        direct = dp.log_partition_pinning(model, om, n).final_logz
    else:
        direct = dp.log_partition_copolymer(model, om, n).final_logz
    assert lhs == pytest.approx(direct, abs=1e-12)
    assert table.final_logz == pytest.approx(direct, abs=1e-12)


def test_constrained_memory_guard():
    om = dp.sample_disorder(LAW, 9000, 0)
    model = dp.ModelSpec("pinning", 1.0, 0.0, GEO)
    with pytest.raises(ValueError):
        dp.log_partition_constrained(model, om, 9000)


def test_constrained_window_extraction():
    om = dp.sample_disorder(LAW, 16, 6)
    model = dp.ModelSpec("pinning", 0.9, 0.0, GEO)
    table = dp.log_partition_constrained(model, om, 16)
    # the [0,1] window collects everything
    full = dp.constrained_window(table, 0.5, 0.5)
    assert full == pytest.approx(dp.logsumexp_1d(table.logz_j[-1]), abs=1e-13)
    # a window straddling a single count picks out exactly that count
    one = dp.constrained_window(table, 5.0 / 16.0, 0.02)
    assert one == pytest.approx(float(table.logz_j[-1][5]), abs=1e-13)
    assert dp.constrained_window(table, 0.997, 0.001) == -math.inf


def test_single_excursion_lower_bound():
    # one completed excursion spanning the whole system is one configuration
    for i in range(25):
        om, beta, h = random_instance(600 + i, 64)
        model = dp.ModelSpec("pinning", beta, h, GEO)
        logz = dp.log_partition_pinning(model, om, 48).final_logz
        bound = beta * om.values[47] - h + float(GEO.log_density[47])
        assert logz >= bound - 1e-12


def test_monotone_convex_in_h():
    om = dp.sample_disorder(LAW, 64, 8)
    hs = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    vals = [dp.log_partition_pinning(dp.ModelSpec("pinning", 1.1, h, GEO), om, 64).final_logz
            for h in hs]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    for i in (1, 2, 3):
        assert vals[i] <= 0.5 * (vals[i - 1] + vals[i + 1]) + 1e-12


def test_free_endpoint_sandwich():
    for i in range(30):
        om, beta, h = random_instance(700 + i, 64)
        model = dp.ModelSpec("pinning", beta, h, GEO)
        logz = dp.log_partition_pinning(model, om, 64).final_logz
        logzf = dp.log_partition_free_endpoint(model, om, 64)
        assert logzf >= logz - 1e-12
        kmin = GEO.density[:64].min()
        upper = -math.log(kmin) + abs(beta * om.values[63] - h) + logz
        assert logzf <= upper + 1e-12


def test_free_endpoint_single_step():
    om = dp.sample_disorder(LAW, 2, 12)
    model = dp.ModelSpec("pinning", 0.8, -0.2, SRW)
    q = SRW.tail_mass(2) + SRW.defect_mass
    expected = q + SRW.density[0] * math.exp(0.8 * om.values[1] + 0.2)
    got = dp.log_partition_free_endpoint(model, om, 2)
    assert got == pytest.approx(math.log(expected), abs=1e-13)


def test_legendre_bracketing():
    for i in range(10):
        om, beta, h = random_instance(800 + i, 512)
        model = dp.ModelSpec("pinning", beta, h, GEO)
        table = dp.log_partition_constrained(model, om, 512)
        counts = np.arange(table.logz_j.shape[1], dtype=float)
        sup = float(np.max(table.logz_j[-1] - h * counts))
        logz = dp.log_partition_pinning(model, om, 512).final_logz
        assert sup <= logz + 1e-12
        assert logz <= sup + math.log(512 / GEO.period + 1) + 1e-12


def test_concatenation_superadditivity():
    # joining two constrained systems is one way to realize the long system
    n1 = n2 = 16
    beta = 1.4
    om = dp.sample_disorder(LAW, n1 + n2, 31)
    om1 = dp.DisorderSample(om.values[:n1], 0, LAW)
    om2 = dp.DisorderSample(om.values[n1:], 0, LAW)
    model = dp.ModelSpec("pinning", beta, 0.0, GEO)
    full = dp.log_partition_constrained(model, om, n1 + n2)
    part1 = dp.log_partition_constrained(model, om1, n1)
    part2 = dp.log_partition_constrained(model, om2, n2)
    for j1 in range(1, n1 + 1):
        for j2 in range(1, n2 + 1):
            lhs = full.logz_j[-1][j1 + j2]
            rhs = part1.logz_j[-1][j1] + part2.logz_j[-1][j2]
            if math.isfinite(rhs):
                assert lhs >= rhs - 1e-11


def test_table_entries_finite_or_neginf():
    om = dp.sample_disorder(LAW, 32, 2)
    model = dp.ModelSpec("pinning", 1.0, 0.3, SRW)
    table = dp.log_partition_constrained(model, om, 32)
    assert not np.any(np.isnan(table.logz_j))
    assert not np.any(np.isposinf(table.logz_j))
    # j beyond n/s is unreachable
    assert np.all(np.isneginf(table.logz_j[-1][17:]))
