import math

import numpy as np
import pytest

from conftest import REFERENCE_ROWS
from su3herald import fock_oracle as fo
from su3herald.exceptions import CutoffError
from su3herald.scattering import InterferometerParams


def binomial_block(m, n):
    """Image of |k, n-k> under x^dag -> M00 x^dag + M01 y^dag, y^dag -> M10 x^dag + M11 y^dag."""
    out = np.zeros((n + 1, n + 1))
    for k in range(n + 1):
        first, second = k, n - k
        norm = math.sqrt(math.factorial(first) * math.factorial(second))
        for i in range(first + 1):
            for j in range(second + 1):
                c = (
                    math.comb(first, i) * m[0, 0] ** i * m[0, 1] ** (first - i)
                    * math.comb(second, j) * m[1, 0] ** j * m[1, 1] ** (second - j)
                )
                x_power = i + j
                out[x_power, k] += c * math.sqrt(
                    math.factorial(x_power) * math.factorial(n - x_power)
                ) / norm
    return out


def test_vacuum_input_exact():
    state = fo.prepare_input(0.0, 16)
    expected = np.zeros((17, 17, 17))
    expected[0, 1, 1] = 1.0
    np.testing.assert_array_equal(state.amps, expected)
    assert state.leakage == 0.0


def test_input_truncation_weight_small_alpha():
    assert fo.truncation_weight(fo.prepare_input(1.0, 20)) < 1e-15


def test_input_norm_large_alpha():
    assert fo.prepare_input(3.0, 40).norm_squared() == pytest.approx(1.0, abs=1e-12)


def test_cutoff_below_floor_rejected():
    assert fo.cutoff_floor(3.0) == 37
    with pytest.raises(CutoffError):
        fo.prepare_input(3.0, 30)


@pytest.mark.parametrize("pair", [("b", "c"), ("a", "b")])
@pytest.mark.parametrize("eta", [0.0, 0.3, 0.5, 0.81, 1.0])
@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_blocks_match_binomial_expansion(pair, eta, n):
    m = fo.pair_matrix(pair, eta)
    u = fo._block_unitary(*map(float, m.ravel()), n)
    np.testing.assert_allclose(u, binomial_block(m, n), atol=1e-12)


@pytest.mark.parametrize("eta", [0.2, 0.6])
def test_single_photon_reads_off_stage_rows(eta):
    r, t = math.sqrt(eta), math.sqrt(1 - eta)
    amps = np.zeros((4, 4, 4))
    amps[0, 1, 0] = 1.0
    out = fo.apply_bs(fo.ThreeModeState(amps), ("b", "c"), eta).amps
    assert out[0, 1, 0] == pytest.approx(r) and out[0, 0, 1] == pytest.approx(t)
    amps = np.zeros((4, 4, 4))
    amps[0, 0, 1] = 1.0
    out = fo.apply_bs(fo.ThreeModeState(amps), ("b", "c"), eta).amps
    assert out[0, 1, 0] == pytest.approx(t) and out[0, 0, 1] == pytest.approx(-r)
    amps = np.zeros((4, 4, 4))
    amps[1, 0, 0] = 1.0
    out = fo.apply_bs(fo.ThreeModeState(amps), ("a", "b"), eta).amps
    assert out[1, 0, 0] == pytest.approx(-r) and out[0, 1, 0] == pytest.approx(t)


def test_full_reflectivity_is_a_sign_flip():
    rng = np.random.default_rng(3)
    amps = rng.normal(size=(6, 6, 6)) + 1j * rng.normal(size=(6, 6, 6))
    n = np.arange(6)
    bc = fo.apply_bs(fo.ThreeModeState(amps), ("b", "c"), 1.0).amps
    np.testing.assert_allclose(bc, amps * ((-1.0) ** n)[None, None, :], atol=1e-13)
    ab = fo.apply_bs(fo.ThreeModeState(amps), ("a", "b"), 1.0).amps
    np.testing.assert_allclose(ab, amps * ((-1.0) ** n)[:, None, None], atol=1e-13)


def test_invalid_pair_rejected():
    with pytest.raises(ValueError):
        fo.apply_bs(fo.prepare_input(0.0, 16), ("a", "c"), 0.5)


def test_norm_preserved_with_leakage_accounting():
    rng = np.random.default_rng(5)
    amps = rng.normal(size=(9, 9, 9)) + 1j * rng.normal(size=(9, 9, 9))
    amps /= np.linalg.norm(amps)
    state = fo.ThreeModeState(amps)
    for pair, eta in ((("b", "c"), 0.3), (("a", "b"), 0.7), (("b", "c"), 0.45)):
        state = fo.apply_bs(state, pair, eta)
    assert state.norm_squared() + state.leakage == pytest.approx(1.0, abs=1e-12)
    # states well below the cutoff lose nothing
    small = np.zeros((9, 9, 9), dtype=complex)
    small[:3, :3, :3] = amps[:3, :3, :3] / np.linalg.norm(amps[:3, :3, :3])
    out = fo.apply_bs(fo.ThreeModeState(small), ("a", "b"), 0.3)
    assert out.norm_squared() == pytest.approx(1.0, abs=1e-12)
    assert out.leakage < 1e-14


def test_photon_number_conserved_blockwise():
    amps = np.zeros((8, 8, 8))
    amps[2, 1, 1] = 1.0
    out = fo.apply_bs(fo.apply_bs(fo.ThreeModeState(amps), ("a", "b"), 0.4), ("b", "c"), 0.7).amps
    total = np.add.outer(np.add.outer(np.arange(8), np.arange(8)), np.arange(8))
    assert np.max(np.abs(out[total != 4])) < 1e-14


def test_circuit_unitarity():
    params = InterferometerParams(2.0, 0.3, 0.5, 0.7)
    state = fo.run_circuit(params, 40)
    assert state.norm_squared() + state.leakage == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("row", REFERENCE_ROWS[:2], ids=["row1", "row2"])
def test_pipeline_probability(row):
    _, p_d, _ = fo.simulate(InterferometerParams(*row[0]), 40)
    assert p_d == pytest.approx(row[1], abs=2e-5)


def test_full_reflectivity_pipeline():
    vec, p_d, _ = fo.simulate(InterferometerParams(2.0, 1.0, 1.0, 1.0), 40)
    assert p_d == pytest.approx(1.0, abs=1e-10)
    assert vec.fidelity(fo.coherent_amplitudes(-2.0, 40)) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("alpha", [1.0, 2.0, 3.0])
def test_cutoff_stability(alpha):
    params = InterferometerParams(alpha, 0.4, 0.6, 0.3)
    cut = fo.cutoff_floor(alpha)
    _, p1, _ = fo.simulate(params, cut)
    _, p2, _ = fo.simulate(params, 2 * cut)
    assert abs(p1 - p2) < 1e-9


def test_vacuum_moments_vanish():
    vac = fo.FockVector(np.eye(17)[0])
    for k, l in ((1, 0), (0, 1), (1, 1), (2, 1), (2, 2)):
        assert fo.oracle_moment(vac, k, l) == 0


def test_coherent_photon_number():
    vec = fo.FockVector(fo.coherent_amplitudes(1.5, 40))
    assert fo.oracle_moment(vec, 1, 1).real == pytest.approx(2.25, abs=1e-12)
    assert fo.oracle_moment(vec, 0, 1) == pytest.approx(1.5, abs=1e-12)


def test_oracle_g2_table_row():
    vec, _, _ = fo.simulate(InterferometerParams(1.0, 0.6, 0.6, 0.6), 40)
    n = fo.oracle_moment(vec, 1, 1).real
    g2 = fo.oracle_moment(vec, 2, 2).real / n**2
    assert g2 == pytest.approx(0.43187, abs=1e-4)


def test_moment_guard():
    with pytest.raises(CutoffError):
        fo.oracle_moment(fo.FockVector(np.eye(9)[0]), 3, 2)


def test_wigner_vacuum_and_single_photon():
    assert fo.oracle_wigner(fo.FockVector(np.eye(17)[0]), 0.0, 0.0) == pytest.approx(2 / math.pi, abs=1e-13)
    assert fo.oracle_wigner(fo.FockVector(np.eye(17)[1]), 0.0, 0.0) == pytest.approx(-2 / math.pi, abs=1e-13)


def test_wigner_single_photon_profile():
    q = np.linspace(-3, 3, 13)
    Q, P = np.meshgrid(q, q, indexing="ij")
    r2 = (Q**2 + P**2) / 2
    expected = 2 / math.pi * (4 * r2 - 1) * np.exp(-2 * r2)
    np.testing.assert_allclose(fo.oracle_wigner(fo.FockVector(np.eye(17)[1]), Q, P), expected, atol=1e-12)


def test_wigner_coherent_state():
    beta = 1.2 - 0.8j
    vec = fo.FockVector(fo.coherent_amplitudes(beta, 40))
    q, p = 0.9, -0.4
    b = complex(q, p) / math.sqrt(2)
    expected = 2 / math.pi * math.exp(-2 * abs(b - beta) ** 2)
    assert fo.oracle_wigner(vec, q, p) == pytest.approx(expected, abs=1e-12)
