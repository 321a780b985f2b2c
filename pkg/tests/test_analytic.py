import itertools
import math

import numpy as np
import pytest

from conftest import REFERENCE_ROWS, ROW_IDS, table_params
from su3herald import analytic, fock_oracle, metrics
from su3herald.exceptions import ZeroProbabilityError
from su3herald.scattering import InterferometerParams, total_matrix


def test_full_reflectivity_gives_displaced_coherent_state():
    st = analytic.herald(InterferometerParams(2.0, 1.0, 1.0, 1.0))
    assert st.c1 == 0 and st.c2 == 0
    assert st.beta0 == pytest.approx(-2.0)
    assert abs(st.c0) == pytest.approx(1.0, abs=1e-12)
    assert st.p_d == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("etas", [(0.3, 0.3, 0.3), (0.5, 0.7, 0.5), (0.1, 0.8, 0.4)])
def test_vacuum_input_gives_vacuum(etas):
    st = analytic.herald(InterferometerParams(0.0, *etas))
    assert st.c1 == 0 and st.c2 == 0 and st.beta0 == 0
    assert abs(st.c0) == pytest.approx(1.0, abs=1e-12)


def test_heralded_vector_matches_oracle():
    params = InterferometerParams(1.0, 0.3, 0.3, 0.3)
    st = analytic.herald(params)
    vec, _, _ = fock_oracle.simulate(params, 40)
    assert vec.fidelity(st.fock_amplitudes(40)) == pytest.approx(1.0, abs=1e-8)


def test_degenerate_post_selection_raises():
    # two single photons meeting on a balanced splitter never leave one per port
    params = InterferometerParams(1.0, 0.0, 0.5, 0.5)
    state = fock_oracle.run_circuit(params, 20)
    assert np.sum(np.abs(state.amps[:, 1, 1]) ** 2) < 1e-25
    with pytest.raises(ZeroProbabilityError):
        analytic.herald(params)
    with pytest.raises(ZeroProbabilityError):
        analytic.moment_table(params)


@pytest.mark.parametrize("row", REFERENCE_ROWS, ids=ROW_IDS)
def test_closed_probability_table(row):
    assert analytic.success_probability_closed(table_params(row)) == pytest.approx(row[1], abs=2e-5)


def test_vacuum_input_probability_by_hand():
    params = InterferometerParams(0.0, 0.5, 0.5, 0.5)
    S = total_matrix(params)
    g0 = (S[1, 1] * S[2, 2] + S[1, 2] * S[2, 1]) ** 2
    assert g0 == pytest.approx(0.5625, abs=1e-14)
    assert analytic.success_probability_closed(params) == pytest.approx(0.5625, abs=1e-14)
    _, p_oracle, _ = fock_oracle.simulate(params)
    assert p_oracle == pytest.approx(0.5625, abs=1e-14)


def test_genfunc_probability_agrees_with_closed():
    params = InterferometerParams(1.0, 0.3, 0.3, 0.3)
    assert analytic.success_probability_genfunc(params) == pytest.approx(
        analytic.success_probability_closed(params), abs=1e-10
    )


def test_genfunc_probability_trivial_point():
    assert analytic.success_probability_genfunc((1.0, 1.0, 1.0, 1.0)) == pytest.approx(1.0, abs=1e-14)


def test_genfunc_probability_last_row():
    assert analytic.success_probability_genfunc((3.0, 0.5, 0.7, 0.5)) == pytest.approx(0.01392, abs=2e-5)


def test_literal_g2_transcription_disagrees_with_oracle():
    # The printed g2 contains S12^2 twice in one term; the oracle rules that reading out.
    params = InterferometerParams(1.0, 0.3, 0.3, 0.3)
    S = total_matrix(params)
    s = lambda i, j: S[i - 1, j - 1]
    w = s(2, 3) * s(3, 1) + s(2, 1) * s(3, 3)
    printed = 4 * s(1, 1) * s(1, 2) ** 4 * s(1, 3) * s(2, 1) * s(3, 1) * w
    used = 4 * s(1, 1) * s(1, 2) ** 2 * s(1, 3) * s(2, 1) * s(3, 1) * w
    p_literal = analytic.success_probability_closed(params) + (printed - used) * math.exp(
        -(1 - s(1, 1) ** 2)
    )
    _, p_oracle, _ = fock_oracle.simulate(params, 40)
    assert abs(analytic.success_probability_closed(params) - p_oracle) < 1e-12
    assert abs(p_literal - p_oracle) > 1e-3


def test_closed_and_genfunc_agree_on_grid():
    axis = np.linspace(0.1, 0.9, 9)
    worst = 0.0
    for alpha in (0.5, 1.0, 2.0, 3.0):
        for etas in itertools.product(axis, repeat=3):
            params = InterferometerParams(alpha, *etas)
            diff = abs(
                analytic.success_probability_closed(params)
                - analytic.success_probability_genfunc(params)
            )
            worst = max(worst, diff)
    assert worst < 1e-10


def test_complex_alpha_probability_depends_on_modulus():
    base = analytic.success_probability_closed((1.7, 0.2, 0.6, 0.4))
    rotated = InterferometerParams(1.7 * np.exp(0.9j), 0.2, 0.6, 0.4)
    assert analytic.success_probability_closed(rotated) == pytest.approx(base, abs=1e-14)
    assert analytic.success_probability_genfunc(rotated) == pytest.approx(base, abs=1e-12)


def test_normalization_moment():
    assert analytic.moment((1.0, 0.4, 0.6, 0.2), 0, 0) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("alpha", [0.5, 1.0, -2.0, 3.0])
def test_coherent_photon_number(alpha):
    assert analytic.moment((alpha, 1.0, 1.0, 1.0), 1, 1) == pytest.approx(alpha**2, abs=1e-12)


def test_photon_number_matches_oracle():
    params = InterferometerParams(1.0, 0.3, 0.3, 0.3)
    vec, _, _ = fock_oracle.simulate(params, 40)
    oracle = fock_oracle.oracle_moment(vec, 1, 1)
    assert analytic.moment(params, 1, 1) == pytest.approx(oracle, abs=1e-8)


def test_complex_alpha_moments_match_oracle():
    params = InterferometerParams(1.2 * np.exp(0.7j), 0.35, 0.55, 0.8)
    vec, _, _ = fock_oracle.simulate(params, 40)
    table = analytic.moment_table(params, 2)
    for k, l in itertools.product(range(3), repeat=2):
        assert table[k, l] == pytest.approx(fock_oracle.oracle_moment(vec, k, l), abs=1e-10)


def test_moment_order_cap():
    with pytest.raises(ValueError):
        analytic.moment((1.0, 0.5, 0.5, 0.5), 9, 0)


def test_moment_hermiticity():
    rng = np.random.default_rng(7)
    for _ in range(20):
        params = InterferometerParams(rng.uniform(0.2, 3.0), *rng.uniform(0, 1, 3))
        m = analytic.moment_table(params, 3)
        np.testing.assert_allclose(m, m.conj().T, atol=1e-10)


def test_norm_consistency_random_draws():
    rng = np.random.default_rng(11)
    for _ in range(100):
        params = InterferometerParams(rng.uniform(0.0, 3.0), *rng.uniform(0, 1, 3))
        p_d = analytic.success_probability_closed(params)
        if p_d < 1e-8:
            continue
        vec = analytic.unnormalized_heralded_vector(params, 60)
        assert np.sum(np.abs(vec) ** 2) == pytest.approx(p_d, abs=1e-10)
        assert analytic.herald(params).norm_squared() == pytest.approx(1.0, abs=1e-10)


def test_reduction_towards_full_reflectivity():
    coeff_sizes, probs = [], []
    for eta in (0.99, 0.999, 0.9999):
        st = analytic.herald((1.0, eta, eta, eta))
        coeff_sizes.append(abs(st.c1) + abs(st.c2))
        probs.append(st.p_d)
    assert coeff_sizes[0] > coeff_sizes[1] > coeff_sizes[2]
    assert probs[0] < probs[1] < probs[2] < 1.0
    assert coeff_sizes[2] < 1e-3 and 1 - probs[2] < 1e-3


def test_coherent_wigner_peak():
    params = InterferometerParams(1.5, 1.0, 1.0, 1.0)
    q0 = math.sqrt(2) * -1.5
    assert analytic.wigner_point(params, q0, 0.0) == pytest.approx(2 / math.pi, abs=1e-12)
    # Gaussian profile W = (2/pi) exp(-2|beta - beta0|^2)
    assert analytic.wigner_point(params, q0 + 0.4, -0.3) == pytest.approx(
        2 / math.pi * math.exp(-(0.4**2 + 0.3**2)), abs=1e-12
    )


def test_wigner_negative_somewhere():
    params = InterferometerParams(1.0, 0.05, 0.05, 0.05)
    q = np.linspace(-6, 6, 121)
    Q, P = np.meshgrid(q, q, indexing="ij")
    assert analytic.wigner_grid(params, Q, P).min() < 0


def test_wigner_matches_oracle():
    params = InterferometerParams(2.0, 0.25, 0.25, 0.25)
    vec, _, _ = fock_oracle.simulate(params, 40)
    q = np.linspace(-6, 6, 41)
    Q, P = np.meshgrid(q, q, indexing="ij")
    diff = analytic.wigner_grid(params, Q, P) - fock_oracle.oracle_wigner(vec, Q, P)
    assert np.max(np.abs(diff)) < 1e-7


def test_wigner_point_equals_grid():
    params = InterferometerParams(1.3 + 0.4j, 0.2, 0.7, 0.45)
    pts = [(0.0, 0.0), (-1.1, 0.7), (2.3, -1.9)]
    grid = analytic.wigner_grid(params, np.array([p[0] for p in pts]), np.array([p[1] for p in pts]))
    for (q, p), value in zip(pts, grid):
        assert analytic.wigner_point(params, q, p) == pytest.approx(value, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0, 3.0])
def test_wigner_normalization(alpha):
    params = InterferometerParams(alpha, 0.3, 0.6, 0.8)
    grid = metrics.WignerGrid.around(params, 201)
    assert metrics.integrate(metrics.wigner_values(params, grid), grid) == pytest.approx(1.0, abs=1e-4)
