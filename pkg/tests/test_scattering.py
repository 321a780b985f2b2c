import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from su3herald.exceptions import ParameterDomainError
from su3herald.scattering import InterferometerParams, product_matrix, stage_matrix, total_matrix

unit = st.floats(min_value=0.0, max_value=1.0)


def test_stage2_at_full_reflectivity():
    np.testing.assert_array_equal(stage_matrix(2, 1.0), np.diag([-1.0, 1.0, 1.0]))


def test_stage1_at_full_reflectivity():
    np.testing.assert_array_equal(stage_matrix(1, 1.0), np.diag([1.0, 1.0, -1.0]))


def test_stage3_balanced():
    h = math.sqrt(0.5)
    expected = np.array([[1, 0, 0], [0, h, h], [0, h, -h]])
    np.testing.assert_allclose(stage_matrix(3, 0.5), expected, atol=1e-15)


def test_stage2_first_row():
    eta = 0.37
    np.testing.assert_allclose(stage_matrix(2, eta)[0], [-math.sqrt(eta), math.sqrt(1 - eta), 0.0])


@pytest.mark.parametrize("eta", [-0.01, 1.0001, float("nan")])
def test_rejects_out_of_range_eta(eta):
    with pytest.raises(ParameterDomainError):
        stage_matrix(1, eta)
    with pytest.raises(ParameterDomainError):
        InterferometerParams(1.0, 0.5, eta, 0.5)


def test_rejects_unknown_stage():
    with pytest.raises(ValueError):
        stage_matrix(4, 0.5)


def test_rejects_infinite_alpha():
    with pytest.raises(ParameterDomainError):
        InterferometerParams(float("inf"), 0.5, 0.5, 0.5)


def test_total_at_full_reflectivity():
    S = total_matrix(InterferometerParams(1.0, 1.0, 1.0, 1.0))
    np.testing.assert_allclose(S, np.diag([-1.0, 1.0, 1.0]), atol=1e-15)


def test_total_balanced_by_hand():
    S = total_matrix(InterferometerParams(1.0, 0.5, 0.5, 0.5))
    assert S[0, 0] == pytest.approx(-math.sqrt(0.5), abs=1e-15)
    assert S[1, 1] == pytest.approx(0.5 + math.sqrt(1 / 8), abs=1e-15)
    assert S[2, 2] == pytest.approx(0.5 + math.sqrt(1 / 8), abs=1e-15)
    assert S[1, 2] == pytest.approx(math.sqrt(1 / 8) - 0.5, abs=1e-15)
    assert S[2, 1] == pytest.approx(math.sqrt(1 / 8) - 0.5, abs=1e-15)


def test_closed_forms_match_product_on_grid():
    axis = np.linspace(0.0, 1.0, 21)
    worst_diff = worst_orth = worst_det = 0.0
    for etas in itertools.product(axis, repeat=3):
        params = InterferometerParams(1.0, *etas)
        S = total_matrix(params)
        worst_diff = max(worst_diff, np.max(np.abs(S - product_matrix(params))))
        worst_orth = max(worst_orth, np.max(np.abs(S @ S.T - np.eye(3))))
        worst_det = max(worst_det, abs(abs(np.linalg.det(S)) - 1.0))
    assert worst_diff < 1e-12
    assert worst_orth < 1e-12
    assert worst_det < 1e-10


@given(unit, unit, unit)
def test_entries_are_bounded_and_orthogonal(e1, e2, e3):
    S = total_matrix(InterferometerParams(0.0, e1, e2, e3))
    assert np.all(np.abs(S) <= 1.0 + 1e-15)
    np.testing.assert_allclose(S @ S.T, np.eye(3), atol=1e-12)
