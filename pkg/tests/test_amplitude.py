import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_defocusing, random_focusing
from fgnls.amplitude import (AmplitudeContext, Axis, FieldGrid, PhasePoint, Y1_coefficient, Y_matrix, build_context,
                             f_grid, f_value, jump_residual, psi_value, y1_formula)


def test_f_at_origin(paper_ctx):
    assert abs(f_value(paper_ctx, np.zeros(2)) - 1) < 1e-10


def test_f_at_half_half(paper_ctx):
    assert abs(abs(f_value(paper_ctx, [0.5, 0.5])) - 1 / 7) < 1e-6


@pytest.mark.parametrize("h,expected", [((0.5, 0.0), 5 / 7), ((0.0, 0.5), 3 / 7), ((0.5, 0.5), 1 / 7)])
def test_half_period_values(paper_ctx, h, expected):
    v = f_value(paper_ctx, h)
    assert abs(v - expected) < 1e-7


@given(st.lists(st.floats(0, 1), min_size=2, max_size=2), st.integers(-3, 3), st.integers(-3, 3))
def test_f_periodic(paper_ctx, w, m, n):
    w = np.array(w)
    a = f_value(paper_ctx, w)
    b = f_value(paper_ctx, w + [m, n])
    assert abs(a - b) < 1e-10


def test_psi_origin_equals_band_sum(paper_ctx, g3_ctx, g4_ctx):
    assert abs(abs(psi_value(paper_ctx, 0.0, 0.0)) - 3.5) < 1e-8
    assert abs(abs(psi_value(g4_ctx, 0.0, 0.0)) - 5.0) < 1e-5
    assert abs(abs(psi_value(g3_ctx, 0.0, 0.0)) - 4.0) < 1e-5


def test_psi_bounded(paper_ctx, rng):
    x = rng.uniform(-20, 20, 2000)
    t = rng.uniform(-20, 20, 2000)
    for _ in range(3):
        w0 = rng.random(2)
        assert np.abs(psi_value(paper_ctx, x, t, w0)).max() <= 3.5 + 1e-6


def test_phase_point_wraps():
    p = PhasePoint((1.25, -0.25, 3.0))
    assert p.omega == (0.25, 0.75, 0.0)


def test_Y_normalized_at_infinity(paper_ctx):
    Y = Y_matrix(paper_ctx, 1e6, [0.3, 0.7])
    assert np.max(np.abs(Y - np.eye(2))) < 1e-5


def test_det_Y_constant_on_circle(paper_ctx):
    w = [0.2, 0.6]
    dets = [np.linalg.det(Y_matrix(paper_ctx, 3.0 * np.exp(1j * th), w)) for th in np.linspace(0.1, 6.2, 12)]
    assert np.max(np.abs(np.array(dets) - dets[0])) < 1e-7


def test_jump_residual_random_genus_one(rng):
    ctx = build_context(random_focusing(rng, 1))
    assert jump_residual(ctx, rng.random(1), 32) < 1e-6


def test_jump_residual_defocusing(dnls_ctx):
    assert jump_residual(dnls_ctx, [0.37], 32) < 1e-6


def test_jump_residual_periodic_in_omega(paper_ctx):
    w = np.array([0.31, 0.77])
    a = jump_residual(paper_ctx, w, 8)
    b = jump_residual(paper_ctx, w + [1, -2], 8)
    assert abs(a - b) < 1e-8


def test_wrong_sign_d_is_detected(paper_ctx):
    bad = AmplitudeContext(paper_ctx.surface, paper_ctx.periods, paper_ctx.theta_ctx)
    object.__setattr__(bad, "d", paper_ctx.periods.u_inf.copy())
    w = [0.31, 0.77]
    # every theta ratio keeps its quasi-periodicity, so the jumps alone cannot see the sign of d
    assert jump_residual(bad, w, 8) < 1e-8
    # the poles are no longer cancelled: det Y varies and Y_1 leaves the f formula
    dets = [np.linalg.det(Y_matrix(bad, 3.0 * np.exp(1j * th), w)) for th in np.linspace(0.1, 6.2, 12)]
    assert np.ptp(np.abs(dets)) > 1e-2
    fit = Y1_coefficient(bad, w)[0, 1]
    assert abs(fit - y1_formula(paper_ctx, f_value(paper_ctx, w))) > 1e-2


def test_y1_at_origin(paper_ctx):
    y1 = Y1_coefficient(paper_ctx, np.zeros(2))
    assert abs(y1[0, 1] + 0.5 * 3.5) < 1e-5


def test_y1_at_half_half(paper_ctx):
    y1 = Y1_coefficient(paper_ctx, [0.5, 0.5])
    assert abs(abs(y1[0, 1]) - 0.25) < 1e-4


def test_y1_fit_matches_formula(rng):
    for g in (1, 2, 3):
        ctx = build_context(random_focusing(rng, g))
        for _ in range(3):
            w = rng.random(g)
            fit = Y1_coefficient(ctx, w)[0, 1]
            assert abs(fit - y1_formula(ctx, f_value(ctx, w))) < 1e-5
            assert abs(abs(fit) - 0.5 * abs(f_value(ctx, w)) * ctx.band_sum) < 1e-5


def test_y1_formula_is_minus_half_f_sum_b(paper_ctx):
    # (i/4) sum(e - s) = (i/4) 2i sum b = -sum(b) / 2 for vertical cuts
    v = y1_formula(paper_ctx, 1.0)
    assert abs(v + 0.5 * 3.5) < 1e-14


def test_defocusing_psi_bound(dnls_ctx, rng):
    x = rng.uniform(-10, 10, 3000)
    t = rng.uniform(-10, 10, 3000)
    a = np.abs(psi_value(dnls_ctx, x, t, rng.random(1)))
    assert a.max() <= 0.75 + 1e-6 and a.min() >= 0.25 - 1e-6


def test_real_at_half_periods():
    ctx = build_context(random_defocusing(np.random.default_rng(11), 2))
    for h in np.ndindex(2, 2):
        v = f_value(ctx, 0.5 * np.array(h))
        assert abs(v.imag) < 1e-9


def test_field_grid_csv_format():
    grid = FieldGrid([Axis("x", 0.0, 1.0, 2), Axis("t", -1.0, 1.0, 3)], np.arange(6).reshape(2, 3) * (1 + 1j))
    lines = grid.to_csv().splitlines()
    assert lines[0] == "# axes: x=0.0:1.0:2,t=-1.0:1.0:3"
    assert lines[1] == "x1,x2,re,im,abs"
    assert len(lines) == 2 + 6
    assert lines[-1].split(",")[:4] == ["1.0", "1.0", "5.0", "5.0"]


def test_field_grid_shape_check():
    with pytest.raises(ValueError):
        FieldGrid([Axis("x", 0, 1, 3)], np.zeros(4))


def test_f_grid_threads_agree(paper_ctx):
    a = f_grid(paper_ctx, 80, threads=1)
    b = f_grid(paper_ctx, 80, threads=4)
    assert np.array_equal(a.values, b.values)
    assert a.values.shape == (80, 80)
    assert abs(a.values[0, 0] - 1) < 1e-10


def test_context_is_frozen(paper_ctx):
    with pytest.raises(dataclasses.FrozenInstanceError):
        paper_ctx.band_sum = 1.0
