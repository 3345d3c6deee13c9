import numpy as np
import pytest
from hypothesis import given, strategies as st

from fgnls.errors import TruncationOverflow
from fgnls.theta import (ThetaContext, certificate, log_theta, theta, theta_grad, theta_reduce,
                         theta_unreduced)


def brute_theta(tau, z, radius=20):
    """Direct sum over the cube [-radius, radius]^g."""
    tau = np.atleast_2d(tau)
    g = tau.shape[0]
    axes = [np.arange(-radius, radius + 1)] * g
    n = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, g)
    return np.sum(np.exp(1j * np.pi * np.einsum("ni,ij,nj->n", n, tau, n) + 2j * np.pi * n @ z))


def random_tau(rng, g):
    X = rng.uniform(-0.5, 0.5, (g, g))
    M = rng.normal(size=(g, g))
    return 0.5 * (X + X.T) + 1j * (M @ M.T + 0.5 * np.eye(g))


@pytest.fixture(scope="module")
def ctx3():
    return ThetaContext(random_tau(np.random.default_rng(7), 3))


def test_genus_one_matches_brute_force():
    ctx = ThetaContext(np.array([[1j]]))
    for z in (0.0, 0.3, 0.2 + 0.4j, -0.7 - 0.1j):
        assert abs(theta(ctx, [z]) - brute_theta([[1j]], np.array([z]))) < 1e-12


def test_genus_two_matches_brute_force():
    tau = np.array([[0.3 + 1.1j, 0.2 + 0.4j], [0.2 + 0.4j, -0.1 + 0.9j]])
    ctx = ThetaContext(tau)
    z = np.array([0.1 + 0.2j, -0.3 + 0.05j])
    assert abs(theta(ctx, z) - brute_theta(tau, z, 12)) < 1e-12


@given(st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_even(ctx3, xs):
    z = np.array(xs[:3]) + 1j * np.array(xs[3:])
    a, b = theta(ctx3, z), theta(ctx3, -z)
    assert abs(a - b) < 1e-10 * max(1, abs(a))


@given(st.lists(st.integers(-3, 3), min_size=6, max_size=6), st.lists(st.floats(-0.5, 0.5), min_size=6, max_size=6))
def test_quasi_periodicity(ctx3, ints, xs):
    mu, lam = np.array(ints[:3]), np.array(ints[3:])
    z = np.array(xs[:3]) + 1j * np.array(xs[3:])
    tau = ctx3.tau
    lhs = log_theta(ctx3, z + mu + tau @ lam)
    rhs = -2j * np.pi * lam @ z - 1j * np.pi * lam @ tau @ lam + log_theta(ctx3, z)
    d = lhs - rhs
    assert abs(d.real) < 1e-9
    assert abs(np.mod(d.imag + np.pi, 2 * np.pi) - np.pi) < 1e-9


def test_reduce_real_argument_is_identity(ctx3):
    z = np.array([0.1, -0.4, 0.35])
    zr, logp = theta_reduce(ctx3, z)
    assert np.array_equal(zr, z) and logp == 0


def test_reduce_tau_column(ctx3):
    z = ctx3.tau[:, 0]
    zr, logp = theta_reduce(ctx3, z)
    assert np.max(np.abs(zr)) < 1e-14
    assert abs(logp - (-1j * np.pi * ctx3.tau[0, 0])) < 1e-12


def test_reduce_round_trip(ctx3, rng):
    for _ in range(10):
        z = rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1.5, 1.5, 3)
        zr, logp = theta_reduce(ctx3, z)
        direct = theta_unreduced(ctx3, z)
        assert abs(np.exp(logp) * theta(ctx3, zr) - direct) < 1e-10 * max(1, abs(direct))


def test_gradient_vanishes_at_zero(ctx3):
    assert np.max(np.abs(theta_grad(ctx3, np.zeros(3)))) < 1e-12


def test_gradient_vanishes_at_half_periods(ctx3):
    for h in np.ndindex(2, 2, 2):
        w = 0.5 * np.array(h)
        g = theta_grad(ctx3, w.astype(complex))
        assert np.max(np.abs(g)) < 1e-9 * max(1, abs(theta(ctx3, w)))


def test_gradient_against_finite_differences(ctx3, rng):
    z = rng.uniform(-1, 1, 3) + 1j * rng.uniform(-0.5, 0.5, 3)
    h = 1e-5
    fd = np.array([(theta(ctx3, z + h * e) - theta(ctx3, z - h * e)) / (2 * h) for e in np.eye(3)])
    assert np.max(np.abs(theta_grad(ctx3, z) - fd)) < 1e-6 * max(1, np.abs(fd).max())


def test_real_for_symmetric_tau():
    # focusing pattern: Re tau = (I + L) / 2
    tau = 0.5 * (np.eye(2) + np.ones((2, 2))) + 1j * np.array([[1.2, 0.4], [0.4, 0.8]])
    ctx = ThetaContext(tau)
    rng = np.random.default_rng(1)
    for _ in range(20):
        for z in (rng.random(2), 0.5 * rng.integers(0, 2, 2) + 1j * rng.normal(size=2)):
            v = theta(ctx, z)
            assert abs(v.imag) < 1e-9 * abs(v)


def test_conjugation(ctx3, rng):
    z = rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)
    # general form; for the surface patterns of Re tau it reduces to Theta(-conj z; tau)
    other = ThetaContext(-np.conj(ctx3.tau))
    assert abs(np.conj(theta(ctx3, z)) - theta(other, np.conj(z))) < 1e-10


def test_conjugation_focusing_pattern():
    tau = 0.5 * (np.eye(2) + np.ones((2, 2))) + 1j * np.array([[1.2, 0.4], [0.4, 0.8]])
    ctx = ThetaContext(tau)
    z = np.array([0.3 + 0.2j, -0.1 + 0.4j])
    assert abs(np.conj(theta(ctx, z)) - theta(ctx, -np.conj(z))) < 1e-12


def test_positive_on_real_torus(ctx3, rng):
    v = theta(ctx3, rng.random((500, 3)).astype(complex))
    assert np.all(np.abs(v) > 0)


def test_certificate_change_below_eps(ctx3):
    cert = certificate(ctx3, np.array([0.1 + 0.2j, 0.3, -0.2 - 0.1j]))
    assert cert.change < ctx3.eps * max(1, abs(cert.value))
    assert cert.n_points == len(ctx3.points)


def test_truncation_overflow():
    with pytest.raises(TruncationOverflow):
        ThetaContext(1e-4j * np.eye(3))


def test_rejects_asymmetric_tau():
    with pytest.raises(ValueError):
        ThetaContext(np.array([[1j, 0.1], [0.0, 1j]]))


def test_rejects_indefinite_imaginary_part():
    with pytest.raises(ValueError):
        ThetaContext(np.array([[1j, 0], [0, -1j]]))
