"""Spectral substrate: transforms, calculus operators, norms, products."""

import math

import numpy as np
import pytest

from mhdlp import (
    Grid,
    curl,
    dealias,
    divergence,
    divergence_residual,
    from_physical,
    gradient,
    inner_product,
    leray_project,
    lp_norm,
    multiply,
    multiply_padded,
    random_divergence_free,
    random_field,
    to_physical,
)
from mhdlp.fields import SpectralField, l2_norm_spectral, symmetry_error, zero_field


class TestTransforms:
    def test_round_trip(self, grid64, rng):
        phys = rng.standard_normal((2,) + grid64.shape)
        f = from_physical(grid64, phys)
        back = to_physical(f)
        assert np.max(np.abs(back - phys)) < 1e-13 * np.max(np.abs(phys))

    def test_single_mode_amplitude(self, grid64):
        # cos(3x) has amplitude 1/2 at k = (+-3, 0)
        x = grid64.coords
        f = from_physical(grid64, np.cos(3 * x[0]))
        assert abs(f.data[0, 3, 0] - 0.5) < 1e-14
        assert abs(f.data[0, -3, 0] - 0.5) < 1e-14

    def test_real_fields_are_conjugate_symmetric(self, grid64, rng):
        f = from_physical(grid64, rng.standard_normal(grid64.shape))
        assert symmetry_error(f) == 0.0


class TestLpNorm:
    def test_constant_field(self):
        g = Grid(2, 32, period=2 * np.pi)
        f = from_physical(g, np.full(g.shape, 3.0))
        assert abs(lp_norm(f, 2) - 3.0 * math.sqrt(g.volume)) < 1e-12

    def test_sup_norm_of_sine(self):
        g = Grid(2, 64)
        f = from_physical(g, np.sin(g.coords[0]))
        # grid sampling misses the true max by at most (dx)^2/2
        assert abs(lp_norm(f, math.inf) - 1.0) <= (2 * np.pi / 64) ** 2 / 2

    def test_parseval_oracle(self, grid64, rng):
        """Quadrature L2 norm equals the coefficient-sum (Parseval) route."""
        f = random_field(grid64, rng, ncomp=2)
        quad = lp_norm(f, 2)
        parseval = math.sqrt(grid64.volume * np.sum(np.abs(f.data) ** 2))
        assert abs(quad - parseval) < 1e-12 * parseval

    def test_rejects_p_below_one(self, grid64, rng):
        with pytest.raises(ValueError, match="p"):
            lp_norm(random_field(grid64, rng), 0.5)


class TestLerayProjection:
    def test_idempotent_on_divergence_free(self, grid64, rng):
        f = random_divergence_free(grid64, rng)
        pf = leray_project(f)
        assert l2_norm_spectral(pf - f) < 1e-14 * l2_norm_spectral(f)

    def test_gradients_are_killed(self, grid64, rng):
        grad = gradient(random_field(grid64, rng))
        assert l2_norm_spectral(leray_project(grad)) < 1e-14 * l2_norm_spectral(grad)

    def test_matches_per_mode_formula(self, rng):
        """Brute-force per-wavenumber oracle for the projector."""
        g = Grid(2, 16)
        f = random_field(g, rng, ncomp=2)
        pf = leray_project(f)
        expected = np.zeros_like(f.data)
        for i in range(16):
            for j in range(16):
                k = np.array([g.k_vectors[0][i, j], g.k_vectors[1][i, j]])
                u = f.data[:, i, j]
                k2 = np.dot(k, k)
                expected[:, i, j] = u if k2 == 0 else u - k * np.dot(k, u) / k2
        assert np.max(np.abs(pf.data - expected)) < 1e-14

    def test_zero_mode_unchanged(self, grid64):
        f = SpectralField(grid64, np.zeros((2,) + grid64.shape, dtype=complex))
        f.data[0, 0, 0] = 2.5
        f.data[1, 0, 0] = -1.0
        pf = leray_project(f)
        assert pf.data[0, 0, 0] == 2.5 and pf.data[1, 0, 0] == -1.0

    def test_output_satisfies_divergence_invariant(self, grid64, rng):
        pf = leray_project(random_field(grid64, rng, ncomp=2))
        assert divergence_residual(pf) <= 1e-12


class TestCurl:
    def test_analytic_curl_3d(self):
        g = Grid(3, 16)
        x = g.coords
        u = from_physical(g, np.stack([np.sin(x[1]), np.zeros(g.shape), np.zeros(g.shape)]))
        w = to_physical(curl(u))
        expected = np.stack([np.zeros(g.shape), np.zeros(g.shape), -np.cos(x[1])])
        assert np.max(np.abs(w - expected)) < 1e-13

    def test_constant_field_has_zero_curl(self, grid3d):
        f = from_physical(grid3d, np.ones((3,) + grid3d.shape))
        assert l2_norm_spectral(curl(f)) == 0.0

    def test_divergence_of_curl_vanishes(self, grid3d, rng):
        u = random_field(grid3d, rng, ncomp=3, k_hi=5.0)
        w = curl(u)
        assert l2_norm_spectral(divergence(w)) < 1e-13 * l2_norm_spectral(w)

    def test_curl_of_gradient_vanishes(self, grid3d, rng):
        grad = gradient(random_field(grid3d, rng, k_hi=5.0))
        assert l2_norm_spectral(curl(grad)) < 1e-13 * l2_norm_spectral(grad)

    def test_2d_scalar_vorticity(self, grid64):
        x = grid64.coords
        u = from_physical(grid64, np.stack([-np.sin(x[1]), np.sin(x[0])]))
        w = to_physical(curl(u))[0]
        expected = np.cos(x[0]) + np.cos(x[1])
        assert np.max(np.abs(w - expected)) < 1e-13


class TestDealias:
    def test_band_limited_field_unchanged(self, grid64, rng):
        f = random_field(grid64, rng, k_hi=grid64.n / 3 - 2)
        assert np.array_equal(dealias(f).data, f.data)

    def test_high_mode_zeroed(self, grid64):
        f = zero_field(grid64, 1)
        f.data[0, grid64.n // 2 - 1, 0] = 1.0
        assert np.all(dealias(f).data == 0)

    def test_mask_matches_enumeration(self, rng):
        """Retained-mode set equals brute-force mask enumeration."""
        g = Grid(2, 16)
        f = random_field(g, rng)
        out = dealias(f)
        for i in range(16):
            for j in range(16):
                ki = i if i < 8 else i - 16
                kj = j if j < 8 else j - 16
                keep = abs(ki) < 16 / 3 and abs(kj) < 16 / 3
                if keep:
                    assert out.data[0, i, j] == f.data[0, i, j]
                else:
                    assert out.data[0, i, j] == 0.0

    def test_idempotent(self, grid64, rng):
        f = random_field(grid64, rng)
        once = dealias(f)
        assert np.array_equal(dealias(once).data, once.data)


class TestProducts:
    def test_padded_product_is_exact_for_band_limited(self, grid64, rng):
        """Products of low-band fields are exactly representable: the
        padded route must agree with a direct physical product."""
        u = random_field(grid64, rng, k_hi=10.0)
        v = random_field(grid64, rng, k_hi=10.0)
        prod = multiply_padded(u, v)
        direct = from_physical(grid64, to_physical(u) * to_physical(v))
        assert l2_norm_spectral(prod - direct) < 1e-13 * l2_norm_spectral(direct)

    def test_solver_product_is_dealiased(self, grid64, rng):
        u = random_field(grid64, rng)
        v = random_field(grid64, rng)
        prod = multiply(u, v)
        assert np.all(prod.data[~grid64.dealias_mask[np.newaxis].repeat(1, 0)] == 0.0)

    def test_scalar_vector_broadcast(self, grid64, rng):
        s = random_field(grid64, rng, k_hi=8.0)
        v = random_field(grid64, rng, ncomp=2, k_hi=8.0)
        prod = multiply_padded(s, v)
        assert prod.ncomp == 2


def test_divergence_residual_flags_gradients(grid64, rng):
    grad = gradient(random_field(grid64, rng))
    assert divergence_residual(grad) > 1e-3


def test_projection_orthogonal_to_gradients(grid64, rng):
    """Pairing of a projected field against any gradient vanishes."""
    f = leray_project(random_field(grid64, rng, ncomp=2))
    for _ in range(5):
        grad = gradient(random_field(grid64, rng))
        scale = l2_norm_spectral(f) * l2_norm_spectral(grad)
        assert abs(inner_product(f, grad)) <= 1e-12 * scale


def test_fft_workers_env(monkeypatch):
    from mhdlp.grid import fft_workers

    monkeypatch.delenv("MHD_THREADS", raising=False)
    assert fft_workers() == 1
    monkeypatch.setenv("MHD_THREADS", "3")
    assert fft_workers() == 3
    monkeypatch.setenv("MHD_THREADS", "junk")
    assert fft_workers() == 1


def test_embed_field_preserves_physics(grid64, rng):
    """Embedding on a finer grid reproduces the same physical samples."""
    from mhdlp.fields import embed_field

    f = random_field(grid64, rng, k_hi=10.0)
    fine = Grid(2, 128)
    g = embed_field(f, fine)
    coarse_vals = to_physical(f)[0]
    fine_vals = to_physical(g)[0][::2, ::2]  # shared sample points
    assert np.max(np.abs(coarse_vals - fine_vals)) < 1e-12 * np.max(np.abs(coarse_vals))
