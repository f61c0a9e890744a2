import numpy as np
import pytest

from stapwave import build_clutter_geometry, initial_waveform, mvdr_filter, \
    optimal_sinr, output_sinr, to_db
from stapwave.model import interference_covariance, target_response

from conftest import random_unit_energy, tiny_config


def random_pd(rng, dim, floor=0.5):
    root = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return root @ root.conj().T / dim + floor * np.eye(dim)


class TestMvdr:
    def test_identity_covariance(self, rng):
        steering = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        assert np.allclose(mvdr_filter(np.eye(6, dtype=complex), steering), steering)

    def test_diagonal_hand_case(self):
        cov = np.diag([1.0, 4.0]).astype(complex)
        weights = mvdr_filter(cov, np.array([1.0, 1.0], dtype=complex))
        assert np.allclose(weights, [1.0, 0.25])

    def test_scale_equivariance(self, rng):
        cov = random_pd(rng, 5)
        steering = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        base = mvdr_filter(cov, steering)
        scaled = mvdr_filter(3.0 * cov, steering)
        assert np.allclose(scaled, base / 3.0)
        assert output_sinr(base, steering, cov) == pytest.approx(
            output_sinr(scaled, steering, 3.0 * cov) * 3.0)

    def test_non_pd_rejected(self):
        cov = -np.eye(3, dtype=complex)
        with pytest.raises(ValueError):
            mvdr_filter(cov, np.ones(3, complex))

    def test_solve_residual_small(self, rng):
        cov = random_pd(rng, 8)
        steering = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        weights = mvdr_filter(cov, steering)
        assert np.linalg.norm(cov @ weights - steering) <= 1e-8 * np.linalg.norm(steering)


class TestSinr:
    def test_filter_scale_invariance(self, rng):
        cov = random_pd(rng, 5)
        steering = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        weights = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        a = output_sinr(weights, steering, cov)
        b = output_sinr((0.3 - 2.0j) * weights, steering, cov)
        assert a == pytest.approx(b, rel=1e-12)

    def test_mvdr_matches_closed_form_and_dominates(self, rng):
        # 50 random instances: the two SINR expressions agree through the
        # optimal filter, which beats 100 random filters each time
        for _ in range(50):
            dim = int(rng.integers(3, 9))
            cov = random_pd(rng, dim)
            steering = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            weights = mvdr_filter(cov, steering)
            explicit = output_sinr(weights, steering, cov)
            closed = optimal_sinr(cov, steering)
            assert explicit == pytest.approx(closed, rel=1e-8)
            for _ in range(100):
                other = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
                assert output_sinr(other, steering, cov) <= explicit * (1 + 1e-10)

    def test_noise_only_matched_filter_value(self):
        # single transmitter, no clutter: optimal SINR is pulse count times
        # receiver count times energy over the noise power
        cfg = tiny_config(0, **{
            "radar.n_tx": 1, "clutter.n_patches_per_ring": 0,
            "init.kind": "lfm", "init.chirp_rate": 1e10,
        })
        stacked = initial_waveform(cfg).sample_major
        cov = interference_covariance(cfg, [], stacked)
        steering = target_response(cfg, stacked)
        expected = cfg.n_pulses * cfg.n_rx * cfg.total_energy / cfg.noise_power
        assert optimal_sinr(cov, steering) == pytest.approx(expected, rel=1e-12)

    def test_zero_filter_rejected(self, rng):
        cov = random_pd(rng, 4)
        steering = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        with pytest.raises(ValueError):
            output_sinr(np.zeros(4, complex), steering, cov)

    def test_db_conversion(self):
        assert to_db(100.0) == pytest.approx(20.0)
        assert to_db(0.0) == -np.inf
