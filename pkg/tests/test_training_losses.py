"""Numeric correctness of the loss terms: closed forms, Monte-Carlo oracles,
finite-difference gradient checks, and the additivity of the total."""

import numpy as np
import pytest
import torch

from dubsynth.training import (
    LossBreakdown,
    MultiResolutionSTFTLoss,
    combine,
    kld_standard_normal,
    total_loss,
)


def mc_kld_oracle(mean, log_var, n_samples=1_000_000, seed=0):
    """Monte-Carlo estimate of KL(N(mean, exp(log_var)) || N(0, I))."""
    rng = np.random.default_rng(seed)
    mean = np.asarray(mean, dtype=np.float64)
    std = np.exp(0.5 * np.asarray(log_var, dtype=np.float64))
    x = mean + std * rng.standard_normal((n_samples, mean.size))
    log_q = -0.5 * ((x - mean) / std) ** 2 - np.log(std) - 0.5 * np.log(2 * np.pi)
    log_p = -0.5 * x**2 - 0.5 * np.log(2 * np.pi)
    return float(np.mean(np.sum(log_q - log_p, axis=1)))


class TestKldStandardNormal:
    def test_zero_for_standard_normal(self):
        mean = torch.zeros(8)
        log_var = torch.zeros(8)
        assert float(kld_standard_normal(mean, log_var)) == 0.0

    def test_unit_mean_closed_form(self):
        value = float(kld_standard_normal(torch.tensor([1.0]), torch.tensor([0.0])))
        assert value == pytest.approx(0.5, abs=1e-6)
        assert value == pytest.approx(mc_kld_oracle([1.0], [0.0]), abs=1e-2)

    def test_variance_four_closed_form(self):
        log_var = float(np.log(4.0))
        value = float(kld_standard_normal(torch.tensor([0.0]), torch.tensor([log_var])))
        expected = 0.5 * (4.0 - 1.0 - log_var)
        assert value == pytest.approx(expected, abs=1e-6)
        assert expected == pytest.approx(0.80685, abs=1e-4)
        assert value == pytest.approx(mc_kld_oracle([0.0], [log_var]), abs=1e-2)

    def test_random_vectors_against_monte_carlo(self):
        rng = np.random.default_rng(7)
        mean = rng.uniform(-1.5, 1.5, 4)
        log_var = rng.uniform(-1.0, 1.0, 4)
        value = float(kld_standard_normal(torch.tensor(mean), torch.tensor(log_var)))
        assert value == pytest.approx(mc_kld_oracle(mean, log_var, seed=3), abs=1e-2)

    def test_non_negative(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            mean = torch.tensor(rng.uniform(-3, 3, 6))
            log_var = torch.tensor(rng.uniform(-3, 2, 6))
            assert float(kld_standard_normal(mean, log_var)) >= 0.0

    def test_non_finite_input_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            kld_standard_normal(torch.tensor([float("nan")]), torch.tensor([0.0]))
        with pytest.raises(ValueError, match="finite"):
            kld_standard_normal(torch.tensor([0.0]), torch.tensor([float("inf")]))

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(23)
        mean = torch.tensor(rng.uniform(-1, 1, 8), requires_grad=True)
        log_var = torch.tensor(rng.uniform(-1, 1, 8), requires_grad=True)
        value = kld_standard_normal(mean, log_var)
        value.backward()

        step = 1e-4
        for tensor, grad in ((mean, mean.grad), (log_var, log_var.grad)):
            for i in range(8):
                with torch.no_grad():
                    original = float(tensor[i])
                    tensor[i] = original + step
                    up = float(kld_standard_normal(mean.detach(), log_var.detach()))
                    tensor[i] = original - step
                    down = float(kld_standard_normal(mean.detach(), log_var.detach()))
                    tensor[i] = original
                numeric = (up - down) / (2 * step)
                assert numeric == pytest.approx(float(grad[i]), rel=1e-3, abs=1e-6)


class TestTotalLoss:
    def make_parts(self, **kwargs):
        defaults = dict(l_vits_recon=1.0, l_vits_kl=0.0, l_vits_duration=0.0,
                        l_vits_adv=0.0, l_vits_featmatch=0.0,
                        l_prosody_kld=2.0, l_noise_kld=3.0, alpha1=0.001, alpha2=0.001)
        defaults.update(kwargs)
        return LossBreakdown(**defaults)

    def test_paper_coefficients_arithmetic(self):
        # 1.0 + 0.001 * 2.0 + 0.001 * 3.0 = 1.005
        assert total_loss(self.make_parts()) == pytest.approx(1.005, abs=1e-12)

    def test_zero_alphas_identity(self):
        parts = self.make_parts(alpha1=0.0, alpha2=0.0)
        assert total_loss(parts) == pytest.approx(parts.l_vits_sum, abs=1e-15)

    def test_base_variant_noise_term_zero(self):
        parts = self.make_parts(l_noise_kld=0.0)
        assert total_loss(parts) == pytest.approx(1.0 + 0.001 * 2.0, abs=1e-12)

    def test_random_parts_against_resummation_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            vals = rng.uniform(0, 5, 7)
            a1, a2 = rng.uniform(0, 1, 2)
            parts = LossBreakdown(*vals, alpha1=a1, alpha2=a2)
            oracle = float(np.sum(vals[:5]) + a1 * vals[5] + a2 * vals[6])
            assert total_loss(parts) == pytest.approx(oracle, abs=1e-9)

    def test_combine_sets_exact_total(self):
        parts = combine(self.make_parts())
        assert parts.l_total == total_loss(parts)


class TestReconstructionGradient:
    def test_stft_loss_gradient_matches_finite_differences(self):
        # toy instance: two analysis frames at the smallest resolution
        loss_fn = MultiResolutionSTFTLoss(resolutions=((64, 32),)).double()
        rng = np.random.default_rng(5)
        target = torch.tensor(rng.uniform(-0.5, 0.5, 128)).unsqueeze(0)
        pred = torch.tensor(rng.uniform(-0.5, 0.5, 128), requires_grad=True)

        loss = loss_fn(pred.unsqueeze(0), target)
        loss.backward()
        step = 1e-5
        idx = rng.choice(128, size=12, replace=False)
        for i in idx:
            with torch.no_grad():
                base = pred.detach().clone()
                up = base.clone()
                up[i] += step
                down = base.clone()
                down[i] -= step
                numeric = (float(loss_fn(up.unsqueeze(0), target))
                           - float(loss_fn(down.unsqueeze(0), target))) / (2 * step)
            assert numeric == pytest.approx(float(pred.grad[i]), rel=1e-3, abs=1e-7)

    def test_stft_loss_zero_for_identical_signals(self):
        loss_fn = MultiResolutionSTFTLoss(resolutions=((64, 32),))
        x = torch.rand(1, 256)
        assert float(loss_fn(x, x)) == pytest.approx(0.0, abs=1e-9)

    def test_stft_loss_positive_for_different_signals(self):
        loss_fn = MultiResolutionSTFTLoss(resolutions=((64, 32),))
        x = torch.rand(1, 256)
        assert float(loss_fn(x, 0.3 * torch.rand(1, 256) + 0.2)) > 0.0
