"""Capital models: closed-form internal model, mixed model and its engines."""

from __future__ import annotations

import math

import numpy as np
import pytest

from scrkit.datasets import MODEL_1, MODEL_2, SAMPLE_STDEVS, benchmark_profiles
from scrkit.errors import ConfigurationError, DataQualityWarning, DomainError, ResolutionError
from scrkit.profiles import LiabilityProfile, LobFigures
from scrkit.risk_models import (
    ConvolutionSettings,
    McSettings,
    MixedLossModel,
    ModelParams,
    build_mixed_model,
    model_sigma_table,
    quantile_total_loss,
    scr_mixed_model,
    scr_simple_internal,
    symmetric_gp_quantile,
)
from scrkit.rngs import substream
from scrkit.stats import normal_quantile

Z995 = normal_quantile(0.995)


def profile_of(company: str, **lobs: tuple[float, float, float]) -> LiabilityProfile:
    return LiabilityProfile(
        company=company,
        figures={lob: LobFigures(premium=v, r0=r0, p0=p0) for lob, (v, r0, p0) in lobs.items()},
    )


class TestSimpleInternal:
    def test_single_lob_reduces_to_normal_quantile(self):
        profile = profile_of("A", H=(1.0, 0.4, 0.6))
        assert scr_simple_internal(profile, {"H": 1.0}) == pytest.approx(Z995, rel=1e-14)

    def test_matches_formula_oracle_for_benchmark_companies(self):
        for company, profile in benchmark_profiles().items():
            stdevs = SAMPLE_STDEVS[company]
            expected = Z995 * math.sqrt(
                sum((profile.y0(lob) * stdevs[lob]) ** 2 for lob in profile.lobs())
            )
            assert scr_simple_internal(profile, stdevs) == pytest.approx(expected, rel=1e-14)

    def test_published_value_within_rounding(self):
        # The company whose published total is insensitive to the two-digit
        # rounding of the published inputs; the other three are checked in
        # the acceptance suite at the stated (tighter) tolerance.
        profiles = benchmark_profiles()
        assert scr_simple_internal(profiles["If"], SAMPLE_STDEVS["If"]) == pytest.approx(1.47, abs=0.01)

    def test_missing_stdev_for_active_lob(self):
        profile = profile_of("A", H=(1.0, 0.4, 0.6), MO=(1.0, 0.2, 0.3))
        with pytest.raises(ConfigurationError, match="MO"):
            scr_simple_internal(profile, {"H": 0.1})

    def test_zero_volume_lob_needs_no_stdev(self):
        profile = profile_of("A", H=(1.0, 0.4, 0.6), MO=(1.0, 0.0, 0.0))
        assert scr_simple_internal(profile, {"H": 0.1}) == pytest.approx(Z995 * 0.1, rel=1e-12)

    def test_positive_homogeneity(self):
        profile = profile_of("A", H=(1.0, 0.4, 0.6), ML=(2.0, 3.0, 1.0))
        stdevs = {"H": 0.1, "ML": 0.05}
        base = scr_simple_internal(profile, stdevs)
        for lam in (0.25, 7.0, 1234.5):
            scaled = profile_of("A", H=(lam * 1.0, lam * 0.4, lam * 0.6), ML=(lam * 2.0, lam * 3.0, lam * 1.0))
            assert scr_simple_internal(scaled, stdevs) == pytest.approx(lam * base, rel=1e-9)


class TestBuildMixedModel:
    def test_pythagorean_case_without_motor_liability(self):
        params = ModelParams(
            sigma_h=0.1, sigma_mo=0.2, rho_1=0.0, sigma_ml=0.05,
            xi_ia=0.0, beta_ia=0.088, xi_blp=0.0, beta_blp=0.16,
        )
        profile = profile_of("A", H=(1.0, 1.0, 2.0), MO=(1.0, 0.5, 0.5), IA=(1.0, 0.6, 0.4), BLP=(1.0, 0.3, 0.7))
        model = build_mixed_model(profile, params)
        assert model.sigma_normal == pytest.approx(math.hypot(3.0 * 0.1, 1.0 * 0.2), rel=1e-12)

    def test_folksam_model1_components(self):
        model = build_mixed_model(benchmark_profiles()["Folksam"], MODEL_1)
        # Hand evaluation of the combined-variance display with the bundled inputs.
        variance = (2.88 * 0.099) ** 2 + (1.31 * 0.12) ** 2 \
            + 2 * 2.88 * 1.31 * 0.099 * 0.12 * 0.35 + (5.06 * 0.050) ** 2
        assert model.sigma_normal == pytest.approx(math.sqrt(variance), rel=1e-12)
        assert model.sigma_normal == pytest.approx(0.449, abs=5e-4)
        assert model.laplace_scales == (pytest.approx(0.54208, abs=1e-10), pytest.approx(0.0512, abs=1e-10))
        assert model.gp_shapes == (0.0, 0.0)
        assert model.component_lobs == ("IA", "BLP")

    def test_trygg_hansa_uses_override(self):
        profiles = benchmark_profiles()
        model = build_mixed_model(profiles["Trygg-Hansa"], MODEL_1)
        y0 = profiles["Trygg-Hansa"]
        variance_own = (y0.y0("H") * 0.099) ** 2 + (y0.y0("MO") * 0.12) ** 2 \
            + 2 * y0.y0("H") * y0.y0("MO") * 0.099 * 0.12 * 0.35 + (y0.y0("ML") * 0.12) ** 2
        assert model.sigma_normal == pytest.approx(math.sqrt(variance_own), rel=1e-12)

    def test_zero_volume_component_dropped_with_flag(self):
        profile = profile_of("A", H=(1.0, 1.0, 1.0), MO=(1.0, 0.5, 0.5), ML=(1.0, 1.0, 1.0), BLP=(1.0, 0.3, 0.7))
        with pytest.warns(DataQualityWarning, match="IA"):
            model = build_mixed_model(profile, MODEL_1)
        assert model.component_lobs == ("BLP",)
        assert model.dropped == ("IA",)

    def test_params_validation(self):
        with pytest.raises(DomainError):
            ModelParams(sigma_h=0.0, sigma_mo=0.1, rho_1=0.0, sigma_ml=0.1,
                        xi_ia=0.0, beta_ia=0.1, xi_blp=0.0, beta_blp=0.1)
        with pytest.raises(DomainError):
            ModelParams(sigma_h=0.1, sigma_mo=0.1, rho_1=1.0, sigma_ml=0.1,
                        xi_ia=0.0, beta_ia=0.1, xi_blp=0.0, beta_blp=0.1)


class TestSymmetricGpQuantile:
    def test_log_hundred_at_995(self):
        assert symmetric_gp_quantile(1.0, 0.0, 0.995) == pytest.approx(math.log(100.0), rel=1e-14)

    def test_median_of_magnitude(self):
        assert symmetric_gp_quantile(1.0, 0.0, 0.75) == pytest.approx(math.log(2.0), rel=1e-14)

    def test_ratio_to_standard_deviation(self):
        ratio = symmetric_gp_quantile(1.0, 0.0, 0.995) / math.sqrt(2.0)
        assert ratio == pytest.approx(3.25635, abs=1e-4)

    def test_against_monte_carlo_oracle(self):
        rng = substream(880, 0)
        u = rng.random(400_000)
        z = 2.0 / 0.1 * ((1.0 - u) ** (-0.1) - 1.0)
        signs = np.where(rng.random(400_000) < 0.5, -1.0, 1.0)
        draws = np.sort(signs * z)
        value = symmetric_gp_quantile(2.0, 0.1, 0.99)
        n = draws.size
        k = int(0.99 * (n - 1))
        mc = draws[k]
        window = int(0.5 * math.sqrt(n))
        density = 2 * window / (n * (draws[k + window] - draws[k - window]))
        se = math.sqrt(0.99 * 0.01 / n) / density
        assert abs(value - mc) < 3.0 * se

    def test_lower_tail_rejected(self):
        with pytest.raises(DomainError):
            symmetric_gp_quantile(1.0, 0.0, 0.5)


class TestQuantileEngines:
    def test_pure_gaussian_exact(self):
        model = MixedLossModel(sigma_normal=0.7, laplace_scales=(), gp_shapes=(), component_lobs=())
        estimate = quantile_total_loss(model, 0.99)
        assert estimate.engine == "exact"
        assert estimate.value == pytest.approx(normal_quantile(0.99) * 0.7, rel=1e-14)

    def test_single_component_exact(self):
        model = MixedLossModel(sigma_normal=0.0, laplace_scales=(0.5,), gp_shapes=(0.0,), component_lobs=("IA",))
        estimate = quantile_total_loss(model, 0.995)
        assert estimate.engine == "exact"
        assert estimate.value == pytest.approx(symmetric_gp_quantile(0.5, 0.0, 0.995), rel=1e-14)

    def test_convolution_matches_analytic_gaussian_pair(self):
        # Two Laplace components plus a Gaussian, checked against Monte Carlo.
        model = MixedLossModel(
            sigma_normal=0.45, laplace_scales=(0.54, 0.05), gp_shapes=(0.0, 0.0),
            component_lobs=("IA", "BLP"),
        )
        conv = quantile_total_loss(model, 0.995, "convolution")
        mc = quantile_total_loss(model, 0.995, "monte_carlo", mc_settings=McSettings(n_sims=400_000, seed=5))
        assert mc.stderr is not None
        assert abs(conv.value - mc.value) < 3.0 * mc.stderr

    def test_engine_agreement_on_randomized_models(self):
        rng = substream(314, 0)
        for trial in range(20):
            model = MixedLossModel(
                sigma_normal=float(rng.uniform(0.0, 2.0)),
                laplace_scales=(float(rng.uniform(0.05, 2.0)), float(rng.uniform(0.05, 2.0))),
                gp_shapes=(float(rng.uniform(0.0, 0.3)), float(rng.uniform(0.0, 0.3))),
                component_lobs=("IA", "BLP"),
            )
            conv = quantile_total_loss(model, 0.995, "convolution")
            mc = quantile_total_loss(
                model, 0.995, "monte_carlo", mc_settings=McSettings(n_sims=200_000, seed=1000 + trial)
            )
            assert abs(conv.value - mc.value) < 3.0 * mc.stderr, f"trial {trial}"

    def test_grid_under_coverage_raises(self):
        model = MixedLossModel(
            sigma_normal=0.45, laplace_scales=(0.54, 0.05), gp_shapes=(0.0, 0.0),
            component_lobs=("IA", "BLP"),
        )
        with pytest.raises(ResolutionError, match="tail mass"):
            quantile_total_loss(
                model, 0.995, "convolution",
                conv_settings=ConvolutionSettings(tail_tolerance=1e-13),
            )

    def test_small_simulation_count_warns(self):
        model = MixedLossModel(
            sigma_normal=1.0, laplace_scales=(0.5,), gp_shapes=(0.0,), component_lobs=("IA",)
        )
        with pytest.warns(DataQualityWarning, match="noisy"):
            quantile_total_loss(model, 0.9, "monte_carlo", mc_settings=McSettings(n_sims=5_000))

    def test_mc_deterministic_and_thread_invariant(self):
        model = MixedLossModel(
            sigma_normal=0.45, laplace_scales=(0.54, 0.05), gp_shapes=(0.0, 0.0),
            component_lobs=("IA", "BLP"),
        )
        one = quantile_total_loss(model, 0.995, "monte_carlo", mc_settings=McSettings(n_sims=262_144, seed=9, threads=1))
        again = quantile_total_loss(model, 0.995, "monte_carlo", mc_settings=McSettings(n_sims=262_144, seed=9, threads=1))
        pooled = quantile_total_loss(model, 0.995, "monte_carlo", mc_settings=McSettings(n_sims=262_144, seed=9, threads=4))
        assert one.value == again.value == pooled.value

    def test_bad_engine_and_level(self):
        model = MixedLossModel(sigma_normal=1.0, laplace_scales=(), gp_shapes=(), component_lobs=())
        with pytest.raises(DomainError):
            quantile_total_loss(model, 1.5)
        with pytest.raises(DomainError):
            quantile_total_loss(model, 0.9, engine="magic")


class TestScrMixedModel:
    @pytest.mark.parametrize(
        "company,params,expected",
        [
            ("Folksam", MODEL_1, 2.69),
            ("If", MODEL_1, 2.99),
            ("LF", MODEL_1, 5.63),
            ("Trygg-Hansa", MODEL_1, 3.93),
            ("Folksam", MODEL_2, 2.65),
            ("If", MODEL_2, 2.69),
            ("LF", MODEL_2, 5.48),
            ("Trygg-Hansa", MODEL_2, 3.92),
        ],
    )
    def test_published_capital_values(self, company, params, expected):
        value = scr_mixed_model(benchmark_profiles()[company], params)
        assert value == pytest.approx(expected, rel=0.01)

    def test_verification_mode_agrees(self):
        value = scr_mixed_model(
            benchmark_profiles()["Folksam"], MODEL_1, verify=True,
            mc_settings=McSettings(n_sims=200_000, seed=21),
        )
        assert value == pytest.approx(2.69, rel=0.01)

    def test_normal_reduction(self):
        profile = profile_of("A", H=(1.0, 1.0, 1.0), MO=(1.0, 0.5, 0.5), ML=(1.0, 2.0, 1.0))
        params = MODEL_1
        value = scr_mixed_model(profile, params)
        model = build_mixed_model(profile, params)
        assert value == pytest.approx(Z995 * model.sigma_normal, rel=1e-6)

    def test_positive_homogeneity(self):
        base_profile = benchmark_profiles()["Folksam"]
        base = scr_mixed_model(base_profile, MODEL_1)
        for lam in (0.5, 3.0):
            scaled = LiabilityProfile(
                company="Folksam",
                figures={
                    lob: LobFigures(premium=lam * f.premium, r0=lam * f.r0, p0=lam * f.p0)
                    for lob, f in base_profile.figures.items()
                },
            )
            assert scr_mixed_model(scaled, MODEL_1) == pytest.approx(lam * base, rel=1e-9)

    def test_monotone_in_scale_parameters(self):
        profile = benchmark_profiles()["Folksam"]
        base = scr_mixed_model(profile, MODEL_1)
        bumped = ModelParams(
            sigma_h=MODEL_1.sigma_h * 1.2, sigma_mo=MODEL_1.sigma_mo, rho_1=MODEL_1.rho_1,
            sigma_ml=MODEL_1.sigma_ml, xi_ia=MODEL_1.xi_ia, beta_ia=MODEL_1.beta_ia,
            xi_blp=MODEL_1.xi_blp, beta_blp=MODEL_1.beta_blp,
            sigma_ml_overrides=MODEL_1.sigma_ml_overrides,
        )
        assert scr_mixed_model(profile, bumped) >= base
        heavier = ModelParams(
            sigma_h=MODEL_1.sigma_h, sigma_mo=MODEL_1.sigma_mo, rho_1=MODEL_1.rho_1,
            sigma_ml=MODEL_1.sigma_ml, xi_ia=MODEL_1.xi_ia, beta_ia=MODEL_1.beta_ia * 1.5,
            xi_blp=MODEL_1.xi_blp, beta_blp=MODEL_1.beta_blp,
            sigma_ml_overrides=MODEL_1.sigma_ml_overrides,
        )
        assert scr_mixed_model(profile, heavier) >= base


class TestModelSigmaTable:
    def test_ratios_and_sigmas(self):
        rows = {row.lob: row for row in model_sigma_table(MODEL_1)}
        assert rows["IA"].sigma == pytest.approx(math.sqrt(2.0) * 0.088, rel=1e-12)
        assert rows["IA"].quantile_ratio == pytest.approx(3.25635, abs=5e-4)
        assert rows["BLP"].sigma == pytest.approx(math.sqrt(2.0) * 0.16, rel=1e-12)
        assert rows["H"].sigma == 0.099
        assert rows["H"].quantile_ratio == pytest.approx(Z995, rel=1e-14)
        assert rows["ML"].sigma == 0.050
        assert rows["ML (Trygg-Hansa)"].sigma == 0.12
        assert rows["MO"].sigma == 0.12
        assert rows["IA"].q995 == pytest.approx(rows["IA"].sigma * rows["IA"].quantile_ratio, rel=1e-12)
