"""Pipeline configuration: defaults, YAML loading and validation.

The configuration is a nested mapping with a fixed schema; every analysis
choice the pipeline makes (loss-ratio window, exclusions, pooling groups,
model parameters, regulator tables, simulation settings) lives here, and
the defaults reproduce the bundled benchmark setup.  ``scrkit
print-defaults`` emits the schema with all default values filled in.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from . import datasets
from .errors import ConfigurationError
from .profiles import LiabilityProfile, profile_from_mapping
from .reports import DataQualityPolicy, Lob
from .risk_models import ConvolutionSettings, McSettings, ModelParams
from .standard_formula import (
    DEFAULT_NONLIFE_CORR,
    DEFAULT_SEGMENTATION,
    DEFAULT_SIGMAS,
    RegulatorTable,
    SegmentationMap,
)
from .stats import DEFAULT_PERMUTATIONS, DEFAULT_PERMUTATION_SEED

_ALL_COMPANIES = list(datasets.COMPANIES)


def _default_models() -> dict[str, dict[str, Any]]:
    def params_dict(params: ModelParams) -> dict[str, Any]:
        return {
            "sigma_h": params.sigma_h,
            "sigma_mo": params.sigma_mo,
            "rho_1": params.rho_1,
            "sigma_ml": params.sigma_ml,
            "sigma_ml_overrides": dict(params.sigma_ml_overrides),
            "xi_ia": params.xi_ia,
            "beta_ia": params.beta_ia,
            "xi_blp": params.xi_blp,
            "beta_blp": params.beta_blp,
        }

    return {"model1": params_dict(datasets.MODEL_1), "model2": params_dict(datasets.MODEL_2)}


def _default_profiles() -> dict[str, dict[str, dict[str, float]]]:
    return {
        company: {lob: {"V": v, "R0": r0, "P0": p0} for lob, (v, r0, p0) in figures.items()}
        for company, figures in datasets.LIABILITY_FIGURES_2011.items()
    }


@dataclass
class PipelineConfig:
    """Everything the command-line pipeline needs, with benchmark defaults."""

    input_files: list[str] = field(default_factory=list)
    out_dir: str = "out"
    m: int = 3
    currency_unit: str = "billion SEK"
    horizons: dict[str, int] = field(
        default_factory=lambda: {lob.value: k for lob, k in datasets.DEFAULT_HORIZONS.items()}
    )
    exclusions: dict[str, Any] = field(
        default_factory=lambda: {
            "first_accounting_years": 2,
            "series": [],
            "accounting_years": [],
        }
    )
    pooling: dict[str, list[str]] = field(
        default_factory=lambda: {
            "IA": list(_ALL_COMPANIES),
            "BLP": ["If", "LF", "Trygg-Hansa"],
            "ML": ["Folksam", "If", "LF"],
        }
    )
    joint_model: dict[str, Any] = field(
        default_factory=lambda: {"lobs": ["H", "MO"], "companies": list(_ALL_COMPANIES)}
    )
    variance_tests: dict[str, Any] = field(
        default_factory=lambda: {
            "groups": {
                "IA": list(_ALL_COMPANIES),
                "H": list(_ALL_COMPANIES),
                "BLP": ["If", "LF", "Trygg-Hansa"],
                "ML": list(_ALL_COMPANIES),
                "MO": list(_ALL_COMPANIES),
            },
            "variants": {"ML": ["Trygg-Hansa"]},
        }
    )
    dependence: dict[str, Any] = field(
        default_factory=lambda: {"skip_series": [["Folksam", "BLP"]], "level": 0.05}
    )
    gp: dict[str, Any] = field(default_factory=lambda: {"lobs": ["IA", "BLP"], "fix_shape_zero": False})
    models: dict[str, dict[str, Any]] = field(default_factory=_default_models)
    stdevs: dict[str, dict[str, float]] = field(default_factory=datasets.benchmark_stdevs)
    profiles: dict[str, dict[str, dict[str, float]]] = field(default_factory=_default_profiles)
    segmentation: dict[str, dict[str, float]] = field(
        default_factory=lambda: {k: dict(v) for k, v in DEFAULT_SEGMENTATION.items()}
    )
    regulator: dict[str, Any] = field(
        default_factory=lambda: {
            "sigmas": {lob: list(sig) for lob, sig in DEFAULT_SIGMAS.items()},
            "alpha": 0.5,
            "rho_me_ip": 0.5,
            "nonlife_corr": [
                [sorted(pair)[0], sorted(pair)[1], rho] for pair, rho in sorted(
                    DEFAULT_NONLIFE_CORR.items(), key=lambda item: sorted(item[0])
                )
            ],
        }
    )
    permutation: dict[str, int] = field(
        default_factory=lambda: {
            "n_permutations": DEFAULT_PERMUTATIONS,
            "seed": DEFAULT_PERMUTATION_SEED,
        }
    )
    mc: dict[str, int] = field(
        default_factory=lambda: {"seed": 20121, "n_sims": 1_000_000, "block_size": 1 << 16, "threads": 1}
    )
    convolution: dict[str, Any] = field(
        default_factory=lambda: {"n_points": 1 << 16, "width_sds": 12.0, "tail_tolerance": 1e-8}
    )

    # -- constructors -------------------------------------------------------

    @classmethod
    def default(cls) -> "PipelineConfig":
        return cls()

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "PipelineConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
        config = cls()
        for key, value in raw.items():
            default_value = getattr(config, key)
            if isinstance(default_value, dict) and isinstance(value, Mapping):
                merged = dict(default_value)
                merged.update(value)
                setattr(config, key, merged)
            else:
                setattr(config, key, value)
        config.validate()
        return config

    @classmethod
    def from_yaml(cls, path: str | Path) -> "PipelineConfig":
        text = Path(path).read_text(encoding="utf-8")
        raw = yaml.safe_load(text)
        if raw is None:
            raw = {}
        if not isinstance(raw, Mapping):
            raise ConfigurationError(f"configuration root must be a mapping, got {type(raw).__name__}")
        return cls.from_dict(raw)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True, default_flow_style=False)

    # -- materialized objects -----------------------------------------------

    def validate(self) -> None:
        if self.m < 1:
            raise ConfigurationError(f"m must be >= 1, got {self.m}")
        for lob in self.horizons:
            Lob(lob)
        self.data_quality_policy()
        self.model_params()
        self.segmentation_map()
        self.regulator_table()
        self.mc_settings()
        self.convolution_settings()
        for company, by_lob in self.profiles.items():
            profile_from_mapping(company, by_lob)

    def data_quality_policy(self) -> DataQualityPolicy:
        raw = self.exclusions
        excluded_series = frozenset((c, l) for c, l in (tuple(e) for e in raw.get("series", [])))
        excluded_years: dict[tuple[str, str], set[int]] = {}
        for entry in raw.get("accounting_years", []):
            company, lob, years = entry["company"], entry["lob"], entry["years"]
            excluded_years.setdefault((company, lob), set()).update(int(y) for y in years)
        return DataQualityPolicy(
            first_accounting_years=int(raw.get("first_accounting_years", 0)),
            excluded_accounting_years={k: frozenset(v) for k, v in excluded_years.items()},
            excluded_series=excluded_series,
        )

    def model_params(self) -> dict[str, ModelParams]:
        out = {}
        for name, raw in self.models.items():
            raw = dict(raw)
            overrides = raw.pop("sigma_ml_overrides", {})
            try:
                out[name] = ModelParams(sigma_ml_overrides=dict(overrides), **raw)
            except TypeError as exc:
                raise ConfigurationError(f"model {name!r}: {exc}") from None
        return out

    def liability_profiles(self) -> dict[str, LiabilityProfile]:
        return {
            company: profile_from_mapping(company, by_lob)
            for company, by_lob in sorted(self.profiles.items())
        }

    def segmentation_map(self) -> SegmentationMap:
        return SegmentationMap(proportions=self.segmentation)

    def regulator_table(self) -> RegulatorTable:
        raw = self.regulator
        corr = {frozenset((a, b)): float(rho) for a, b, rho in raw.get("nonlife_corr", [])}
        return RegulatorTable(
            sigmas={lob: tuple(pair) for lob, pair in raw["sigmas"].items()},
            alpha=float(raw.get("alpha", 0.5)),
            rho_me_ip=float(raw.get("rho_me_ip", 0.5)),
            nonlife_corr=corr,
        )

    def mc_settings(self) -> McSettings:
        raw = self.mc
        return McSettings(
            n_sims=int(raw.get("n_sims", 1_000_000)),
            seed=int(raw.get("seed", 20121)),
            block_size=int(raw.get("block_size", 1 << 16)),
            threads=int(raw.get("threads", 1)),
        )

    def convolution_settings(self) -> ConvolutionSettings:
        raw = self.convolution
        return ConvolutionSettings(
            n_points=int(raw.get("n_points", 1 << 16)),
            width_sds=float(raw.get("width_sds", 12.0)),
            tail_tolerance=float(raw.get("tail_tolerance", 1e-8)),
        )
