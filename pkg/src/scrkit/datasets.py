"""Bundled benchmark data and synthetic fixtures.

The benchmark dataset carries the published accounting-year-2011 figures
of the four major Swedish non-life insurers: earned premiums and initial
liability predictions per line of business (billion SEK), the per-company
loss standard deviations, and the two pooled parameter sets used by the
mixed model.  The underlying supervisory loss data itself is not public,
so everything data-driven in the test-suite runs on synthetic reports from
:func:`synthetic_reports`.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .profiles import LiabilityProfile, LobFigures
from .reports import DEFAULT_HORIZONS, Lob, LobId, ReportSnapshot
from .risk_models import ModelParams
from .rngs import substream

COMPANIES = ("Folksam", "If", "LF", "Trygg-Hansa")
LOBS = ("IA", "H", "BLP", "ML", "MO")

#: Per-company standard deviations of the normalized losses (zero-mean fits).
SAMPLE_STDEVS: dict[str, dict[str, float]] = {
    "Folksam": {"IA": 0.040, "H": 0.082, "BLP": 1.5, "ML": 0.077, "MO": 0.17},
    "If": {"IA": 0.15, "H": 0.10, "BLP": 0.10, "ML": 0.026, "MO": 0.069},
    "LF": {"IA": 0.090, "H": 0.092, "BLP": 0.18, "ML": 0.028, "MO": 0.12},
    "Trygg-Hansa": {"IA": 0.21, "H": 0.12, "BLP": 0.22, "ML": 0.12, "MO": 0.11},
}

#: Earned premiums and initial predictions for accounting year 2011,
#: billion SEK; per lob: (V, R0, P0).
LIABILITY_FIGURES_2011: dict[str, dict[str, tuple[float, float, float]]] = {
    "Folksam": {
        "IA": (1.49, 5.05, 1.11),
        "H": (2.67, 1.12, 1.76),
        "BLP": (0.26, 0.14, 0.18),
        "ML": (0.98, 4.32, 0.74),
        "MO": (1.96, 0.18, 1.13),
    },
    "If": {
        "IA": (0.64, 1.07, 0.42),
        "H": (1.63, 0.59, 1.10),
        "BLP": (1.85, 2.27, 1.02),
        "ML": (1.94, 11.07, 1.67),
        "MO": (3.50, 0.34, 2.19),
    },
    "LF": {
        "IA": (1.30, 3.18, 1.08),
        "H": (3.51, 1.61, 2.51),
        "BLP": (5.13, 3.71, 3.22),
        "ML": (2.87, 11.29, 2.16),
        "MO": (3.62, 0.60, 2.45),
    },
    "Trygg-Hansa": {
        "IA": (2.53, 6.00, 1.51),
        "H": (1.49, 0.65, 1.08),
        "BLP": (1.67, 1.26, 1.05),
        "ML": (1.70, 6.29, 0.99),
        "MO": (2.11, 0.39, 1.44),
    },
}

#: Pooled parameter sets: variant 1 keeps the early-years outliers in the
#: sample, variant 2 drops them.  Trygg-Hansa keeps its own motor-liability
#: standard deviation in both.
MODEL_1 = ModelParams(
    sigma_h=0.099,
    sigma_mo=0.12,
    rho_1=0.35,
    sigma_ml=0.050,
    xi_ia=0.0,
    beta_ia=0.088,
    xi_blp=0.0,
    beta_blp=0.16,
    sigma_ml_overrides={"Trygg-Hansa": 0.12},
)
MODEL_2 = ModelParams(
    sigma_h=0.10,
    sigma_mo=0.096,
    rho_1=0.64,
    sigma_ml=0.025,
    xi_ia=0.0,
    beta_ia=0.088,
    xi_blp=0.0,
    beta_blp=0.16,
    sigma_ml_overrides={"Trygg-Hansa": 0.12},
)


def benchmark_profiles() -> dict[str, LiabilityProfile]:
    """The bundled liability profiles, one per company."""
    return {
        company: LiabilityProfile(
            company=company,
            figures={
                lob: LobFigures(premium=v, r0=r0, p0=p0)
                for lob, (v, r0, p0) in figures.items()
            },
        )
        for company, figures in LIABILITY_FIGURES_2011.items()
    }


def benchmark_stdevs() -> dict[str, dict[str, float]]:
    return {company: dict(stdevs) for company, stdevs in SAMPLE_STDEVS.items()}


# ---------------------------------------------------------------------------
# Synthetic report fixtures
# ---------------------------------------------------------------------------

def _development_fractions(k: int) -> np.ndarray:
    """Cumulative payout fractions over k development years, ending below 1.

    Capped at 0.9 so that noisy ultimo predictions stay above cumulative
    payments and the fixtures never trip the negative-outstanding warning.
    """
    j = np.arange(k, dtype=float)
    return 0.9 * (1.0 - (1.0 - (j + 1.0) / (k + 1.0)) ** 1.5)


def synthetic_reports(
    companies: Sequence[str] = COMPANIES,
    lobs: Sequence[str] = LOBS,
    first_report_year: int = 1998,
    n_report_years: int = 14,
    seed: int = 414243,
    horizons: Mapping[str, int] | None = None,
) -> list[ReportSnapshot]:
    """Generate internally consistent snapshots for testing and demos.

    Every series gets a full accident-year history, so each report year in
    the range produces a valid snapshot and consecutive snapshots pair up.
    Output is deterministic in the seed.
    """
    resolved = dict(DEFAULT_HORIZONS)
    for key, value in (horizons or {}).items():
        resolved[Lob(key)] = int(value)
    snapshots = []
    for company_index, company in enumerate(companies):
        for lob_index, lob_code in enumerate(lobs):
            lob = Lob(lob_code)
            k = resolved[lob]
            rng = substream(seed, company_index * 101 + lob_index)
            base_premium = 0.5 + 3.0 * rng.random()
            growth = 1.0 + 0.05 * rng.random()
            loss_ratio = 0.7 + 0.4 * rng.random()
            fractions = _development_fractions(k)

            first_accident_year = first_report_year - k + 1
            last_accident_year = first_report_year + n_report_years
            years = range(first_accident_year, last_accident_year + 1)
            premiums = {
                year: float(
                    base_premium * growth ** (year - first_accident_year) * (1.0 + 0.1 * rng.random())
                )
                for year in years
            }
            ultimates = {
                year: float(premiums[year] * loss_ratio * (0.9 + 0.2 * rng.random())) for year in years
            }
            # Prediction noise per (accident year, report year), fixed up front
            # so consecutive reports tell a consistent story.
            noise = {
                year: {
                    report: 1.0 + 0.08 * (rng.random() - 0.5)
                    for report in range(year, last_accident_year + 1)
                }
                for year in years
            }

            for report_year in range(first_report_year, first_report_year + n_report_years):
                window = range(report_year - k + 1, report_year + 1)
                cum_paid = {
                    year: float(ultimates[year] * fractions[report_year - year]) for year in window
                }
                ultimo = {year: float(ultimates[year] * noise[year][report_year]) for year in window}
                premium_window = {
                    year: premiums[year] for year in range(report_year - 2, report_year + 2)
                }
                snapshots.append(
                    ReportSnapshot(
                        company=company,
                        lob=LobId(code=lob, horizon_k=k),
                        report_year_n=report_year,
                        premiums=premium_window,
                        cum_paid=cum_paid,
                        ultimo=ultimo,
                    )
                )
    return snapshots
