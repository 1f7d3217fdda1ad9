"""Command-line pipeline: ingest -> losses -> tests -> fits -> capital reports.

Subcommands:

* ``losses``        build the normalized-loss panel from report CSVs
* ``tests``         variance-equality and rank-correlation report
* ``fit``           marginal and joint distribution fits
* ``scr``           capital requirements under every model
* ``print-defaults``  emit the full default configuration as YAML

Exit codes: 0 success, 2 validation failure, 3 computation failure.  All
randomness flows from the configured seeds, so identical configuration
gives byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from .config import PipelineConfig
from .errors import (
    ConfigurationError,
    DataValidationError,
    DomainError,
    ReportParseError,
    ScrKitError,
    UsageError,
)
from .fitting import (
    fit_gp,
    fit_pooled_normal,
    fit_structured_mvn,
    fit_zero_mean_normal,
    joint_loss_matrix,
    lr_test,
)
from .losses import LossPanel, build_loss_panel, write_loss_panel_csv
from .profiles import LiabilityProfile
from .reports import parse_report_file
from .risk_models import (
    build_mixed_model,
    model_sigma_table,
    quantile_total_loss,
    scr_mixed_model,
    scr_simple_internal,
)
from .standard_formula import aggregate_profiles, benchmark_sigma_swedish, standard_formula_report
from .stats import levene_test, spearman_critical_value, spearman_rho

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_COMPUTATION = 3

_VALIDATION_ERRORS = (
    ReportParseError,
    DataValidationError,
    DomainError,
    ConfigurationError,
    UsageError,
)


def _fmt(value: Any) -> Any:
    """Stable scalar formatting for CSV cells; numpy scalars become plain floats."""
    if isinstance(value, float):
        return repr(float(value))
    return value


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig.from_yaml(args.config) if args.config else PipelineConfig.default()
    if getattr(args, "input", None):
        config.input_files = list(args.input)
    if getattr(args, "out", None):
        config.out_dir = args.out
    if getattr(args, "m", None):
        config.m = args.m
    if getattr(args, "seed", None) is not None:
        config.mc["seed"] = args.seed
        config.permutation["seed"] = args.seed
    if getattr(args, "threads", None):
        config.mc["threads"] = args.threads
    config.validate()
    return config


def _build_panel(config: PipelineConfig) -> LossPanel:
    if not config.input_files:
        raise ConfigurationError("no input report files configured (use --input or input_files)")
    snapshots = []
    for name in config.input_files:
        path = Path(name)
        if not path.exists():
            raise ConfigurationError(f"input file not found: {path}")
        snapshots.extend(parse_report_file(path, horizons=config.horizons))
    return build_loss_panel(snapshots, m=config.m, policy=config.data_quality_policy())


def _check_series_exist(panel: LossPanel, company: str, lob: str) -> None:
    if not panel.series(company, lob):
        raise ConfigurationError(f"configured series {company}/{lob} does not exist in the data")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_losses(config: PipelineConfig) -> None:
    panel = _build_panel(config)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_loss_panel_csv(out / "losses.csv", panel)
    _write_json(
        out / "losses_summary.json",
        {
            "m": panel.m,
            "n_records": len(panel.records),
            "companies": panel.companies(),
            "lobs": panel.lobs(),
            "skipped": [
                {"company": d.company, "lob": d.lob, "accounting_year": d.accounting_year, "reason": d.reason}
                for d in panel.skipped
            ],
        },
    )
    print(f"wrote {len(panel.records)} loss records to {out / 'losses.csv'}")


def _equalized_groups(panel: LossPanel, lob: str, companies: Sequence[str]) -> tuple[list[int], list[list[float]]]:
    """Per-company loss series over their common accounting years."""
    series = []
    for company in companies:
        _check_series_exist(panel, company, lob)
        series.append(panel.u_series(company, lob))
    years = sorted(set.intersection(*(set(s) for s in series)))
    if not years:
        raise DataValidationError(f"{lob}: the configured companies share no accounting years")
    return years, [[s[y] for y in years] for s in series]


def cmd_tests(config: PipelineConfig) -> None:
    panel = _build_panel(config)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    variance_rows = []
    groups_config = config.variance_tests.get("groups", {})
    variants = config.variance_tests.get("variants", {})
    for lob in sorted(groups_config):
        companies = groups_config[lob]
        cases = [(lob, companies)]
        dropped = variants.get(lob)
        if dropped:
            kept = [c for c in companies if c not in dropped]
            cases.append((f"{lob} (without {', '.join(dropped)})", kept))
        for label, members in cases:
            years, groups = _equalized_groups(panel, lob, members)
            result = levene_test(groups)
            variance_rows.append(
                [label, ";".join(members), len(years), result.w, result.df1, result.df2, result.p_value]
            )
    _write_csv(
        out / "variance_tests.csv",
        ["case", "companies", "n_obs", "W", "df1", "df2", "p_value"],
        variance_rows,
    )

    skip = {tuple(pair) for pair in config.dependence.get("skip_series", [])}
    companies = sorted(panel.companies())
    lobs = sorted(panel.lobs())
    company_rows = []
    sizes = set()
    for lob in lobs:
        available = [c for c in companies if (c, lob) not in skip and panel.series(c, lob)]
        for i, a in enumerate(available):
            for b in available[i + 1 :]:
                sa, sb = panel.u_series(a, lob), panel.u_series(b, lob)
                years = sorted(set(sa) & set(sb))
                if len(years) < 2:
                    continue
                rho = spearman_rho([sa[y] for y in years], [sb[y] for y in years])
                sizes.add(rho.n_obs)
                company_rows.append([lob, a, b, rho.n_obs, rho.rho])
    _write_csv(
        out / "rank_correlations_companies.csv",
        ["lob", "company_a", "company_b", "n_obs", "rho"],
        company_rows,
    )

    lob_rows = []
    for company in companies:
        held = [l for l in lobs if (company, l) not in skip and panel.series(company, l)]
        for i, a in enumerate(held):
            for b in held[i + 1 :]:
                sa, sb = panel.u_series(company, a), panel.u_series(company, b)
                years = sorted(set(sa) & set(sb))
                if len(years) < 2:
                    continue
                rho = spearman_rho([sa[y] for y in years], [sb[y] for y in years])
                sizes.add(rho.n_obs)
                lob_rows.append([company, a, b, rho.n_obs, rho.rho])
    _write_csv(
        out / "rank_correlations_lobs.csv",
        ["company", "lob_a", "lob_b", "n_obs", "rho"],
        lob_rows,
    )

    level = float(config.dependence.get("level", 0.05))
    critical = {
        str(n): spearman_critical_value(
            n,
            level,
            n_permutations=int(config.permutation["n_permutations"]),
            seed=int(config.permutation["seed"]),
        )
        for n in sorted(sizes)
    }
    _write_json(
        out / "tests_summary.json",
        {
            "level": level,
            "critical_values_by_n": critical,
            "n_permutations": int(config.permutation["n_permutations"]),
            "permutation_seed": int(config.permutation["seed"]),
        },
    )
    print(f"wrote variance and correlation reports to {out}")


def cmd_fit(config: PipelineConfig) -> None:
    panel = _build_panel(config)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    document: dict[str, Any] = {
        "provenance": {
            "input_files": list(config.input_files),
            "m": config.m,
            "n_records": len(panel.records),
            "exclusions": config.exclusions,
        }
    }

    normal_fits: dict[str, dict[str, Any]] = {}
    for company in panel.companies():
        for lob in panel.lobs():
            series = panel.u_series(company, lob)
            if len(series) < 2:
                continue
            fit = fit_zero_mean_normal(list(series.values()))
            normal_fits.setdefault(company, {})[lob] = {"sigma": fit.sigma, "n_obs": fit.n_obs}
    document["normal_fits"] = normal_fits

    pooled: dict[str, Any] = {}
    for lob, companies in sorted(config.pooling.items()):
        if lob in config.gp.get("lobs", []):
            continue
        _, groups = _equalized_groups(panel, lob, companies)
        levene = levene_test(groups)
        fit = fit_pooled_normal(groups, levene=levene)
        pooled[lob] = {
            "companies": list(companies),
            "sigma": fit.sigma,
            "n_obs": fit.n_obs,
            "levene_p": levene.p_value,
        }
    document["pooled_normal"] = pooled

    gp_fits: dict[str, Any] = {}
    for lob in config.gp.get("lobs", []):
        companies = config.pooling.get(lob, panel.companies())
        _, groups = _equalized_groups(panel, lob, companies)
        positive = [u for group in groups for u in group if u > 0]
        if len(positive) < 2:
            raise DomainError(f"{lob}: fewer than two positive pooled losses, cannot fit a tail")
        fit = fit_gp(positive, fix_xi_zero=bool(config.gp.get("fix_shape_zero", False)))
        gp_fits[lob] = {
            "companies": list(companies),
            "xi": fit.xi,
            "beta": fit.beta,
            "n_obs": fit.n_obs,
            "loglik": fit.loglik,
            "shape_fixed": fit.shape_fixed,
        }
    document["gp_fits"] = gp_fits

    joint_companies = config.joint_model["companies"]
    joint_lobs = config.joint_model["lobs"]
    years, matrix = joint_loss_matrix(panel, joint_companies, joint_lobs)
    unconstrained = fit_structured_mvn(matrix, rho1_equals_rho2=False)
    m1 = fit_structured_mvn(matrix, rho1_equals_rho2=True)
    m0 = fit_structured_mvn(matrix, rho1_equals_rho2=True, rho1_zero=True)

    def fit_payload(fit) -> dict[str, Any]:
        p = fit.params
        return {
            "sigma_h": p.sigma_h,
            "sigma_mo": p.sigma_mo,
            "rho_h": p.rho_h,
            "rho_mo": p.rho_mo,
            "rho_1": p.rho_1,
            "rho_2": p.rho_2,
            "loglik": fit.loglik,
            "n_obs": fit.n_obs,
            "n_params": fit.n_params,
            "converged": fit.converged,
        }

    equality = lr_test(unconstrained, m1)
    dependence = lr_test(m1, m0)
    document["joint_model"] = {
        "lobs": list(joint_lobs),
        "companies": list(joint_companies),
        "accounting_years": years,
        "unconstrained": fit_payload(unconstrained),
        "m1": fit_payload(m1),
        "m0": fit_payload(m0),
        "lrt_cross_correlations_equal": {
            "D": equality.d,
            "p_value": equality.p_value,
        },
        "lrt_within_company_cross_zero": {
            "D": dependence.d,
            "p_value": dependence.p_value,
        },
    }
    _write_json(out / "fits.json", document)
    print(f"wrote fitted parameters to {out / 'fits.json'}")


def cmd_scr(config: PipelineConfig, which: str = "all") -> None:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profiles = config.liability_profiles()
    companies = sorted(profiles)
    model_params = config.model_params()
    seg_map = config.segmentation_map()
    table = config.regulator_table()
    conv = config.convolution_settings()
    mc = config.mc_settings()

    rows: list[list[Any]] = [
        ["predicted_liabilities"] + [profiles[c].total_liability() for c in companies]
    ]
    payload: dict[str, Any] = {
        "companies": companies,
        "predicted_liabilities": {c: profiles[c].total_liability() for c in companies},
    }

    def add_row(label: str, values: dict[str, float]) -> None:
        rows.append([label] + [values[c] for c in companies])
        payload[label] = values

    if which in ("internal", "all"):
        values = {
            c: scr_simple_internal(profiles[c], config.stdevs.get(c, {})) for c in companies
        }
        add_row("scr_internal", values)
    for name in ("model1", "model2"):
        if which not in (name, "all"):
            continue
        params = model_params[name]
        values = {
            c: scr_mixed_model(profiles[c], params, verify=False, conv_settings=conv, mc_settings=mc)
            for c in companies
        }
        add_row(f"scr_{name}", values)
        check = {}
        for c in companies:
            estimate = quantile_total_loss(
                build_mixed_model(profiles[c], params), 0.995, "monte_carlo", mc_settings=mc
            )
            check[c] = {"value": estimate.value, "stderr": estimate.stderr}
        payload[f"scr_{name}_mc_check"] = check
    if which in ("standard", "all"):
        reports = {c: standard_formula_report(profiles[c], seg_map, table) for c in companies}
        add_row("scr_standard_formula", {c: r.scr_total for c, r in reports.items()})
        _write_csv(
            out / "standard_formula_detail.csv",
            ["company", "scr_health", "scr_nonlife", "scr_total", "predicted_liabilities", "ratio"],
            [
                [c, r.scr_health, r.scr_nonlife, r.scr_total, r.total_liability, r.ratio_to_liability]
                for c, r in sorted(reports.items())
            ],
        )
        aggregate = aggregate_profiles([profiles[c] for c in companies])
        benchmark = benchmark_sigma_swedish(aggregate, seg_map, table)
        sigma_rows = [
            [lob, sigma, 3.0, 3.0 * sigma] for lob, sigma in sorted(benchmark.items())
        ]
        _write_csv(
            out / "benchmark_sigma.csv",
            ["lob", "sigma", "q995_over_sigma", "q995"],
            sigma_rows,
        )
        payload["benchmark_sigma"] = benchmark
        for name in ("model1", "model2"):
            table_rows = model_sigma_table(model_params[name])
            _write_csv(
                out / f"model_sigma_{name}.csv",
                ["lob", "sigma", "q995_over_sigma", "q995"],
                [[r.lob, r.sigma, r.quantile_ratio, r.q995] for r in table_rows],
            )

    ratio_labels = [r[0] for r in rows if r[0].startswith("scr_")]
    for label in ratio_labels:
        values = payload[label]
        rows.append(
            [f"{label}_to_liabilities"]
            + [values[c] / profiles[c].total_liability() for c in companies]
        )
    _write_csv(out / "scr_report.csv", ["quantity"] + companies, rows)
    _write_json(out / "scr_report.json", payload)
    print(f"wrote capital reports to {out}")


def cmd_print_defaults() -> None:
    sys.stdout.write(PipelineConfig.default().to_yaml())


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scrkit",
        description="One-year loss construction, pooling diagnostics and solvency capital",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, with_input: bool = True) -> None:
        p.add_argument("--config", help="YAML configuration file (defaults embedded)")
        p.add_argument("--out", help="output directory (overrides config)")
        if with_input:
            p.add_argument("--input", nargs="+", help="report CSV files (overrides config)")
        p.add_argument("--seed", type=int, help="seed for all randomized computations")
        p.add_argument("--threads", type=int, help="worker threads for simulation blocks")

    p_losses = sub.add_parser("losses", help="build the normalized-loss panel")
    add_common(p_losses)
    p_losses.add_argument("--m", type=int, help="loss-ratio window in accident years")

    p_tests = sub.add_parser("tests", help="variance-equality and rank-correlation report")
    add_common(p_tests)
    p_tests.add_argument("--m", type=int, help="loss-ratio window in accident years")

    p_fit = sub.add_parser("fit", help="fit marginal and joint loss distributions")
    add_common(p_fit)
    p_fit.add_argument("--m", type=int, help="loss-ratio window in accident years")

    p_scr = sub.add_parser("scr", help="compute capital requirements")
    add_common(p_scr, with_input=False)
    p_scr.add_argument(
        "--which",
        choices=["internal", "model1", "model2", "standard", "all"],
        default="all",
        help="which capital computation to run",
    )

    sub.add_parser("print-defaults", help="print the default configuration as YAML")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "print-defaults":
            cmd_print_defaults()
            return EXIT_OK
        config = _load_config(args)
        if args.command == "losses":
            cmd_losses(config)
        elif args.command == "tests":
            cmd_tests(config)
        elif args.command == "fit":
            cmd_fit(config)
        elif args.command == "scr":
            cmd_scr(config, which=args.which)
        return EXIT_OK
    except _VALIDATION_ERRORS as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_VALIDATION
    except ScrKitError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_COMPUTATION


if __name__ == "__main__":
    sys.exit(main())
