"""One-year insurance loss construction, pooling diagnostics and capital calculation.

The package turns insurer yearly-report data into normalized one-year
losses, validates pooling and dependence assumptions, fits marginal and
joint loss distributions, and computes solvency capital requirements under
per-company and pooled internal models as well as the Solvency II standard
formula.
"""

from .errors import (
    ConfigurationError,
    DataQualityWarning,
    DataValidationError,
    DomainError,
    EstimationError,
    ReportParseError,
    ResolutionError,
    ScrKitError,
    UsageError,
)
from .fitting import (
    GpFit,
    GpParams,
    LrtResult,
    NormalFit,
    StructuredCovParams,
    StructuredMvnFit,
    assemble_sigma,
    fit_gp,
    fit_pooled_normal,
    fit_structured_mvn,
    fit_zero_mean_normal,
    joint_loss_matrix,
    loglik_structured,
    lr_test,
)
from .losses import (
    LossPanel,
    LossRecord,
    build_loss_panel,
    compute_loss,
    compute_loss_ratio,
    compute_p0,
    compute_r0,
    compute_r1_p1,
    write_loss_panel_csv,
)
from .profiles import LiabilityProfile, LobFigures, profile_from_mapping, profiles_from_reports
from .reports import (
    DataQualityPolicy,
    Lob,
    LobId,
    PairedSnapshots,
    ReportSnapshot,
    parse_report_file,
    snapshot_rows,
    validate_pair,
    write_report_csv,
)
from .risk_models import (
    ConvolutionSettings,
    McSettings,
    MixedLossModel,
    ModelParams,
    QuantileEstimate,
    build_mixed_model,
    model_sigma_table,
    quantile_total_loss,
    scr_mixed_model,
    scr_simple_internal,
    symmetric_gp_quantile,
)
from .standard_formula import (
    RegulatorTable,
    SegmentationMap,
    SolvencyVolumes,
    aggregate_profiles,
    benchmark_sigma_swedish,
    scr_health,
    scr_nonlife,
    scr_standard_total,
    segment_volumes,
    sigma_lob,
    standard_formula_report,
)
from .stats import (
    CorrelationResult,
    LeveneResult,
    chi2_sf,
    f_cdf,
    f_quantile,
    levene_test,
    normal_cdf,
    normal_quantile,
    spearman_critical_value,
    spearman_from_linear,
    spearman_rho,
)

__version__ = "0.1.0"
