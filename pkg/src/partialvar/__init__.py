"""Block-restricted structural VARs of monetary transmission to a sector."""

from .design import DesignMatrix, SystemSpec, build_system, select_lag_order
from .dynamics import (
    IRFBundle,
    MultiplierMetrics,
    Thresholds,
    classify_sensitivity,
    compute_irfs,
    impulse_response,
    ma_coefficients,
    multiplier_metrics,
)
from .estimation import (
    SystemEstimate,
    check_stability,
    companion_matrix,
    ols_estimate,
    residual_covariance,
    sur_estimate,
)
from .fevd import FEVDTable, fevd, fevd_report, partvep
from .identification import StructuralFactor, cholesky_identify, unit_impulse
from .ingestion import (
    AnnualPanel,
    CountryConfig,
    apply_transforms,
    build_euro_aggregate,
    load_country_configs,
    load_panel,
)

__version__ = "0.1.0"
