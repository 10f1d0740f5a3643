"""Quarterly revenue forecasting engine.

Three models over multi-geography quarterly revenue: trailing-MAPE
selection among ARIMA/ETS/STL forecasts, a regression forest over
engineered forecast and lag features at horizons 1-4, and the same forest
extended with macro indicator growth features.  Includes rolling-origin
backtesting, relative-performance reporting, CSV ingestion, and a seeded
synthetic data generator.
"""

from .arima import ArimaFit, ArimaOrder, auto_select, difference, fit_arima, forecast_arima, order_grid
from .errors import (
    CalendarUnderflowError,
    ContiguityError,
    DuplicateKeyError,
    InsufficientDataError,
    MissingIndicatorError,
    NonconvergenceError,
    QuartercastError,
    SchemaMismatchError,
    UnknownGeographyError,
    ValidationError,
)
from .ets import EtsFit, EtsSpec, auto_select_ets, fit_ets, forecast_ets
from .features import (
    FeatureConfig,
    FeatureRow,
    ForecastCache,
    IndicatorConfig,
    base_forecasts,
    build_row,
    build_training_matrix,
    extend_indicators,
    feature_names,
    forecast_indicator,
    macro_features,
    row_vector,
    rows_to_matrix,
)
from .fiscal import FiscalQuarter, parse_quarter, quarter_add, quarter_diff, quarter_range
from .forest import (
    Forest,
    ForestParams,
    TreeNode,
    best_split,
    build_tree,
    forest_from_json,
    forest_to_json,
    predict_forest,
    train_forest,
)
from .io import (
    load_expert_forecasts_csv,
    load_indicator_csv,
    load_revenue_csv,
    read_report,
    read_table,
    with_indicators,
    write_indicator_csv,
    write_report,
    write_revenue_csv,
)
from .metrics import ape, mape, relative_improvement, yoy_growth
from .pipeline import (
    ComparisonTable,
    EvaluationReport,
    Model1Result,
    backtest,
    compare_expert,
    compare_horizons,
    compare_reports,
    final_origin_forecasts,
    model1_forecast,
    model2_run,
    model3_run,
)
from .series import TOTAL_ID, Dataset, QuarterlySeries
from .stl import LoessParams, StlDecomposition, loess_smooth, stl_decompose, stlf_forecast
from .synth import SynthSpec, generate_synthetic

__version__ = "0.1.0"
