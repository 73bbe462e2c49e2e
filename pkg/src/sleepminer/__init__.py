"""Event mining for single-subject sleep and lifestyle logs.

Pipeline: parse per-source CSV exports, merge them into one record per
night, discretize with threshold schemes, screen confounders and
estimate average effects with Welch's t-tests, and render report
artifacts. A built-in synthetic generator with planted effects serves as
the verification oracle.
"""

from .discretize import (
    Bin,
    Scheme,
    SchemeSet,
    SpecialValue,
    categorize,
    default_schemes,
    derive_features,
    load_schemes,
)
from .ingest import (
    MergePolicy,
    filter_consecutive,
    merge_day_records,
    parse_activity_log,
    parse_environment_log,
    parse_meal_log,
    parse_sleep_log,
    read_day_records,
    save_day_records,
    write_day_records,
)
from .mining import (
    Contribution,
    EffectEstimate,
    JointCounts,
    ScreeningCell,
    ScreeningResult,
    baseline_sample,
    effects_all,
    estimate_effect,
    joint_distribution,
    screen_all,
    screen_confounder,
)
from .model import (
    INPUT_EVENTS,
    LIFESTYLE_EVENTS,
    OUTPUT_MEASURES,
    PREV_NIGHT_SOURCE,
    ActivityEvent,
    DayRecord,
    EnvSample,
    FeatureRow,
    MealEvent,
    RuleTuple,
    SleepSession,
    validate_day_record,
)
from .report import (
    render_effects_table,
    render_joint_heatmap,
    render_significance_grid,
)
from .stats import TestResult, reg_inc_beta, student_t_cdf, welch_t
from .synth import (
    ConfounderLink,
    GenerationResult,
    GeneratorSpec,
    PlantedEffect,
    default_generator_spec,
    generate,
    generate_detailed,
    load_generator_spec,
)

__version__ = "0.1.0"
