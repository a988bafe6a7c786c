"""Online fuzzy monitor learning for ML perception reliability.

Learns prototype-centered fuzzy rules from streamed (operating-condition,
misperception) records, derives evidence-backed operating-domain
specifications and safety-case bounds from them, and benchmarks the result
as a runtime safety monitor against standard baselines.
"""

from .bench import (
    BenchmarkReport,
    EvalRecord,
    MonitorMetrics,
    benchmark,
    evaluate,
    make_eval_records,
    metrics_from_predictions,
    mission_return,
    safety_return,
)
from .dataio import load_records, split, write_records
from .engine import (
    CloudAction,
    Datacloud,
    FuzzyMonitorClassifier,
    GlobalStats,
    Prediction,
    RollingAccuracy,
    UpdateOutcome,
    global_density,
    membership,
    rls_update,
    update_consequent,
)
from .errors import (
    EncodingError,
    FuzzymonError,
    OddParseError,
    OddSchemaError,
    RecordParseError,
    SchemaError,
    SchemaMismatchError,
    StateFormatError,
)
from .evidence import (
    CloudEvidence,
    SafetyCase,
    SafetyCaseParams,
    Shortlist,
    assemble_safety_case,
    collect_evidence,
    exposure,
    hmp_rate,
    misperception_rate,
    normal_quantile,
    sampling_error,
    scenario_occurrence_rate,
    shortlist_clouds,
)
from .odd import (
    ConditionalExclude,
    OddDecision,
    OddSpecification,
    derive_odd,
    emit,
    filter_records,
    parse,
    within_odd,
)
from .monitors import (
    DecisionTreeMonitor,
    FuzzyMonitorAdapter,
    GaussianNBMonitor,
    RandomMonitor,
)
from .schema import (
    FeatureDef,
    FeatureSchema,
    ObservationVector,
    RawRecord,
    decode_categories,
    decode_numerics,
    encode,
    load_schema,
    save_schema,
    validate_schema,
)
from .simulate import (
    ClusterSpec,
    Episode,
    SimConfig,
    default_scenario,
    default_schema,
    detect_crashes,
    generate,
    group_episodes,
    load_sim_config,
    save_sim_config,
)

__version__ = "0.1.0"
