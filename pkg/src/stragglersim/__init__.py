"""Task-ordering schedules and completion-time analysis for master-worker
distributed computing under random stragglers."""

from .analytic import (
    SubsetTerm,
    SurvivalCurve,
    average_completion,
    coefficient_identity_check,
    h_term,
    expand_mixed_event,
    subset_terms,
    survival,
    survival_curve,
)
from .coded import (
    PartitionedDataset,
    coded_demo_report,
    pc_decode_n4r2,
    pc_encode_n4r2,
    pcmm_decode_n4r2,
    pcmm_encode_n4r2,
)
from .completion import (
    ArrivalTimes,
    InfeasibleTargetError,
    SimulationReport,
    arrival_times,
    compare,
    completion_time,
    first_k_distinct,
    lower_bound_completion,
    monte_carlo,
    pc_completion,
    pcmm_completion,
    wasted_computations,
)
from .delays import (
    Constant,
    DelayModel,
    DelayTrace,
    Discrete,
    TruncatedGaussian,
    sample_trace,
    scenario_preset,
    tg_cdf,
    tg_pdf,
    tg_sample,
)
from .dgd import (
    DgdResult,
    DgdState,
    RegressionDataset,
    dgd_step,
    generate_dataset,
    gradient_task,
    run_dgd,
)
from .oracle import (
    OutcomeEnumeration,
    enumerate_outcomes,
    exact_event_probability,
    exact_mean,
    exact_mean_of,
    exact_survival,
    exact_survival_of,
)
from .schedules import (
    CompletionConfig,
    TaskOrderMatrix,
    ValidationReport,
    cyclic_schedule,
    random_assignment_schedule,
    staircase_schedule,
    validate,
    wrap_index,
)

__version__ = "0.1.0"
