"""Empirical interpolation in symmetric form.

Greedy separated approximations of tabulated two-variable functions, a
rectangular pseudo-inverse variant for discarded points, and the
generalized variant over dictionaries of linear forms.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AllDropped,
    BuildFailure,
    DegeneratePivot,
    DimensionError,
    EimkitError,
    NonFiniteError,
    NumericalBreakdown,
    ParseError,
    SingularMatrix,
)
from .evaluation import (  # noqa: E402
    ClassicalModel,
    InterpolationReport,
    approximation,
    build_classical,
    evaluate_symmetric,
    interpolation_report,
)
from .geim import LinearFormDictionary, geim_build, geim_discard, geim_reconstruct  # noqa: E402
from .greedy import GreedyConfig, build, residual_matrix, restrict, select_next  # noqa: E402
from .harness import ExperimentReport, paper_function, run_paper_experiment  # noqa: E402
from .linalg import Pinv, condition_estimate, inverse_transpose, pseudo_inverse  # noqa: E402
from .model import (  # noqa: E402
    GeimModel,
    GreedyTrace,
    NormSpec,
    RectangularModel,
    SampleSet,
    SeparatedModel,
    SnapshotMatrix,
    deserialize_model,
    ingest_snapshots,
    serialize_model,
    write_snapshots,
)
from .rectangular import discard, evaluate_rectangular  # noqa: E402
