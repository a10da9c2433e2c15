"""cfxkit: counterfactual explanations and adversarial examples are one
constrained search; semantics decides which one you are looking at."""

__version__ = "0.1.0"

from .generator import (  # noqa: F401
    DifferentialEvolutionConfig,
    SearchConfig,
    SearchResult,
    brute_force_search,
    evaluate_batch,
    generate_counterfactual,
    hidden_layer_counterfactual,
    one_pixel_attack,
)
from .metrics import MadWeights, MetricSpec, compute_mad, distance  # noqa: F401
from .model import (  # noqa: F401
    Dataset,
    ForwardTrace,
    LayerSpec,
    Network,
    forward,
    init_network,
    load_model,
    predict,
    save_model,
    split_at_layer,
    train,
)
from .numerics import (  # noqa: F401
    ScalarObjective,
    finite_difference_gradient,
    grad_wrt_input,
)
from .semantics import (  # noqa: F401
    Explanation,
    FeatureCatalog,
    FeatureEntry,
    UnitAnnotation,
    feature_diff,
    render_counterfactual,
    render_hidden_counterfactual,
)
