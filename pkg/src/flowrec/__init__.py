"""flowrec: recommend-as-you-go next-service prediction for scientific workflows."""

__version__ = "0.1.0"

from .provenance import (  # noqa: F401
    Repository,
    Service,
    Workflow,
    parse_repository,
    serialize_repository,
    split_repository,
    unseen_services,
)
from .skg import ServiceKnowledgeGraph, build_skg, dump_skg, transition_distribution  # noqa: F401
from .pathgen import (  # noqa: F401
    CompositionPath,
    TrainingInstance,
    compute_excluded_set,
    deduplicate,
    generate_inter_paths,
    generate_intra_paths,
    make_training_instance,
)
from .goalvec import (  # noqa: F401
    GoalEmbedder,
    GoalEmbedderConfig,
    TextPipelineConfig,
    infer_goal_vector,
    preprocess_text,
    train_goal_embedder,
)
from .seqmodel import (  # noqa: F401
    CellState,
    ModelParameters,
    TrainConfig,
    attention_weights,
    context_vector,
    encode_path,
    glstm_step,
    init_parameters,
    instance_gradients,
    instance_loss,
    predict_probabilities,
    train,
)
from .recommender import (  # noqa: F401
    PartialWorkflow,
    Recommendation,
    aggregate_distribution,
    extract_anchor_paths,
    recommend_next,
)
from .evaluation import EvalConfig, EvalReport, diversity_at_k, mrr, recall_at_k, run_experiment  # noqa: F401
from .pipeline import train_model  # noqa: F401
from .serialization import TrainedModel, load_model, model_fingerprint, save_model  # noqa: F401
