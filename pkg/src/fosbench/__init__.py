"""fosbench: build and evaluate temporal field-of-study co-occurrence benchmarks."""

from .corpus import (
    ConceptCatalog,
    ConceptRecord,
    CorpusError,
    ParseReport,
    WorkRecord,
    filter_domain,
    parse_concepts,
    parse_works,
)
from .graph import (
    INFINITY,
    EdgeEvent,
    GraphError,
    SplitManifest,
    TemporalGraph,
    YearRange,
    binary_adjacency,
    build,
    cumulative_adjacency,
    first_observation,
    read_edge_stream,
    split,
    write_edge_stream,
)
from .features import (
    EmbeddingTable,
    FeatureError,
    NodeFeatureTable,
    PcaBasis,
    compose,
    level_encoding,
    load_embedding_table,
    mean_aggregate,
    pca_fit,
    pca_transform,
    write_embedding_table,
)
from .sampling import (
    NegativePools,
    NeighborIndex,
    SamplerConfig,
    SamplingError,
    build_pools,
    sample_negatives,
    sample_neighbors,
)
from .baselines import (
    EdgeBankMemory,
    NeuralScorer,
    ScorerParams,
    TrainConfig,
    TrainingDiverged,
    edgebank_score,
    encode_node,
    gradient_check,
    score_pair,
    train,
)
from .evaluation import (
    EvalReport,
    EvaluationError,
    ScoredBatch,
    auc_roc,
    average_precision,
    evaluate,
    rank_emerging,
)
from .diagnostics import (
    DiagnosticsError,
    DiagnosticsReport,
    compute_report,
    edge_stats,
    graph_stats,
    node_stats,
    novelty,
    recurrence_surprise,
    tea_table,
    temporal_stats,
    tet_table,
)

__version__ = "0.1.0"
