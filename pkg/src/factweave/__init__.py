"""factweave: transfer the factual content of a text between topics.

The pipeline generates question/entity pairs from the source text,
transfers the questions to the target topic, answers them over a factual
corpus with specificity-aware span QA, and splices the answers back into
the source text.
"""

from .backends import (
    Backend,
    BackendError,
    EmbedRequest,
    EmbedResponse,
    HttpBackend,
    MockBackend,
    NeighborLexicon,
    ProtocolError,
    QaRequest,
    QaResponse,
    QgRequest,
    QgResponse,
    TransportError,
    build_guidance,
)
from .conformance import ConformanceCheck, ConformanceProbe, run_conformance
from .core import (
    Corpus,
    Fact,
    PipelineConfig,
    Token,
    TokenSeq,
    TransferTask,
    derive_seed,
    find_occurrences,
    sentence_split,
    tokenize,
)
from .data_io import (
    GroupedDocument,
    RelationTriple,
    SyntheticSpec,
    generate_synthetic,
    load_corpus,
    load_predictions,
    load_tasks,
    pair_by_group,
    pair_triples,
    save_predictions,
    save_tasks,
)
from .infill import InfillPlan, Replacement, apply_infill, plan_infill
from .metrics import MetricsReport, bleu, evaluate, halluc, length_ratio, rouge_n
from .pipeline import (
    BatchResult,
    PipelineTrace,
    load_config,
    run_batch,
    run_transfer,
)
from .qg_transfer import (
    QuestionEntityPair,
    TransferredQuestion,
    UntransferableQuestionError,
    build_transferred_set,
    collect_pairs,
    make_generic,
    transfer_specific,
)
from .retrieval import (
    RetrievedContext,
    VectorIndex,
    build_index,
    load_index,
    retrieve,
    save_index,
    search,
)
from .saqa import AnswerCandidate, EntityEntry, EntityMap, answer_all, fold_entity_map

__version__ = "0.1.0"

__all__ = [
    "AnswerCandidate",
    "Backend",
    "BackendError",
    "BatchResult",
    "ConformanceCheck",
    "ConformanceProbe",
    "Corpus",
    "EmbedRequest",
    "EmbedResponse",
    "EntityEntry",
    "EntityMap",
    "Fact",
    "GroupedDocument",
    "HttpBackend",
    "InfillPlan",
    "MetricsReport",
    "MockBackend",
    "NeighborLexicon",
    "PipelineConfig",
    "PipelineTrace",
    "ProtocolError",
    "QaRequest",
    "QaResponse",
    "QgRequest",
    "QgResponse",
    "QuestionEntityPair",
    "RelationTriple",
    "Replacement",
    "RetrievedContext",
    "SyntheticSpec",
    "Token",
    "TokenSeq",
    "TransferTask",
    "TransferredQuestion",
    "TransportError",
    "UntransferableQuestionError",
    "VectorIndex",
    "answer_all",
    "apply_infill",
    "bleu",
    "build_guidance",
    "build_index",
    "build_transferred_set",
    "collect_pairs",
    "derive_seed",
    "evaluate",
    "find_occurrences",
    "fold_entity_map",
    "generate_synthetic",
    "halluc",
    "length_ratio",
    "load_config",
    "load_corpus",
    "load_index",
    "load_predictions",
    "load_tasks",
    "make_generic",
    "pair_by_group",
    "pair_triples",
    "plan_infill",
    "retrieve",
    "rouge_n",
    "run_batch",
    "run_conformance",
    "run_transfer",
    "save_index",
    "save_predictions",
    "save_tasks",
    "search",
    "sentence_split",
    "tokenize",
    "transfer_specific",
]
