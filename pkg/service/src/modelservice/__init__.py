"""modelservice: neural backends for question generation, guided span QA,
and text embedding, served over the JSON wire protocol."""

from .data import (
    QgTrainExample,
    SaqaTrainExample,
    SquadRecord,
    load_lexicon,
    load_records,
    prepare_qg_dataset,
    prepare_saqa_dataset,
)
from .models import (
    EmbedConfig,
    Embedder,
    QgConfig,
    QgModel,
    SaqaConfig,
    SaqaModel,
    predict_span,
    saqa_loss,
)
from .sampling import nucleus_sample, parse_marked_sequence, sample_sequence
from .serve import create_app
from .training import TrainResult, TrainSettings, TrainingDiverged, train_qg, train_saqa

__version__ = "0.1.0"

__all__ = [
    "EmbedConfig",
    "Embedder",
    "QgConfig",
    "QgModel",
    "QgTrainExample",
    "SaqaConfig",
    "SaqaModel",
    "SaqaTrainExample",
    "SquadRecord",
    "TrainResult",
    "TrainSettings",
    "TrainingDiverged",
    "create_app",
    "load_lexicon",
    "load_records",
    "nucleus_sample",
    "parse_marked_sequence",
    "predict_span",
    "prepare_qg_dataset",
    "prepare_saqa_dataset",
    "sample_sequence",
    "saqa_loss",
    "train_qg",
    "train_saqa",
]
