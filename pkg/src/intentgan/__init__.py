"""Semi-supervised adversarial intent classification toolkit."""

from .dataset import (
    DatasetBundle,
    DatasetStats,
    LabelVocab,
    SemiSupervisedView,
    Utterance,
    clean_min_length,
    load_canonical_jsonl,
    load_clinc_json,
    mask_labels,
    save_canonical_jsonl,
    select_classes,
    stats,
)
from .encoder import (
    HashedNgramConfig,
    PrecomputedEmbeddings,
    encode_hashed,
    get_feature,
    load_embeddings,
    save_embeddings,
)
from .errors import (
    BindingError,
    CheckpointError,
    ConfigError,
    DataFormatError,
    IntentGanError,
    NumericError,
)
from .metrics import (
    MetricsReport,
    MisclassRecord,
    confusion,
    export_confusion_csv,
    export_curves,
    misclass_report,
    report,
)
from .rng import Rng
from .ssgan import (
    DiscriminatorNet,
    EpochLog,
    GeneratorNet,
    NoiseSpec,
    TrainConfig,
    d_loss,
    g_loss,
    load_checkpoint,
    predict,
    sample_noise,
    save_checkpoint,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
