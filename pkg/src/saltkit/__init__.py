"""Edit-aligned training signals, a tiny trainable model, and edit-aware evaluation."""

from saltkit.align import (
    Alignment,
    AlignOp,
    EditMasks,
    NwScoring,
    align_nw,
    change_fraction,
    derive_masks,
    filter_by_change_ratio,
    smooth_ai_mask,
)
from saltkit.loss import (
    DpoConfig,
    LossBreakdown,
    LossWeights,
    dpo_loss,
    loss_ai_side,
    loss_edit_side,
    loss_rsalt,
    loss_salt,
    rewards_and_accuracy,
    term_likelihood,
    term_unlikelihood,
)
from saltkit.metrics import (
    GroupCounts,
    RougeScore,
    SageReport,
    aggregate_sage,
    rouge_l,
    rouge_n,
    sage_concept,
    sage_ratio_report,
    sage_word,
)
from saltkit.model import (
    AdamState,
    DecodeConfig,
    DivergedError,
    TinyLMParams,
    decode,
    load_checkpoint,
    next_token_dist,
    opt_step,
    save_checkpoint,
    sequence_logprob,
    sequence_probs,
)
from saltkit.pipeline import (
    ExperimentConfig,
    ReplayConfig,
    TrainingExample,
    gen_synthetic,
    load_dataset,
    mix_replay,
    run_eval,
    run_training,
)
from saltkit.textproc import (
    ConceptLexicon,
    Token,
    TokenSeq,
    Vocab,
    extract_concepts,
    strip_stop_punct,
    tokenize,
)

__version__ = "0.1.0"
