//! Feature selection, cross-validation, metrics, learning-curve sweeps and
//! class-probability decomposition of complex landslides.

mod cv;
mod decompose;
mod metrics;
mod selection;
mod sweep;

pub use cv::{
    balance_indices, encode_labels, kfold_cv, seeded_rng, stratified_folds, CvOptions,
    EvaluationReport, RepeatScores,
};
pub use decompose::{
    decompose_complex, Decomposition, GroupSummary, Quartiles, RecordProbabilities, SIMPLE_CLASSES,
};
pub use metrics::{compute_metrics, f1_score, ClassMetrics, ConfusionMatrix, Metrics};
pub use selection::{
    correlation_prune, pearson, rfe_to_k, select_features, CorrelationDrop, EliminationStep,
    SelectionTrace,
};
pub use sweep::{sample_efficiency_sweep, SweepRow, SweepTable};
