//! Clustering metrics, label files, baselines and significance testing.

mod baseline;
mod labels;
mod mapping;
mod metrics;
mod significance;

pub use baseline::{supervised_baseline, syntactic_baseline, syntactic_clusters};
pub use labels::{LabelSet, NO_LABEL};
pub use mapping::{default_role_mapping, gold_inventory, RoleMapping};
pub use metrics::{
    evaluate, harmonic, purity_collocation, Clustering, EvalReport, InstanceKey, PredicateScore, SignificanceEntry,
    PREDICATE_LABEL, REPORT_FORMAT, REPORT_VERSION,
};
pub use significance::{select_fraction, stratified_shuffling, SIGNIFICANCE_LEVEL};
