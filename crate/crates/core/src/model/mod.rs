//! The monolingual generative model: role space, orderings, count tables,
//! collapsed probabilities and forward sampling.

mod generate;
mod hyper;
mod joint;
mod ordering;
mod roles;
mod tables;
mod vocab;

pub use generate::{
    generate_frame, sample_categorical, ArgCountPolicy, GeneratedFrame, GenerativeParams, PredicateParams,
};
pub use hyper::Hyperparams;
pub use joint::{
    count_assignments, for_each_assignment, frame_events, frame_log_joint, frame_log_joint_idx,
    frame_log_joint_in, frame_log_prob_frozen, log_marginal_prob, log_sum_exp, marginal_prob,
    predictive_prob, TableMode, MAX_ENUMERATED_ARGUMENTS, MAX_ENUMERATED_ASSIGNMENTS,
};
pub use ordering::{enumerate_orderings, Ordering};
pub use roles::{check_no_primary_repeat, role_sequence, FrameAssignment, RoleLabel, RoleSpace, MAX_PRIMARY, MAX_ROLES};
pub use tables::{CountTables, Dist, Event, PredicateTables, SparseCounts, CONTINUE, STOP};
pub(crate) use tables::SerialTables;
pub use vocab::{EncodedFrame, Vocab, Vocabularies, UNK};
