//! Crosslingual latent variables: CRP-seated tables shared by word-aligned
//! arguments of two languages, each holding a role distribution per
//! language.

mod crp;
mod generate;
mod joint;
mod state;

pub use crp::{crp_assignment_prob, log_partition_prob, log_sequential_seating_prob, Restaurant, TableChoice};
pub use generate::{generate_pair, ClvGenerator, ClvTableParams, GeneratedPair, LinkPolicy};
pub use joint::{coupled_log_joint, ClvRef, EncodedPair};
pub use state::{
    AlignCounts, ClvState, CrpState, PredicatePair, SerialClv, SerialRestaurant, SerialTable,
};
