//! Covariance estimation toolkit.
//!
//! Numerical building blocks for studying how many independent samples are
//! needed before the sample covariance matrix approximates the true one in
//! operator norm, with constructive versions of the combinatorial steps
//! (divergent-series structure, Maurey decoupling) that drive the analysis.

pub mod covariance;
pub mod decoupling;
pub mod distributions;
pub mod error;
pub mod hull;
pub mod linalg;
pub mod net;
pub mod rng;
pub mod sampleio;
pub mod seq;
pub mod structure;

pub use error::{Error, Result};
pub use hull::{min_norm_point, MinNormPoint};
pub use linalg::{extreme_eigs, op_norm, SymMat};
pub use net::{epsilon_net, net_norm_estimate, EpsNet, NetNormEstimate};
pub use seq::{order_stat_bound, rearrange_desc, weak_lp_norm, CoeffSeq};
pub use covariance::{estimation_error, sample_covariance, SampleSet};
pub use decoupling::{check_decoupling, decouple, DecouplingCertificate, DecouplingParams};
pub use distributions::{certify_moments, make_tight_frame, parseval_defect, sample, VectorModel};
pub use structure::{check_structure, extract_structure, refine_structure, StructureParams};
