//! Information-theoretic and linear estimators on scalar series.

pub mod ais;
pub mod autocorr;
pub mod binning;
pub mod ksg;
pub mod ordinal;
pub mod triple;

pub use ais::{active_information_storage, atau_surface, horizon_info_ratio, state_active_information_storage};
pub use autocorr::autocorrelation;
pub use binning::{binned_mutual_information, shannon_entropy_binned, td_mutual_information_curve, BinningScheme};
pub use ksg::ksg_mutual_information;
pub use ordinal::{ordinal_patterns, permutation_entropy, weighted_permutation_entropy, OrdinalPattern};
pub use triple::{triple_information, TripleInfo};
