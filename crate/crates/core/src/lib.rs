//! Asymmetric encoding-decoding schemes (AEDS): table-driven entropy codes that
//! encode a sequence backward and decode it forward, per-state prefix-free
//! codeword sets, tANS as a special case, table constructors built from prefix
//! code trees, and the stationary analysis of their average code length.

pub mod analysis;
pub mod codec;
pub mod constructors;
pub mod error;
pub mod model;
pub mod prefix_codes;
pub mod tans;

pub use error::{Error, Result};
pub use model::{AedsTable, Codeword, SAedsPartition, SourceDistribution, Symbol};
