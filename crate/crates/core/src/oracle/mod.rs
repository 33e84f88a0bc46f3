//! Brute-force ground truth at desk scale.
//!
//! Nothing here shares code with the optimization pipeline beyond the
//! H-representation builder and the exact rational types.

mod kostka;
mod polytope;
mod probes;

pub use kostka::{enumerate_patterns, kostka_count};
pub use polytope::{exact_volume, exact_volume_with_cap, vertices, VertexPolytope, DEFAULT_DIM_CAP};
pub use probes::{exact_kostka_volume, logconcavity_probe, scaling_limit, KostkaVolume, LogConcavityReport};
