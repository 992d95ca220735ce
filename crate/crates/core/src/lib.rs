//! Randomized-highway small-world graphs over fixed-growth underlying graphs.
//!
//! The crate builds underlying graphs ([`generators`]), augments them with a
//! randomized highway of long-range contacts ([`overlay`]), routes greedily
//! over the result ([`routing`]) and measures how the construction scales
//! ([`analysis`]).

pub mod analysis;
pub mod error;
pub mod generators;
pub mod graph;
pub mod overlay;
pub mod rng;
pub mod routing;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId};
pub use overlay::{build_overlay, HighwayOverlay, OverlayParams};

/// Runs `f` on a rayon pool with `threads` workers (0 = rayon default).
/// Library results never depend on the pool size.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}
