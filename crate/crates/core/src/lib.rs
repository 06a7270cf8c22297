//! Regret-guided local search for the Euclidean traveling salesperson
//! problem.
//!
//! The crate bundles an exact global-regret oracle (Held–Karp based), a
//! Guided Local Search driver over 2-opt and relocate moves, edge features
//! and dataset export for learned regret models, and a benchmark harness.
//!
//! ```
//! use regret_gls::{gls, instance::Instance, regret};
//! use std::time::Duration;
//!
//! let inst = Instance::random(10, 1).unwrap();
//! let dm = inst.distance_matrix();
//! let exact = regret::oracle(&dm).unwrap();
//! let params = gls::SolveParams {
//!     time_budget: Duration::from_millis(200),
//!     ..Default::default()
//! };
//! let out = gls::solve(&dm, &gls::Guide::Regret(exact.regret), &params).unwrap();
//! assert!((out.cost - exact.cost).abs() <= 1e-7);
//! ```

pub mod bench;
pub mod construct;
pub mod data;
pub mod error;
pub mod features;
pub mod gls;
pub mod instance;
pub mod regret;
pub mod search;
pub mod tour;

pub use error::{Error, Result};
pub use instance::{DistanceMatrix, Instance};
pub use tour::Tour;
