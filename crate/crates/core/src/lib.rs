//! Numerical laboratory for the Dyson-Ornstein-Uhlenbeck particle system:
//! exact OU distance curves, order-preserving DOU simulation, the matrix
//! route, coupling experiments and cutoff sandwiches.

pub mod couplings;
pub mod cutoff_lab;
pub mod dyson;
pub mod error;
pub mod gauss_metrics;
pub mod linalg;
pub mod matrix_ou;
pub mod numeric;
pub mod ou_exact;
pub mod rng;
pub mod sde_kernels;
pub mod special;
pub mod stats;
pub mod table;
pub mod value;

pub use error::{Error, Result};
pub use gauss_metrics::{GammaLaw, GaussianLaw, MetricKind};
pub use table::{BoundType, CurveRow, CurveTable};
pub use value::Extended;
