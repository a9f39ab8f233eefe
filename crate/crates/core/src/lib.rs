//! Exact statevector laboratory for the HHL quantum linear solver.
//!
//! The crate is organized around a small pipeline: prepare a linear system
//! ([`linalg`]), build the solver circuit ([`hhl`]), execute it exactly
//! ([`sim`]), and price the run on fault-tolerant hardware ([`resource`]).
//! Two application drivers ([`apps`]) exercise the pipeline end to end.
//!
//! ```
//! use qlss_core::hhl::{self, HHLConfig};
//! use qlss_core::linalg::{C64, ComplexMatrix, LinearSystem};
//!
//! // diag(1, 2) x = (0.6, 0.8), solved exactly at this clock width and
//! // evolution time because both eigenvalues land on the phase grid.
//! let a = ComplexMatrix::from_fn(2, |i, j| {
//!     C64::new(if i == j { (i + 1) as f64 } else { 0.0 }, 0.0)
//! });
//! let b = vec![C64::new(0.6, 0.0), C64::new(0.8, 0.0)];
//! let system = LinearSystem::new(a, b)?;
//! let config = HHLConfig {
//!     n_c: Some(2),
//!     t: Some(std::f64::consts::PI / 2.0),
//!     ..Default::default()
//! };
//! let solution = hhl::solve(&system, &config)?;
//! assert!((solution.recovered_vector[0].re - 0.6).abs() < 1e-12);
//! assert!((solution.recovered_vector[1].re - 0.4).abs() < 1e-12);
//! # Ok::<(), qlss_core::Error>(())
//! ```

pub mod apps;
pub mod error;
pub mod hhl;
pub mod io;
pub mod linalg;
pub mod resource;
pub mod sim;

pub use error::{Error, Result};
pub use linalg::{C64, ComplexMatrix, LinearSystem};
pub use sim::{Circuit, Gate, GateKind, QuantumState};
