//! Weak measurements of pre- and post-selected ensembles with mixed probe
//! states.
//!
//! The crate simulates the exact joint evolution `exp(−iθ A⊗K)` of a measured
//! system and a finite-dimensional probe, conditions on a post-selection, and
//! compares the resulting probe statistics with first-order weak-value
//! predictions: probe shifts, signal-to-noise ratios and cumulant shifts. It
//! also models probe noise as Kraus channels and reproduces an
//! unpolarized-light Mach–Zehnder measurement of polarization rotation.
//!
//! ```
//! use weakmix::experiment::{extract_weak_value, MzConfig};
//!
//! let cfg = MzConfig::new(std::f64::consts::FRAC_PI_2, 1.0);
//! let extracted = extract_weak_value(&cfg).unwrap();
//! assert!((extracted.im_weak_value - 0.5).abs() < 1e-3);
//! ```

pub mod channels;
pub mod cli;
pub mod config;
pub mod cumulants;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod matrix;
pub mod random;
pub mod state;
pub mod verify;

pub use channels::QuantumChannel;
pub use engine::{Selection, WeakSetup};
pub use error::{Error, Result};
pub use matrix::{tensor, ComplexMatrix, EIG_TOL, TOL};
pub use state::{DensityOperator, Observable, PureState};
