//! Direct Runge-Kutta-type integration of special fourth-order initial value
//! problems `y'''' = f(x, y)`.
//!
//! The crate is organised around five pieces:
//!
//! - [`tableaux`]: RKFD and classical RK coefficient sets, the builtin
//!   methods, the RK to RKFD conversion and the JSON tableau file format.
//! - [`conditions`]: the algebraic order conditions up to order 7 and the
//!   attained-order report.
//! - [`integrate`]: the RKFD step, the fixed-step driver, and a generic
//!   explicit RK driver on the first-order reduction for comparison.
//! - [`problems`]: the five benchmark problems plus synthetic fixtures.
//! - [`analysis`]: observed orders, local and global convergence studies,
//!   work-precision points and timing.
//!
//! The [`cli`] module backs the `rkfd` binary.
//!
//! ```
//! use rkfd::{conditions, integrate, problems, tableaux};
//!
//! let method = tableaux::builtin_rkfd4_corrected();
//! assert_eq!(conditions::attained_order(&method, 1e-12), 4);
//!
//! let run = integrate::rkfd_integrate(&method, &problems::problem_2(), 0.1).unwrap();
//! assert_eq!(run.n_fevals, 300);
//! assert!(run.max_abs_error.unwrap() < 1e-3);
//! ```

pub mod analysis;
pub mod cli;
pub mod conditions;
mod error;
pub mod integrate;
pub mod problems;
pub mod tableaux;

pub use error::{DomainError, Error, Result};
