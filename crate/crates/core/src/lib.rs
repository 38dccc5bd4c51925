//! Essential spectra of discrete Schrödinger operators on ℤᴺ.
//!
//! Operators are finite shift series `Σ a_α V_α` ([`LatticeOperator`]). The
//! essential spectrum is the union of the spectra of the limit operators,
//! which are computed from closed forms, scalar symbols, or matrix symbols of
//! periodic operators. The [`oracle`] module checks predictions against
//! eigenvalues of finite sections.

pub mod error;
pub mod floquet;
pub mod interval;
pub mod limitops;
pub mod oracle;
pub mod symbol;
pub mod threebody;
pub mod torus;
pub mod wiener;

pub use error::{Error, Result};
pub use interval::{Interval, SpectrumSet, DEFAULT_MERGE_TOL};
pub use torus::{PointCloud, TorusGrid};
pub use wiener::{Coefficient, LatticeFunction, LatticeOperator, OperatorDescriptor, Window};
