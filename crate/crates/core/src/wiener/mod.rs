//! Wiener-algebra operators: coefficients, shift series, and their descriptions.

pub mod coefficient;
pub mod descriptor;
pub mod lattice;
pub mod operator;

pub use coefficient::{
    AxisProfile, Category, Coefficient, Compact, Evaluator, FunctionCoefficient, GammaSequence, PartialLimits,
    Periodic, Periodicity, Profile, SlowlyOscillating, SoKind, TwoValued,
};
pub use descriptor::{CoefficientDescriptor, ComplexValue, GammaDescriptor, OperatorDescriptor, TermDescriptor};
pub use lattice::{LatticeFunction, Window};
pub use operator::{default_probe, LatticeOperator};
