//! Linear boundary-value problems for systems of ODEs in Sobolev spaces,
//! with numerical checks of continuous dependence on a parameter.
//!
//! The core types are generic over the real scalar (`f32` or `f64`);
//! complex values are `num_complex::Complex<T>`. Aliases for both widths
//! live at the crate root.

pub mod continuity;
pub mod error;
pub mod funcspace;
pub mod linalg;
pub mod multipoint;
pub mod scalar;
pub mod solver;
pub mod system;
pub mod trend;

pub use continuity::{
    check_limit_i, check_limit_ii_operators, check_limit_ii_probes, check_remark24, convergence_experiment,
    default_probes, full_criterion, ContinuityConfig, ContinuityReport, EpsSchedule, ParamFamily, Probe,
    TwoSidedReport, TwoSidedRow,
};
pub use error::{Error, Result};
pub use funcspace::{cumulative_integral, make_grid_function, real, simpson, Conjugate, Grid, GridFunction, Shape, SobolevParams};
pub use linalg::CMatrix;
pub use multipoint::{
    build_multipoint, check_d_conditions, matrix_entry_norm, DConditionReport, MultipointBoundaryForm, MultipointFamily,
    MultipointNode,
};
pub use scalar::{euclidean_norm, Real, C};
pub use solver::{
    characteristic_matrix, condition0_check, condition0_of, discrepancy, fundamental_matrix, solve_bvp, BvpSolver,
    CharacteristicMatrix, Condition0, FundamentalMatrix, SolveReport, SolverConfig,
};
pub use system::{
    apply_boundary_operator, apply_differential_operator, companion_lift_solution, companion_reduce, lift_boundary_form,
    BoundaryOperator, CanonicalBoundaryForm, DifferentialSystem, FirstOrderProblem, LiftedBoundary, ProblemInstance,
};
pub use trend::{Series, TrendConfig, Verdict};

pub type Complex64 = C<f64>;
pub type Grid64 = Grid<f64>;
pub type GridFunction64 = GridFunction<f64>;
pub type SobolevParams64 = SobolevParams<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type ProblemInstance64 = ProblemInstance<f64>;
pub type ParamFamily64 = ParamFamily<f64>;
pub type SolveReport64 = SolveReport<f64>;

pub type Complex32 = C<f32>;
pub type Grid32 = Grid<f32>;
pub type GridFunction32 = GridFunction<f32>;
pub type SobolevParams32 = SobolevParams<f32>;
pub type CMatrix32 = CMatrix<f32>;
pub type ProblemInstance32 = ProblemInstance<f32>;
pub type ParamFamily32 = ParamFamily<f32>;
pub type SolveReport32 = SolveReport<f32>;
