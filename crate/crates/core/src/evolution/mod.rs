//! Time evolution: Schrödinger and Liouville propagation, the operator algebra
//! of the tomographic correspondence rules, and evolution-equation residuals.

pub mod algebra;
pub mod classical;
pub mod correspondence;
pub mod limit;
pub mod propagate;
pub mod residual;

pub use algebra::{Evaluator, LatticeSource, OperatorExpr, Prim};
pub use classical::{classical_tomogram, lattice_ensemble, liouville_propagate, liouville_pullback, GaussianPhaseDensity};
pub use correspondence::{
    correspondence_operator, equation_operator, CorrespondenceOperator, EquationId, FieldModel, QuadraticForm,
    Representation, Symbol,
};
pub use limit::{classical_limit_study, ClassicalLimitReport, ClassicalLimitRow, ClassicalLimitScenario};
pub use propagate::{
    energy, schrodinger_propagate, schrodinger_trajectory, Hamiltonian, PropagatorConfig, PropagatorMethod,
};
pub use residual::{
    convergence_order, params_from_vector, residual_study, tomographic_residual, GaussianTrajectory,
    QuantumTrajectory, RefinementRow, ResidualReport, ResidualSettings, ResidualStudy, TomogramTrajectory,
    TrajectoryKind,
};
