//! The dual complex and the deformation side.

pub mod basis;
pub mod deform;
pub mod duality;
pub mod lambda;
pub mod structure;
pub mod theta;

pub use basis::{pairing, AlgebraicDualBasis, DualSeries};
pub use deform::{
    connection_matrix, local_solution, ode_residual_check, rederive_connection, symplectic_check,
    ConnectionMatrix, LocalSolution,
};
pub use duality::{agreement_check, frobenius_via_duality, DualityPlan, DualityReport};
pub use lambda::{LambdaRing, LambdaSeries};
pub use structure::{frobenius_structure_check, StructurePlan, StructureReport};
pub use theta::{rho_convert, RhoLedger, RhoResult, ThetaHatTable};
