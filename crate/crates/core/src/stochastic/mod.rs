//! Simulation of diffusions and statistical checks of the martingale property.

pub mod export;
mod integral;
mod martingale;
mod paths;
mod simulate;

pub use integral::{ito_integral, transform_ensemble, CompiledCodiffusor};
pub use martingale::{
    default_checkpoints, default_functions, martingale_test, verify_symmetry_stochastically,
    Candidate, MartingaleTestReport, VerificationSummary, VerifyConfig, ZScore, DEFAULT_Z_CRIT,
    MAX_TESTS, MIN_PATHS,
};
pub use paths::{PathEnsemble, SamplePath, TimeGrid, EULER_MARUYAMA};
pub use simulate::{factor_diffusion, factor_matrix, simulate, PSD_TOLERANCE};
