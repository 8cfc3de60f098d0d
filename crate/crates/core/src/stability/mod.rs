//! Linear stability of the basic state: the `(W, Z, N)` eigenproblem,
//! neutral curves and critical points.

pub mod eigen;
pub mod fd;
pub mod neutral;
pub mod system;

pub use eigen::{finite_eigenvalues, finite_eigenvalues_qz, leading_eigenvalue, leading_pair, leading_sigma, residual};
pub use neutral::{
    critical_point, log_space, neutral_curve, neutral_r, BenardSurrogate, Bracket, Branch, CriticalResult,
    NeutralPoint, PhototacticProblem, ScanOptions, TemplateSource, OSCILLATORY_THRESHOLD,
};
pub use system::{assemble, benard_template, xi_profiles, DiscretizedSystem, SurrogateWalls, SystemTemplate, XiProfiles};
