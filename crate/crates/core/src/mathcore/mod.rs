//! Numerical primitives shared by the physics modules.

pub mod linalg;
pub mod optimize;
pub mod quad;
pub mod rng;
pub mod special;

pub use linalg::{determinant, leibniz_determinant, sym_eigen, sym_eigenvalues, Eigen, SymmetricMatrix};
pub use optimize::{brent, neldermead, newton2d};
pub use quad::{integrate, integrate_estimate, Estimate, QuadratureSpec};
pub use rng::{derive_seed, rng, SeededRng};
pub use special::{bessel_i0, bessel_i0e, bessel_j0, bessel_j1, gamma_fn, i0e, j0, j1, ln_gamma};
