//! Numerical building blocks shared by the physics modules.

mod chol;
mod quad;
mod roots;
mod simplex;
mod tridiag;

pub use chol::Cholesky;
pub use quad::{integrate, Quadrature};
pub use roots::{find_root, RootFinder};
pub use simplex::{NelderMead, SimplexResult};
pub use tridiag::{SymTridiagonal, TridiagEigen};
