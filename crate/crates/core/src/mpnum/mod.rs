//! Extended-precision scalars, Gauss–Legendre quadrature and LU log-determinants.

mod extended;
mod lu;
mod quadrature;

pub use extended::{quick_two_sum, two_prod, two_sum, ExtendedReal};
pub use lu::{log_det_lu, DdMatrix, LogDetResult};
pub use quadrature::{gauss_legendre, QuadratureRule, MAX_ORDER};
