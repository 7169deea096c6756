//! Fredholm determinants of the sine, cubic-sine and Painlevé II kernels on
//! `(-s, s)`, with the large-gap asymptotic formulas they are checked against.

pub mod asympt;
pub mod cli;
pub mod error;
pub mod fredholm;
pub mod kernels;
pub mod mpnum;
pub mod ode;
pub mod painleve2;
pub mod psi;
pub mod specfun;

pub use error::{Error, Result};
