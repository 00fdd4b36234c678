//! Numerical toolkit for pairs of pseudo-Riemannian metrics with the same
//! unparameterised geodesics.

pub mod corpus;
pub mod equiv;
pub mod exprdsl;
pub mod fields;
pub mod oracle;
pub mod scalar;
pub mod smallmat;
pub mod tol;
