//! Exact arithmetic for finite-dimensional Lie superalgebras.

pub mod coeff;
pub mod cohomology;
pub mod deform;
pub mod families;
pub mod grassmann;
pub mod liesuper;
pub mod linalg;
pub mod matrix;
pub mod splitness;
pub mod suites;
pub mod vectorial;
