//! Rational generating functions: class series and the sphere growth series.

pub mod poly;
pub mod transfer;
pub mod growth;
pub mod modular;
