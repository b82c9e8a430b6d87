//! Word metric, n-reduced polynomial representatives and rational growth series
//! for the torus bundle groups Z^2 x|_T Z with T = [[0,-1],[1,2k+1]], k >= 2.

pub mod error;
pub mod group_core;
pub mod laurent;
pub mod reduction;
pub mod series;
pub mod successor;

pub use error::{Error, Result};
