//! Quadrature, special functions and scalar searches shared by the modules.

pub mod optimize;
pub mod quad;
pub mod special;
