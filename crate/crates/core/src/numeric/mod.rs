//! Quadrature, root bracketing and monotone interpolation.

pub mod interp;
pub mod quad;
pub mod root;

pub use interp::MonotoneCubic;
pub use quad::{integrate, QuadOptions};
pub use root::{bisect_increasing, bracket_upward};
