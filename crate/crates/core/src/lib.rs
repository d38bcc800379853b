//! Exact solution counting and bound verification for systems of
//! generalized diagonal equations over finite fields.

pub mod bounds;
pub mod caps;
pub mod cli;
pub mod gf;
pub mod count;
pub mod dickson;
pub mod model;
