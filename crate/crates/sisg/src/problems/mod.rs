//! Driver problems: a smooth Poisson demo for derivative filtering and a
//! singular-corner problem with adaptive refinement.

pub mod corner;
pub mod poisson;
