// Comparisons are written as `!(x > 0.0)` so that NaN is rejected along with
// non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub(crate) mod ode;
pub mod quad;
pub mod roots;
pub mod interp;
pub mod special;
pub mod potentials;
pub mod radial_solver;
pub mod nodal_lines;
pub mod nodal_inverse;
pub mod semiclassical;
