//! Discontinuous Galerkin building blocks on uniform Cartesian meshes:
//! quadrature, reference-cell bases and a coefficient container.

pub mod basis;
pub mod quadrature;
pub mod solution;

pub use basis::{tensor_rule, Basis, BasisKind, CellRule, EvalTable, FACE_NORMALS};
pub use quadrature::{gauss_legendre, gauss_lobatto, legendre, Rule};
pub use solution::{DgSolution, Mesh};
