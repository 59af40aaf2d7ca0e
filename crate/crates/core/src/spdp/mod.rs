//! The SPDP matrix, its blocked restriction, and exact rank.

mod basis;
mod matrix;
pub(crate) mod rank;

pub use basis::{ambient_basis, count_monomials, AmbientBasis, Budget, Convention, SpdpParams};
pub(crate) use basis::binomial;
pub use matrix::{
    blocked_matrix, build_matrix, codimension, derivative_sets, generators, rank, Admissibility,
    BlockPartition, Generator, MatrixRow, RankReport, RowLabel, SpdpMatrix,
};
