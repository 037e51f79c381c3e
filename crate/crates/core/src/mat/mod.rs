//! Finite dense matrices and lazy infinite upper triangular matrices.

mod dense;
mod oracle;

pub use dense::{null_space_rows, Mat, SpanBuilder};
pub use oracle::{
    oracle_conjugate, oracle_inverse, oracle_pow, oracle_product, oracle_product_many, Coupling,
    SuperDiagSpec, TriOracle,
};

pub(crate) use oracle::{CouplingView, OracleView};
