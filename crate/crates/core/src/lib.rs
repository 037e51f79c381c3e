//! Exact factorization of matrices into products of commutators of
//! order-k elements, with machine-checkable certificates.
//!
//! The library works over exact coefficient rings (the rationals, prime
//! fields, cyclotomic fields) carrying a designated k-th root of unity.
//! It factors finite unitriangular matrices, lazy infinite upper triangular
//! matrices, SL_n over cyclotomic fields and Vershik-Kerov block matrices
//! into explicit products of at most 4k-6 commutators whose generators all
//! satisfy g^k = I, and it verifies the resulting certificates bit-exactly
//! on any requested window.

pub mod error;
pub mod ring;
pub mod seq;
pub mod mat;
pub mod poly;
pub mod coherent;
pub mod commfact;
pub mod slfact;
pub mod vk;
pub mod jsonio;
pub mod job;

pub mod testkit;

pub use error::{Error, Result};
