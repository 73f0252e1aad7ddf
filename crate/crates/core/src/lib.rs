//! Principal polarizations on products of elliptic curves: binary forms,
//! unimodular lattice classification, the matrix model of endomorphisms and
//! a numerical period-matrix harness.

mod bigjson;
pub mod forms;
pub mod lattice;
pub mod linalg;
pub mod endo;
pub mod period;
