//! Noncommutative algebra of partial difference operators.

pub mod csv;
pub mod lattice;
pub mod operator;

pub use lattice::{LatticeFunction, LatticeWindow, MultiIndex, PoleSet};
pub use operator::{DifferenceOperator, Table, ZeroCheck};
