//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

pub mod chiral;
pub mod lattice;
