//! Dynamical-decoupling pulse sequences, qubit–bath simulation and
//! suppression-order analysis.

pub mod analysis;
pub mod bath;
pub mod effective;
pub mod evolution;
pub mod linalg;
pub mod pauli;
pub mod precise;
pub mod sequence;
