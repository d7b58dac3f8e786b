//! Concrete models: lattice fields (Ising heat-bath, parking/RSA) and
//! one-dimensional processes (Doeblin chains, the Toboggan chain, renewal
//! processes, chains with unbounded memory).

pub mod chain;
pub mod ising;
pub mod parking;
pub mod renewal;
pub mod scum;
pub mod toboggan;
