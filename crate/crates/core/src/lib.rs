//! Ultradiscrete Painlevé VI with parity variables.
//!
//! Exact max-plus evolution over rationals, Riccati-type special solutions,
//! closed-form solution families and a signed log-domain q-difference oracle
//! for checking the ultradiscrete limit.

pub mod cli;
pub mod error;
pub mod evolution;
pub mod families;
pub mod params;
pub mod qp6_oracle;
pub mod riccati;
pub mod table;
pub mod tropical;
pub mod udp6;

pub use error::{Error, Result};
pub use params::{Params, ParityPair, StatePair};
pub use table::SolutionTable;
pub use tropical::{ExtAmp, Rat, Sign};
