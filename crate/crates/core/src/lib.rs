//! Link-level Monte Carlo simulation of Alamouti-embedded interference
//! alignment on the two-user X channel and on two-cell networks, with the
//! linear alignment baselines they are compared against.
//!
//! Matrices are small and fixed-size ([`linalg::CMat`]); every trial draws
//! its own channel, symbols and noise from a generator that depends only on
//! the master seed, an experiment lane and the trial index
//! ([`channels::RngSpec`]), so results do not depend on thread count.

pub mod cellular;
pub mod channels;
pub mod error;
pub mod exec;
pub mod jash;
pub mod linalg;
pub mod metrics;
pub mod scheme;
pub mod x_alamouti;

pub use channels::{Constellation, RngSpec};
pub use error::{Error, Result};
pub use exec::Executor;
pub use scheme::{Scheme, SchemeId};
