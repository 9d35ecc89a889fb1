//! Economic losses from bovine milk fever and the producer-surplus gain from
//! preventing it.
//!
//! - [`loss`]: closed-form milk, mortality and treatment losses per group.
//! - [`surplus`]: open-economy surplus model and adoption sweeps.
//! - [`incidence`]: survey summaries, the parity × species logit, predictive
//!   margins and trial power.
//! - [`oracle`]: per-animal Monte-Carlo check of the loss expectations.
//! - [`io`]: survey CSV, parameter documents and report emission.

pub mod error;
pub mod incidence;
pub mod io;
pub mod loss;
pub mod oracle;
pub mod surplus;
pub mod units;

pub use error::{Error, ErrorKind, Result};
