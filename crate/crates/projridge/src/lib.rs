//! File formats, simulation orchestration and the command-line front end for
//! [`projridge_core`].
//!
//! Studies run replication-parallel; every random draw is keyed by
//! `(master_seed, purpose, replication)`, so reports are identical for any
//! worker count.

pub mod error;
pub mod harness;
pub mod io;

pub use error::{HarnessError, Result};
pub use harness::{emit_report, rate_check, rerun_manifest, run_study, Manifest};
pub use projridge_core as core;
