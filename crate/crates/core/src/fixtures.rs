//! The bank account-opening example, shipped with the crate.

use crate::ocel::{parse_log, EventLog, LogFormat};

/// The 13-event account-opening log with workflow objects only.
pub const BANK: &str = include_str!("../fixtures/bank.json");

/// The same log augmented with the client `caa` (`uih13`) and the
/// lifecycle `cla` (`kl273`) abstraction objects.
pub const BANK_AUGMENTED: &str = include_str!("../fixtures/bank_augmented.json");

pub fn bank() -> EventLog {
    parse_log(BANK.as_bytes(), LogFormat::OcelJson).expect("bundled fixture parses")
}

pub fn bank_augmented() -> EventLog {
    parse_log(BANK_AUGMENTED.as_bytes(), LogFormat::OcelJson).expect("bundled fixture parses")
}
