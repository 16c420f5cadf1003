//! Object-centric process discovery and interactive model abstraction.
//!
//! An object-centric event log is mined into an accepting object-centric
//! Petri net. Aggregations are then applied or undone by augmenting the log
//! with abstraction objects; the current model is always the overlay of the
//! augmented log on the originally discovered net.

pub mod abstraction;
pub mod discovery;
pub mod fixtures;
pub mod ocel;
pub mod ocpn;
pub mod session;
