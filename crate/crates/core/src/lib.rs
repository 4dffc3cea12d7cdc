//! Rate regions and protocol simulation for a two-user broadcast packet
//! network aided by two reconfigurable intelligent surfaces (RISs).
//!
//! * [`channel`]: erasure links, association schedules, ACK/NACK feedback.
//! * [`fieldcodec`]: GF(2^8), packets, systematic random-linear fountain code.
//! * [`regions`]: outer bound and benchmark capacity regions as polygons.
//! * [`protocol`]: the three-phase network-coded protocol, end to end.
//! * [`planner`]: scheme comparison, best association, parameter sweeps.
//! * [`export`]: CSV and JSON output formats.

pub mod channel;
mod error;
pub mod export;
pub mod fieldcodec;
pub mod planner;
pub mod protocol;
pub mod regions;
pub mod rng;

pub use channel::{ChannelParams, Receiver};
pub use error::{Error, Result};
