//! Pairing two peers: wire protocol, confidence fusion and a network simulator.

mod session;
mod sim;
mod wire;

pub use session::{fuse, FusionConfig, FusionRangeError, Session, SessionError, SessionInput, Trigger};
pub use sim::{simulate_dyad, Delivery, DyadOutcome, NetParams, PeerLog, SimError};
pub use wire::{decode_message, encode_message, ConfidenceSet, WireError, WireMessage, PROTOCOL_VERSION};
