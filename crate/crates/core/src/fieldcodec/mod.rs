//! Field arithmetic, packets and the erasure code used for the coded phase.

mod fountain;
pub mod gf;
mod packet;

pub use fountain::{encode_repair, repair_coefficients, Decoder, FountainEncoder};
pub use gf::{gf_arith, Gf256, GfOp};
pub use packet::{combine, Packet, PacketKind, DEFAULT_PAYLOAD_LEN};
