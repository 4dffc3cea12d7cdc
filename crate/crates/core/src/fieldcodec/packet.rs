use serde::{Deserialize, Serialize};

use super::gf;
use crate::channel::Receiver;
use crate::error::{Error, Result};

pub const DEFAULT_PAYLOAD_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PacketKind {
    Original,
    /// Field sum of two packets.
    Combined,
    /// Random linear combination emitted by the fountain encoder.
    Coded,
}

/// Fixed-length payload over GF(2^8).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Packet {
    pub id: u64,
    pub owner: Receiver,
    pub payload: Vec<u8>,
    pub kind: PacketKind,
}

impl Packet {
    pub fn original(id: u64, owner: Receiver, payload: Vec<u8>) -> Self {
        Packet {
            id,
            owner,
            payload,
            kind: PacketKind::Original,
        }
    }

    pub fn zero(len: usize, owner: Receiver) -> Self {
        Packet {
            id: u64::MAX,
            owner,
            payload: vec![0; len],
            kind: PacketKind::Original,
        }
    }

    pub fn len(&self) -> usize {
        self.payload.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payload.is_empty()
    }
}

/// Element-wise field sum of two packets. The result keeps `p`'s id and owner.
pub fn combine(p: &Packet, q: &Packet) -> Result<Packet> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            actual: q.len(),
        });
    }
    let mut payload = p.payload.clone();
    gf::add_assign(&mut payload, &q.payload);
    Ok(Packet {
        id: p.id,
        owner: p.owner,
        payload,
        kind: PacketKind::Combined,
    })
}
