//! Packet-erasure links from the transmitter to the two receivers.
//!
//! The only effect of an RIS in this model is to lower the erasure
//! probability of the receiver it assists. A receiver assisted by zero, one or
//! two surfaces sees erasure probability `delta_n`, `delta_s` or `delta_d`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_open, Error, Result};
use crate::rng;

/// One of the two receiver terminals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Receiver {
    One,
    Two,
}

impl Receiver {
    pub fn other(self) -> Receiver {
        match self {
            Receiver::One => Receiver::Two,
            Receiver::Two => Receiver::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Receiver::One => 0,
            Receiver::Two => 1,
        }
    }

    pub fn from_id(id: u8) -> Result<Receiver> {
        match id {
            1 => Ok(Receiver::One),
            2 => Ok(Receiver::Two),
            _ => Err(Error::InvalidConfig(format!("receiver id {id} is not 1 or 2"))),
        }
    }
}

/// Erasure probabilities with no, single and double RIS aid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub delta_n: f64,
    pub delta_s: f64,
    pub delta_d: f64,
}

impl ChannelParams {
    pub fn new(delta_n: f64, delta_s: f64, delta_d: f64) -> Result<Self> {
        Ok(ChannelParams {
            delta_n: check_open("delta_n", "(0, 1)", delta_n, 0.0, 1.0)?,
            delta_s: check_open("delta_s", "(0, 1)", delta_s, 0.0, 1.0)?,
            delta_d: check_open("delta_d", "(0, 1)", delta_d, 0.0, 1.0)?,
        })
    }

    /// The example network: weak (0.8), moderate (0.5) and strong (0.3) links.
    pub fn example() -> Self {
        ChannelParams {
            delta_n: 0.8,
            delta_s: 0.5,
            delta_d: 0.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ChannelParams::new(self.delta_n, self.delta_s, self.delta_d).map(|_| ())
    }

    /// Non-fatal warnings. More RIS aid is expected never to worsen a link.
    pub fn lint(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        if self.delta_d > self.delta_s {
            warnings.push(format!(
                "delta_d ({}) exceeds delta_s ({}): double aid is worse than single aid",
                self.delta_d, self.delta_s
            ));
        }
        if self.delta_s > self.delta_n {
            warnings.push(format!(
                "delta_s ({}) exceeds delta_n ({}): single aid is worse than none",
                self.delta_s, self.delta_n
            ));
        }
        warnings
    }

    /// Erasure probability for a receiver assisted by `surfaces` RISs (0, 1 or 2).
    pub fn erasure_for(&self, surfaces: u8) -> f64 {
        match surfaces {
            0 => self.delta_n,
            1 => self.delta_s,
            _ => self.delta_d,
        }
    }
}

/// RIS-user association scheme. Receiver 2 is always served by the surfaces
/// not assigned to receiver 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    NoRis,
    /// Each surface assists its own receiver for the whole block.
    Neutral,
    /// Both surfaces assist one receiver for the whole block.
    BothToUser(Receiver),
    /// Both surfaces on receiver 1 for a fraction `eta1` of the block, then on
    /// receiver 2 for `eta2`, then one each for the remainder.
    Dynamic { eta1: f64, eta2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssociationSchedule {
    scheme: Scheme,
}

impl AssociationSchedule {
    pub fn new(scheme: Scheme) -> Result<Self> {
        if let Scheme::Dynamic { eta1, eta2 } = scheme {
            check_open("eta1", "(0, 1/2)", eta1, 0.0, 0.5)?;
            check_open("eta2", "(0, 1/2)", eta2, 0.0, 0.5)?;
        }
        Ok(AssociationSchedule { scheme })
    }

    pub fn symmetric_dynamic(eta: f64) -> Result<Self> {
        Self::new(Scheme::Dynamic { eta1: eta, eta2: eta })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Number of surfaces assisting each receiver during protocol phase 1, 2 or 3.
    pub fn surfaces(&self, phase: u8) -> Result<[u8; 2]> {
        if !(1..=3).contains(&phase) {
            return Err(Error::PhaseOutOfRange(phase));
        }
        let rx1 = match self.scheme {
            Scheme::NoRis => return Ok([0, 0]),
            Scheme::Neutral => 1,
            Scheme::BothToUser(Receiver::One) => 2,
            Scheme::BothToUser(Receiver::Two) => 0,
            Scheme::Dynamic { .. } => match phase {
                1 => 2,
                2 => 0,
                _ => 1,
            },
        };
        Ok([rx1, 2 - rx1])
    }

    /// Protocol phase in effect at normalized time `t = slot / n` under the
    /// nominal windows. Static schemes report phase 1 throughout.
    pub fn phase_at(&self, t: f64) -> Result<u8> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::TimeOutOfRange(t));
        }
        Ok(match self.scheme {
            Scheme::Dynamic { eta1, .. } if t < eta1 => 1,
            Scheme::Dynamic { eta1, eta2 } if t < eta1 + eta2 => 2,
            Scheme::Dynamic { .. } => 3,
            _ => 1,
        })
    }
}

/// Where in the block an erasure profile is requested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockPosition {
    Phase(u8),
    /// Slot index divided by the block length.
    Time(f64),
}

/// Per-slot erasure probabilities `(d1, d2)` seen by the two receivers.
pub fn erasure_profile(
    schedule: &AssociationSchedule,
    params: &ChannelParams,
    at: BlockPosition,
) -> Result<(f64, f64)> {
    let phase = match at {
        BlockPosition::Phase(p) => p,
        BlockPosition::Time(t) => schedule.phase_at(t)?,
    };
    let [a, b] = schedule.surfaces(phase)?;
    Ok((params.erasure_for(a), params.erasure_for(b)))
}

/// Delivery state of one slot: `s1` is true when the link to receiver 1 delivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SlotState {
    pub s1: bool,
    pub s2: bool,
}

impl SlotState {
    pub fn delivered(&self, rx: Receiver) -> bool {
        match rx {
            Receiver::One => self.s1,
            Receiver::Two => self.s2,
        }
    }

    pub fn any(&self) -> bool {
        self.s1 || self.s2
    }
}

/// Draws one slot. Consumes exactly two `f64` uniforms, link 1 first; link `i`
/// delivers when its uniform is below `1 - d_i`.
pub fn sample_slot<R: Rng + ?Sized>(d1: f64, d2: f64, rng: &mut R) -> SlotState {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    SlotState {
        s1: u1 < 1.0 - d1,
        s2: u2 < 1.0 - d2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feedback {
    Ack,
    Nack,
}

impl From<bool> for Feedback {
    fn from(delivered: bool) -> Self {
        if delivered {
            Feedback::Ack
        } else {
            Feedback::Nack
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<T> {
    Received(T),
    Erased,
}

impl<T> Outcome<T> {
    pub fn is_received(&self) -> bool {
        matches!(self, Outcome::Received(_))
    }
}

/// What each receiver got in one slot, and the ACK/NACK pair echoed back.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotObservation<T> {
    pub outcomes: [Outcome<T>; 2],
    pub state: SlotState,
}

impl<T> SlotObservation<T> {
    pub fn outcome(&self, rx: Receiver) -> &Outcome<T> {
        &self.outcomes[rx.index()]
    }

    pub fn feedback(&self) -> [Feedback; 2] {
        [self.state.s1.into(), self.state.s2.into()]
    }
}

pub fn broadcast<T: Clone>(x: &T, state: SlotState) -> SlotObservation<T> {
    let deliver = |ok: bool| {
        if ok {
            Outcome::Received(x.clone())
        } else {
            Outcome::Erased
        }
    };
    SlotObservation {
        outcomes: [deliver(state.s1), deliver(state.s2)],
        state,
    }
}

/// A pair of erasure links driven by one seeded generator. The feedback log
/// records every realized state, which is exactly what the transmitter sees.
#[derive(Debug, Clone)]
pub struct Channel {
    rng: ChaCha8Rng,
    slots: u64,
}

impl Channel {
    pub fn new(seed: u64) -> Self {
        Channel {
            rng: rng::stream_rng(seed, rng::CHANNEL_STREAM),
            slots: 0,
        }
    }

    pub fn sample(&mut self, d1: f64, d2: f64) -> SlotState {
        self.slots += 1;
        sample_slot(d1, d2, &mut self.rng)
    }

    pub fn transmit<T: Clone>(&mut self, x: &T, profile: (f64, f64)) -> SlotObservation<T> {
        let state = self.sample(profile.0, profile.1);
        broadcast(x, state)
    }

    pub fn slots_used(&self) -> u64 {
        self.slots
    }
}
