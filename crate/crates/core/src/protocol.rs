//! Three-phase opportunistic protocol with ACK/NACK feedback.
//!
//! Phase 1 sends receiver 1's packets uncoded while both surfaces assist
//! receiver 1, retransmitting each packet until at least one receiver has it.
//! Packets that only receiver 2 caught go to a virtual queue. Phase 2 mirrors
//! this for receiver 2. Phase 3, with one surface per receiver, broadcasts the
//! pairwise sums of the two queues through a systematic fountain code; each
//! receiver then cancels the half it overheard to recover the half it needs.
//!
//! Association switches when a phase completes, so the realized phase
//! fractions are reported rather than imposed.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    erasure_profile, AssociationSchedule, BlockPosition, Channel, ChannelParams, Outcome,
    Receiver,
};
use crate::error::{check_open, Error, Result};
use crate::fieldcodec::{gf, Decoder, FountainEncoder, Packet, PacketKind, DEFAULT_PAYLOAD_LEN};
use crate::rng;

/// Default number of combined packets coded together in phase 3.
pub const DEFAULT_GENERATION_SIZE: usize = 256;

/// Phase fraction that makes the three average phase durations fill the block
/// exactly.
pub fn optimal_eta(params: &ChannelParams) -> f64 {
    let single = 1.0 - params.delta_s;
    single / (2.0 * single + params.delta_d * (1.0 - params.delta_n))
}

/// Probability that a phase-1 packet is resolved in a given slot.
fn resolve_prob(d_own: f64, d_other: f64) -> f64 {
    1.0 - d_own * d_other
}

pub fn expected_uncoded_slots(m: f64, d_own: f64, d_other: f64) -> f64 {
    m / resolve_prob(d_own, d_other)
}

pub fn expected_queue_len(m: f64, d_own: f64, d_other: f64) -> f64 {
    m * d_own * (1.0 - d_other) / resolve_prob(d_own, d_other)
}

pub fn expected_coded_slots(k: f64, delta_s: f64) -> f64 {
    k / (1.0 - delta_s)
}

/// Symmetric sum-rate of the protocol when the three phases are confined to
/// nominal windows of `eta*n`, `eta*n` and `(1-2eta)*n` slots: the smaller of
/// the phase-1 budget and what the phase-3 window can carry.
pub fn windowed_sum_rate(params: &ChannelParams, eta: f64) -> f64 {
    let r = resolve_prob(params.delta_d, params.delta_n);
    let per_packet_phase3 = params.delta_d * (1.0 - params.delta_n) / ((1.0 - params.delta_s) * r);
    let by_phase1 = 2.0 * r * eta;
    let by_phase3 = 2.0 * (1.0 - 2.0 * eta) / per_packet_phase3;
    by_phase1.min(by_phase3)
}

/// Default packets per user: the expected phase-1 throughput over `eta*n` slots.
pub fn default_m(params: &ChannelParams, eta: f64, n: u64) -> usize {
    ((1.0 - params.delta_d * params.delta_n) * eta * n as f64).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub params: ChannelParams,
    /// Nominal block length in slots.
    pub n: u64,
    pub eta: f64,
    /// Packets for receiver 1 (and receiver 2 unless `m2` is set).
    pub m: usize,
    /// Asymmetric load for receiver 2.
    pub m2: Option<usize>,
    pub payload_len: usize,
    pub seed: u64,
    pub generation_size: usize,
}

impl ProtocolConfig {
    pub fn new(params: ChannelParams, n: u64) -> Self {
        let eta = optimal_eta(&params);
        ProtocolConfig {
            params,
            n,
            eta,
            m: default_m(&params, eta, n),
            m2: None,
            payload_len: DEFAULT_PAYLOAD_LEN,
            seed: 1,
            generation_size: DEFAULT_GENERATION_SIZE,
        }
    }

    /// Sets the phase fraction and rederives `m` from it.
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self.m = default_m(&self.params, eta, self.n);
        self
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_payload_len(mut self, len: usize) -> Self {
        self.payload_len = len;
        self
    }

    pub fn packets_for(&self, rx: Receiver) -> usize {
        match rx {
            Receiver::One => self.m,
            Receiver::Two => self.m2.unwrap_or(self.m),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        check_open("eta", "(0, 1/2)", self.eta, 0.0, 0.5)?;
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if self.payload_len == 0 {
            return invalid("payload_len must be at least 1".into());
        }
        if self.generation_size == 0 {
            return invalid("generation_size must be at least 1".into());
        }
        let r = resolve_prob(self.params.delta_d, self.params.delta_n);
        for rx in [Receiver::One, Receiver::Two] {
            let m = self.packets_for(rx);
            if m == 0 {
                return invalid(format!(
                    "m must be at least 1 (n = {} gives m = 0 at eta = {})",
                    self.n, self.eta
                ));
            }
            let window = (m as f64 / r).ceil();
            if self.n < 2 * window as u64 {
                return invalid(format!(
                    "n = {} is too short for m = {m}: needs at least {}",
                    self.n,
                    2 * window as u64
                ));
            }
        }
        Ok(())
    }
}

/// Receiver-side store of everything a terminal has heard.
#[derive(Debug, Clone)]
pub struct Terminal {
    id: Receiver,
    own: Vec<Option<Vec<u8>>>,
    overheard: Vec<Option<Vec<u8>>>,
}

impl Terminal {
    pub fn new(id: Receiver, own_packets: usize, other_packets: usize) -> Self {
        Terminal {
            id,
            own: vec![None; own_packets],
            overheard: vec![None; other_packets],
        }
    }

    pub fn id(&self) -> Receiver {
        self.id
    }

    pub fn accept(&mut self, p: &Packet) {
        let slot = if p.owner == self.id {
            &mut self.own
        } else {
            &mut self.overheard
        };
        slot[p.id as usize] = Some(p.payload.clone());
    }

    pub fn own_packet(&self, id: u64) -> Option<&[u8]> {
        self.own[id as usize].as_deref()
    }

    pub fn overheard_packet(&self, id: u64) -> Option<&[u8]> {
        self.overheard[id as usize].as_deref()
    }

    fn store_own(&mut self, id: u64, payload: Vec<u8>) {
        self.own[id as usize] = Some(payload);
    }

    /// True when every packet in `originals` (all owned by this terminal) is
    /// held bit-exactly.
    pub fn holds_all(&self, originals: &[Packet]) -> bool {
        originals.len() == self.own.len()
            && originals
                .iter()
                .all(|p| self.own_packet(p.id) == Some(p.payload.as_slice()))
    }
}

/// Packets intended for `owner` that only the other receiver obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualQueue {
    pub owner: Receiver,
    pub entries: Vec<Packet>,
}

impl VirtualQueue {
    pub fn new(owner: Receiver) -> Self {
        VirtualQueue {
            owner,
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncodedPhase {
    pub slots: u64,
    pub queue: VirtualQueue,
}

/// Sends each packet until its owner or the other receiver gets it.
///
/// `profile` is `(d_own, d_other)`. All packets must share one owner.
pub fn run_uncoded_phase(
    packets: &[Packet],
    profile: (f64, f64),
    channel: &mut Channel,
    terminals: &mut [Terminal; 2],
) -> UncodedPhase {
    let Some(first) = packets.first() else {
        return UncodedPhase {
            slots: 0,
            queue: VirtualQueue::new(Receiver::One),
        };
    };
    let owner = first.owner;
    let other = owner.other();
    let (d_own, d_other) = profile;
    let link = match owner {
        Receiver::One => (d_own, d_other),
        Receiver::Two => (d_other, d_own),
    };

    let mut queue = VirtualQueue::new(owner);
    let mut slots = 0;
    for packet in packets {
        debug_assert_eq!(packet.owner, owner);
        loop {
            let obs = channel.transmit(&packet, link);
            slots += 1;
            for t in terminals.iter_mut() {
                if let Outcome::Received(p) = obs.outcome(t.id()) {
                    t.accept(p);
                }
            }
            if obs.state.delivered(owner) {
                break;
            }
            if obs.state.delivered(other) {
                queue.entries.push(packet.clone());
                break;
            }
        }
    }
    UncodedPhase { slots, queue }
}

/// Pairwise sums `q1[i] + q2[i]`, the shorter queue padded with zero packets.
pub fn build_combined_queue(q1: &VirtualQueue, q2: &VirtualQueue, payload_len: usize) -> Vec<Packet> {
    let k = q1.len().max(q2.len());
    (0..k)
        .map(|i| {
            let mut payload = vec![0u8; payload_len];
            let mut owner = Receiver::Two;
            if let Some(p) = q2.entries.get(i) {
                gf::add_assign(&mut payload, &p.payload);
            }
            if let Some(p) = q1.entries.get(i) {
                gf::add_assign(&mut payload, &p.payload);
                owner = Receiver::One;
            }
            Packet {
                id: i as u64,
                owner,
                payload,
                kind: PacketKind::Combined,
            }
        })
        .collect()
}

/// Fountain-code settings for phase 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodingParams {
    pub seed: u64,
    pub generation_size: usize,
}

impl CodingParams {
    /// Key of generation `g`'s repair coefficients.
    pub fn block_seed(&self, generation: usize) -> u64 {
        rng::splitmix64(self.seed ^ rng::splitmix64(generation as u64))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodedPhase {
    pub slots: u64,
    /// What each receiver holds for every combined packet once both decoders
    /// are complete.
    pub decoded: [Vec<Vec<u8>>; 2],
}

/// Receiver-side decoding state for one generation.
struct GenerationDecoder<'a> {
    known: Vec<(usize, &'a [u8])>,
    unknown: Vec<usize>,
    decoder: Decoder,
}

impl<'a> GenerationDecoder<'a> {
    fn new(prior: &'a [Option<Vec<u8>>], payload_len: usize) -> Self {
        let mut known = Vec::new();
        let mut unknown = Vec::new();
        for (j, p) in prior.iter().enumerate() {
            match p {
                Some(x) => known.push((j, x.as_slice())),
                None => unknown.push(j),
            }
        }
        let decoder = Decoder::new(unknown.len(), payload_len);
        GenerationDecoder {
            known,
            unknown,
            decoder,
        }
    }

    fn receive(&mut self, coeffs: &[u8], payload: &[u8]) -> Result<()> {
        let mut residual = payload.to_vec();
        for &(j, x) in &self.known {
            gf::mul_add_assign(&mut residual, x, coeffs[j]);
        }
        let compact = self.unknown.iter().map(|&j| coeffs[j]).collect();
        self.decoder.insert_owned(compact, residual)?;
        Ok(())
    }

    fn finish(self, out: &mut [Vec<u8>]) -> Result<()> {
        let solved = self.decoder.solve()?;
        for (j, x) in self.unknown.into_iter().zip(solved) {
            out[j] = x;
        }
        for (j, x) in self.known {
            out[j] = x.to_vec();
        }
        Ok(())
    }
}

/// Broadcasts `combined` through the fountain code until both receivers can
/// decode every entry. Receivers start with nothing.
pub fn run_coded_phase(
    combined: &[Packet],
    profile: (f64, f64),
    channel: &mut Channel,
    coding: CodingParams,
) -> Result<CodedPhase> {
    let none = vec![None; combined.len()];
    run_coded_phase_with_side_info([&none, &none], combined, profile, channel, coding)
}

/// As [`run_coded_phase`], with `prior[r][j]` holding the payload of
/// `combined[j]` when receiver `r` already knows it from side information.
///
/// Generations of `coding.generation_size` consecutive entries are coded one
/// after another: a systematic pass, then repair rows until both receivers
/// reach full rank on the generation.
pub fn run_coded_phase_with_side_info(
    prior: [&[Option<Vec<u8>>]; 2],
    combined: &[Packet],
    profile: (f64, f64),
    channel: &mut Channel,
    coding: CodingParams,
) -> Result<CodedPhase> {
    let k = combined.len();
    for p in prior {
        if p.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                actual: p.len(),
            });
        }
    }
    let payload_len = combined.first().map_or(0, Packet::len);
    let mut decoded = [vec![Vec::new(); k], vec![Vec::new(); k]];
    let mut slots = 0u64;
    if k == 0 {
        return Ok(CodedPhase { slots, decoded });
    }

    let gen_size = coding.generation_size.max(1);
    for (g, start) in (0..k).step_by(gen_size).enumerate() {
        let end = (start + gen_size).min(k);
        let sources: Vec<&[u8]> = combined[start..end].iter().map(|p| p.payload.as_slice()).collect();
        let encoder = FountainEncoder::new(sources, coding.block_seed(g))?;
        let mut rx = [
            GenerationDecoder::new(&prior[0][start..end], payload_len),
            GenerationDecoder::new(&prior[1][start..end], payload_len),
        ];

        let mut index = 0u64;
        while !(rx[0].decoder.is_complete() && rx[1].decoder.is_complete()) {
            let state = channel.sample(profile.0, profile.1);
            slots += 1;
            let wants = [
                state.s1 && !rx[0].decoder.is_complete(),
                state.s2 && !rx[1].decoder.is_complete(),
            ];
            if wants[0] || wants[1] {
                let (coeffs, payload) = encoder.symbol(index);
                for (r, d) in rx.iter_mut().enumerate() {
                    if wants[r] {
                        d.receive(&coeffs, &payload)?;
                    }
                }
            }
            index += 1;
        }
        let [a, b] = rx;
        a.finish(&mut decoded[0][start..end])?;
        b.finish(&mut decoded[1][start..end])?;
    }
    Ok(CodedPhase { slots, decoded })
}

/// Outcome of one end-to-end run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub slots_phase1: u64,
    pub slots_phase2: u64,
    pub slots_phase3: u64,
    pub q1_len: usize,
    pub q2_len: usize,
    pub total_slots: u64,
    pub sum_rate: f64,
    pub decode_ok: bool,
    pub realized_eta1: f64,
    pub realized_eta2: f64,
}

/// Random payloads for both users, receiver 1's first, from the payload stream.
pub fn generate_packets(config: &ProtocolConfig) -> [Vec<Packet>; 2] {
    let mut rng = rng::stream_rng(config.seed, rng::PAYLOAD_STREAM);
    let mut make = |owner: Receiver| -> Vec<Packet> {
        (0..config.packets_for(owner))
            .map(|id| {
                let mut payload = vec![0u8; config.payload_len];
                rng.fill_bytes(&mut payload);
                Packet::original(id as u64, owner, payload)
            })
            .collect()
    };
    let first = make(Receiver::One);
    let second = make(Receiver::Two);
    [first, second]
}

/// Runs the three phases once and verifies delivery bit-exactly.
pub fn simulate(config: &ProtocolConfig) -> Result<SimulationResult> {
    config.validate()?;
    let params = &config.params;
    let schedule = AssociationSchedule::symmetric_dynamic(config.eta)?;
    let profile = |phase| erasure_profile(&schedule, params, BlockPosition::Phase(phase));

    let [packets1, packets2] = generate_packets(config);
    let (m1, m2) = (packets1.len(), packets2.len());
    let mut channel = Channel::new(config.seed);
    let mut terminals = [
        Terminal::new(Receiver::One, m1, m2),
        Terminal::new(Receiver::Two, m2, m1),
    ];

    let (d1, d2) = profile(1)?;
    let phase1 = run_uncoded_phase(&packets1, (d1, d2), &mut channel, &mut terminals);
    let (d1, d2) = profile(2)?;
    let phase2 = run_uncoded_phase(&packets2, (d2, d1), &mut channel, &mut terminals);
    let (q1, q2) = (&phase1.queue, &phase2.queue);

    let combined = build_combined_queue(q1, q2, config.payload_len);
    let k = combined.len();
    // A padded entry is a bare packet of the longer queue, which the other
    // receiver overheard when it was queued.
    let prior_for = |t: &Terminal, longer: &VirtualQueue, shorter_len: usize| {
        (0..k)
            .map(|j| {
                (j >= shorter_len).then(|| {
                    t.overheard_packet(longer.entries[j].id)
                        .expect("queued packets were overheard")
                        .to_vec()
                })
            })
            .collect::<Vec<_>>()
    };
    let prior1 = if q2.len() > q1.len() {
        prior_for(&terminals[0], q2, q1.len())
    } else {
        vec![None; k]
    };
    let prior2 = if q1.len() > q2.len() {
        prior_for(&terminals[1], q1, q2.len())
    } else {
        vec![None; k]
    };

    let coding = CodingParams {
        seed: config.seed,
        generation_size: config.generation_size,
    };
    let phase3 = run_coded_phase_with_side_info(
        [&prior1, &prior2],
        &combined,
        profile(3)?,
        &mut channel,
        coding,
    )?;

    // Cancel the overheard half of each combined packet.
    for (t, (mine, theirs)) in terminals.iter_mut().zip([(q1, q2), (q2, q1)]) {
        let r = t.id().index();
        for (j, wanted) in mine.entries.iter().enumerate() {
            let mut x = phase3.decoded[r][j].clone();
            if let Some(side) = theirs.entries.get(j) {
                let known = t
                    .overheard_packet(side.id)
                    .expect("queued packets were overheard");
                gf::add_assign(&mut x, known);
            }
            t.store_own(wanted.id, x);
        }
    }

    let decode_ok = terminals[0].holds_all(&packets1) && terminals[1].holds_all(&packets2);
    let total = phase1.slots + phase2.slots + phase3.slots;
    let n = config.n as f64;
    Ok(SimulationResult {
        slots_phase1: phase1.slots,
        slots_phase2: phase2.slots,
        slots_phase3: phase3.slots,
        q1_len: q1.len(),
        q2_len: q2.len(),
        total_slots: total,
        sum_rate: (m1 + m2) as f64 / total as f64,
        decode_ok,
        realized_eta1: phase1.slots as f64 / n,
        realized_eta2: phase2.slots as f64 / n,
    })
}

/// Aggregate of independent trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub per_trial: Vec<SimulationResult>,
    pub mean_sum_rate: f64,
    /// Sample standard deviation (zero for a single trial).
    pub std_sum_rate: f64,
    pub mean_eta1: f64,
    pub mean_eta2: f64,
    pub mean_phase3_fraction: f64,
    pub decode_failures: usize,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    sum / count as f64
}

impl MonteCarloSummary {
    pub fn from_results(per_trial: Vec<SimulationResult>, n: u64) -> Self {
        let trials = per_trial.len();
        let mean_sum_rate = mean(per_trial.iter().map(|r| r.sum_rate));
        let std_sum_rate = if trials > 1 {
            let ss: f64 = per_trial
                .iter()
                .map(|r| (r.sum_rate - mean_sum_rate).powi(2))
                .sum();
            (ss / (trials - 1) as f64).sqrt()
        } else {
            0.0
        };
        MonteCarloSummary {
            trials,
            mean_sum_rate,
            std_sum_rate,
            mean_eta1: mean(per_trial.iter().map(|r| r.realized_eta1)),
            mean_eta2: mean(per_trial.iter().map(|r| r.realized_eta2)),
            mean_phase3_fraction: mean(per_trial.iter().map(|r| r.slots_phase3 as f64 / n as f64)),
            decode_failures: per_trial.iter().filter(|r| !r.decode_ok).count(),
            per_trial,
        }
    }

    /// Standard error of the mean sum-rate.
    pub fn std_error(&self) -> f64 {
        self.std_sum_rate / (self.trials as f64).sqrt()
    }
}

/// Runs `trials` independent simulations; trial `i` uses
/// `rng::trial_seed(config.seed, i)`. Trials run on the current rayon pool and
/// are reduced in trial order.
pub fn monte_carlo(config: &ProtocolConfig, trials: usize) -> Result<MonteCarloSummary> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    config.validate()?;
    let results = (0..trials)
        .into_par_iter()
        .map(|i| simulate(&config.clone().with_seed(rng::trial_seed(config.seed, i as u64))))
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloSummary::from_results(results, config.n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> ChannelParams {
        ChannelParams::example()
    }

    fn packets(owner: Receiver, m: usize, len: usize, seed: u64) -> Vec<Packet> {
        let mut rng = rng::stream_rng(seed, 9);
        (0..m)
            .map(|id| {
                let mut x = vec![0u8; len];
                rng.fill_bytes(&mut x);
                Packet::original(id as u64, owner, x)
            })
            .collect()
    }

    fn terminals(m1: usize, m2: usize) -> [Terminal; 2] {
        [Terminal::new(Receiver::One, m1, m2), Terminal::new(Receiver::Two, m2, m1)]
    }

    #[test]
    fn optimal_eta_examples() {
        assert!((optimal_eta(&p()) - 1.0 / 2.12).abs() < 1e-15);
        let q = ChannelParams::new(0.8, 0.5, 1e-12).unwrap();
        assert!((optimal_eta(&q) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn average_durations_fill_the_block() {
        for q in [p(), ChannelParams::new(0.6, 0.4, 0.2).unwrap(), ChannelParams::new(0.9, 0.3, 0.1).unwrap()] {
            let eta = optimal_eta(&q);
            let n = 1.0;
            let m = (1.0 - q.delta_d * q.delta_n) * eta * n;
            let phase1 = expected_uncoded_slots(m, q.delta_d, q.delta_n);
            let queue = expected_queue_len(m, q.delta_d, q.delta_n);
            let phase3 = expected_coded_slots(queue, q.delta_s);
            assert!((2.0 * phase1 + phase3 - n).abs() < 1e-12);
            assert!((windowed_sum_rate(&q, eta) - 2.0 * m / n).abs() < 1e-12);
        }
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = ProtocolConfig::new(p(), 200_000);
        assert_eq!(c.m, 71_698);
        assert!(c.validate().is_ok());
        assert!(ProtocolConfig::new(p(), 1).validate().is_err());
        assert!(ProtocolConfig::new(p(), 100).with_m(1000).validate().is_err());
        assert!(ProtocolConfig::new(p(), 100).with_eta(0.6).validate().is_err());
        assert!(ProtocolConfig::new(p(), 100).with_payload_len(0).validate().is_err());
    }

    #[test]
    fn uncoded_phase_perfect_owner_link() {
        let pk = packets(Receiver::One, 50, 8, 1);
        let mut ch = Channel::new(1);
        let mut t = terminals(50, 0);
        let out = run_uncoded_phase(&pk, (0.0, 0.7), &mut ch, &mut t);
        assert_eq!(out.slots, 50);
        assert!(out.queue.is_empty());
        assert!(t[0].holds_all(&pk));
    }

    #[test]
    fn uncoded_phase_queue_invariant() {
        let pk = packets(Receiver::Two, 200, 4, 2);
        let mut ch = Channel::new(2);
        let mut t = terminals(0, 200);
        let out = run_uncoded_phase(&pk, (0.5, 0.5), &mut ch, &mut t);
        assert_eq!(out.queue.owner, Receiver::Two);
        assert!(!out.queue.is_empty());
        for p in &out.queue.entries {
            assert!(t[1].own_packet(p.id).is_none());
            assert_eq!(t[0].overheard_packet(p.id), Some(p.payload.as_slice()));
        }
        let queued = out.queue.len();
        let direct = (0..200).filter(|&i| t[1].own_packet(i).is_some()).count();
        assert_eq!(queued + direct, 200);
    }

    #[test]
    fn uncoded_phase_means() {
        let trials = 10_000;
        let pk = packets(Receiver::One, 100, 1, 3);
        let (mut slots, mut queue) = (0u64, 0usize);
        for s in 0..trials {
            let mut ch = Channel::new(rng::trial_seed(3, s));
            let mut t = terminals(100, 0);
            let out = run_uncoded_phase(&pk, (0.3, 0.8), &mut ch, &mut t);
            slots += out.slots;
            queue += out.queue.len();
        }
        let mean_slots = slots as f64 / trials as f64;
        let mean_queue = queue as f64 / trials as f64;
        let want_slots = expected_uncoded_slots(100.0, 0.3, 0.8);
        let want_queue = expected_queue_len(100.0, 0.3, 0.8);
        assert!((want_slots - 131.578947).abs() < 1e-5);
        assert!((want_queue - 7.894737).abs() < 1e-5);
        assert!((mean_slots / want_slots - 1.0).abs() < 0.01, "{mean_slots}");
        assert!((mean_queue / want_queue - 1.0).abs() < 0.02, "{mean_queue}");
    }

    fn queue_of(owner: Receiver, m: usize, seed: u64) -> VirtualQueue {
        VirtualQueue {
            owner,
            entries: packets(owner, m, 8, seed),
        }
    }

    #[test]
    fn combined_queue_construction() {
        let q1 = queue_of(Receiver::One, 5, 1);
        let q2 = queue_of(Receiver::Two, 3, 2);
        let c = build_combined_queue(&q1, &q2, 8);
        assert_eq!(c.len(), 5);
        for i in 0..3 {
            // either side cancels its known half
            let mut x = c[i].payload.clone();
            gf::add_assign(&mut x, &q2.entries[i].payload);
            assert_eq!(x, q1.entries[i].payload);
            let mut y = c[i].payload.clone();
            gf::add_assign(&mut y, &q1.entries[i].payload);
            assert_eq!(y, q2.entries[i].payload);
        }
        assert_eq!(c[3].payload, q1.entries[3].payload);
        assert_eq!(c[4].payload, q1.entries[4].payload);

        let empty1 = VirtualQueue::new(Receiver::One);
        let empty2 = VirtualQueue::new(Receiver::Two);
        assert!(build_combined_queue(&empty1, &empty2, 8).is_empty());
    }

    fn coding(seed: u64) -> CodingParams {
        CodingParams {
            seed,
            generation_size: DEFAULT_GENERATION_SIZE,
        }
    }

    #[test]
    fn coded_phase_empty_and_perfect() {
        let mut ch = Channel::new(1);
        let out = run_coded_phase(&[], (0.5, 0.5), &mut ch, coding(1)).unwrap();
        assert_eq!(out.slots, 0);

        let c = build_combined_queue(&queue_of(Receiver::One, 40, 3), &queue_of(Receiver::Two, 40, 4), 8);
        let out = run_coded_phase(&c, (0.0, 0.0), &mut ch, coding(1)).unwrap();
        assert_eq!(out.slots, 40);
    }

    #[test]
    fn coded_phase_decodes_bit_exact() {
        let c = build_combined_queue(&queue_of(Receiver::One, 300, 5), &queue_of(Receiver::Two, 280, 6), 8);
        let mut ch = Channel::new(9);
        let out = run_coded_phase(&c, (0.5, 0.6), &mut ch, coding(9)).unwrap();
        for r in 0..2 {
            for (got, want) in out.decoded[r].iter().zip(&c) {
                assert_eq!(got, &want.payload);
            }
        }
        assert!(out.slots >= 300);
    }

    #[test]
    fn coded_phase_mean_duration() {
        let c = build_combined_queue(&queue_of(Receiver::One, 500, 7), &queue_of(Receiver::Two, 500, 8), 8);
        let trials = 1000;
        let mut total = 0u64;
        for s in 0..trials {
            let mut ch = Channel::new(rng::trial_seed(11, s));
            total += run_coded_phase(&c, (0.5, 0.5), &mut ch, coding(s)).unwrap().slots;
        }
        let mean = total as f64 / trials as f64;
        assert!((mean / 1000.0 - 1.0).abs() < 0.03, "mean slots {mean}");
    }

    #[test]
    fn side_info_prior_is_used() {
        let c = build_combined_queue(&queue_of(Receiver::One, 10, 3), &queue_of(Receiver::Two, 10, 4), 8);
        let all: Vec<Option<Vec<u8>>> = c.iter().map(|p| Some(p.payload.clone())).collect();
        let none = vec![None; c.len()];
        let mut ch = Channel::new(3);
        let out = run_coded_phase_with_side_info([&all, &none], &c, (0.9, 0.0), &mut ch, coding(3)).unwrap();
        // receiver 2 has a perfect link and receiver 1 needs nothing
        assert_eq!(out.slots, 10);
        assert!(run_coded_phase_with_side_info([&all[..3], &none], &c, (0.5, 0.5), &mut ch, coding(3)).is_err());
    }

    #[test]
    fn simulate_small_instances_decode() {
        for seed in 0..50 {
            let cfg = ProtocolConfig::new(p(), 100).with_seed(seed);
            let r = simulate(&cfg).unwrap();
            assert!(r.decode_ok, "seed {seed}");
            assert_eq!(r.total_slots, r.slots_phase1 + r.slots_phase2 + r.slots_phase3);
        }
    }

    #[test]
    fn simulate_asymmetric_load() {
        let mut cfg = ProtocolConfig::new(p(), 2000).with_seed(4);
        cfg.m2 = Some(cfg.m / 2);
        let r = simulate(&cfg).unwrap();
        assert!(r.decode_ok);
        assert!((r.sum_rate - (cfg.m + cfg.m / 2) as f64 / r.total_slots as f64).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_single_and_repeatable() {
        let cfg = ProtocolConfig::new(p(), 2000).with_seed(5);
        let one = monte_carlo(&cfg, 1).unwrap();
        assert_eq!(one.mean_sum_rate, one.per_trial[0].sum_rate);
        assert_eq!(one.std_sum_rate, 0.0);
        let a = monte_carlo(&cfg, 8).unwrap();
        let b = monte_carlo(&cfg, 8).unwrap();
        assert_eq!(a, b);
        assert!(monte_carlo(&cfg, 0).is_err());
    }
}
