//! Seeded Monte Carlo slot engine.
//!
//! Each slot draws arrivals, places every packet on a uniformly chosen
//! channel (and, when the scheme has a power dimension, a uniformly chosen
//! level), then decodes each channel independently. Draw order is fixed:
//! user by user for Bernoulli arrivals, channel-major then level for
//! per-level Poisson arrivals, so a seed pins the whole outcome stream.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::analytic::{CaptureSemantics, SystemConfig};
use crate::error::{Error, Result};

/// Deterministic generator used for every simulation in the crate.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Packet counts per level on one channel, strongest level first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelOccupancy(Vec<u32>);

impl LevelOccupancy {
    pub fn new(counts: Vec<u32>) -> Self {
        LevelOccupancy(counts)
    }

    /// Builds the occupancy of `l` levels from zero-based level picks.
    pub fn from_picks(l: u32, picks: &[u32]) -> Self {
        let mut counts = vec![0; l as usize];
        for &p in picks {
            counts[p as usize] += 1;
        }
        LevelOccupancy(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&c| u64::from(c)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelOutcome {
    pub successes: u32,
    /// An unoccupied level was seen before decoding stopped.
    pub idle: bool,
    /// One-based index of the level where decoding stopped on a collision.
    pub collision_level: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotOutcome {
    pub per_channel: Vec<ChannelOutcome>,
    pub total_successes: u64,
    pub total_attempts: u64,
}

impl SlotOutcome {
    pub fn idle_channels(&self) -> usize {
        self.per_channel.iter().filter(|c| c.idle).count()
    }
}

/// Successive interference cancellation from the strongest level down.
/// Decoding stops at the first level holding two or more packets.
pub fn decode_channel_sic(occ: &LevelOccupancy) -> ChannelOutcome {
    let mut outcome = ChannelOutcome {
        successes: 0,
        idle: false,
        collision_level: None,
    };
    for (i, &count) in occ.counts().iter().enumerate() {
        match count {
            0 => outcome.idle = true,
            1 => outcome.successes += 1,
            _ => {
                outcome.collision_level = Some(i as u32 + 1);
                break;
            }
        }
    }
    outcome
}

/// Capture receiver: at most one packet, the unique strongest one.
pub fn decode_channel_capture(occ: &LevelOccupancy, semantics: CaptureSemantics) -> u32 {
    let counts = occ.counts();
    let Some(top) = counts.iter().position(|&c| c > 0) else {
        return 0;
    };
    if counts[top] != 1 {
        return 0;
    }
    let lone = occ.total() == 1;
    match semantics {
        CaptureSemantics::PaperFormula if lone && top == counts.len() - 1 => 0,
        _ => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArrivalModel {
    /// Each of `users` transmits independently with probability `p_access`.
    BernoulliUsers { users: u64, p_access: f64 },
    /// Every (channel, level) pair receives Poisson(`lambda`) packets.
    PoissonPerLevel { lambda: f64 },
}

impl ArrivalModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ArrivalModel::BernoulliUsers { p_access, .. } if !(0.0..=1.0).contains(&p_access) => {
                Err(Error::domain("access probability must lie in [0, 1]"))
            }
            ArrivalModel::PoissonPerLevel { lambda }
                if lambda.is_nan() || lambda < 0.0 || lambda.is_infinite() =>
            {
                Err(Error::domain(
                    "per-level rate must be finite and non-negative",
                ))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    NomaRa,
    MsAloha,
    MsAlohaCapture(CaptureSemantics),
}

impl Scheme {
    fn uses_levels(self) -> bool {
        !matches!(self, Scheme::MsAloha)
    }
}

/// Reusable per-run state: the arrival sampler and an occupancy buffer.
pub struct SlotEngine {
    cfg: SystemConfig,
    arrivals: ArrivalModel,
    scheme: Scheme,
    poisson: Option<Poisson<f64>>,
    counts: Vec<u32>,
}

impl SlotEngine {
    pub fn new(cfg: SystemConfig, arrivals: ArrivalModel, scheme: Scheme) -> Result<Self> {
        arrivals.validate()?;
        let poisson = match arrivals {
            ArrivalModel::PoissonPerLevel { lambda } if lambda > 0.0 => Some(
                Poisson::new(lambda).map_err(|e| Error::domain(format!("poisson rate: {e}")))?,
            ),
            _ => None,
        };
        let cells = (cfg.n_channels() * cfg.n_levels()) as usize;
        Ok(SlotEngine {
            cfg,
            arrivals,
            scheme,
            poisson,
            counts: vec![0; cells],
        })
    }

    pub fn run_slot<R: Rng + ?Sized>(&mut self, rng: &mut R) -> SlotOutcome {
        let n = self.cfg.n_channels();
        let l = self.cfg.n_levels();
        self.counts.iter_mut().for_each(|c| *c = 0);
        let mut attempts = 0u64;

        match self.arrivals {
            ArrivalModel::BernoulliUsers { users, p_access } => {
                let with_levels = self.scheme.uses_levels();
                for _ in 0..users {
                    if !rng.random_bool(p_access) {
                        continue;
                    }
                    let ch = rng.random_range(0..n);
                    let lvl = if with_levels {
                        rng.random_range(0..l)
                    } else {
                        0
                    };
                    self.counts[(ch * l + lvl) as usize] += 1;
                    attempts += 1;
                }
            }
            ArrivalModel::PoissonPerLevel { .. } => {
                if let Some(dist) = &self.poisson {
                    for cell in self.counts.iter_mut() {
                        let k = dist.sample(rng) as u32;
                        *cell = k;
                        attempts += u64::from(k);
                    }
                }
            }
        }

        let per_channel: Vec<ChannelOutcome> = self
            .counts
            .chunks(l as usize)
            .map(|levels| decode(self.scheme, levels))
            .collect();
        let total_successes = per_channel.iter().map(|c| u64::from(c.successes)).sum();
        SlotOutcome {
            per_channel,
            total_successes,
            total_attempts: attempts,
        }
    }
}

fn decode(scheme: Scheme, levels: &[u32]) -> ChannelOutcome {
    let occ = LevelOccupancy(levels.to_vec());
    match scheme {
        Scheme::NomaRa => decode_channel_sic(&occ),
        Scheme::MsAloha => {
            let total = occ.total();
            ChannelOutcome {
                successes: u32::from(total == 1),
                idle: total == 0,
                collision_level: (total >= 2).then_some(1),
            }
        }
        Scheme::MsAlohaCapture(semantics) => {
            let top = levels.iter().position(|&c| c > 0);
            ChannelOutcome {
                successes: decode_channel_capture(&occ, semantics),
                idle: top.is_none(),
                collision_level: top.filter(|&i| levels[i] >= 2).map(|i| i as u32 + 1),
            }
        }
    }
}

/// One slot with a freshly built engine.
pub fn run_slot<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    arrivals: &ArrivalModel,
    scheme: Scheme,
    rng: &mut R,
) -> Result<SlotOutcome> {
    Ok(SlotEngine::new(*cfg, *arrivals, scheme)?.run_slot(rng))
}

/// Endless stream of slots driven by a generator seeded with `seed`.
pub fn slot_stream(
    cfg: SystemConfig,
    arrivals: ArrivalModel,
    scheme: Scheme,
    seed: u64,
) -> Result<impl Iterator<Item = SlotOutcome>> {
    let mut engine = SlotEngine::new(cfg, arrivals, scheme)?;
    let mut rng = seeded_rng(seed);
    Ok(std::iter::repeat_with(move || engine.run_slot(&mut rng)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimStats {
    pub slots: u64,
    /// Successes per channel per slot, averaged over the run.
    pub mean_normalized_throughput: f64,
    /// Fraction of (channel, slot) pairs flagged idle.
    pub idle_channel_frequency: f64,
    /// Standard error of the per-slot normalized throughput.
    pub std_error: f64,
    /// Standard error of the per-slot idle fraction.
    pub idle_std_error: f64,
}

/// Running mean and variance (Welford).
#[derive(Debug, Default, Clone, Copy)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

#[derive(Debug, Default, Clone)]
pub struct StatsAccumulator {
    throughput: Moments,
    idle: Moments,
}

impl StatsAccumulator {
    pub fn push(&mut self, slot: &SlotOutcome) {
        let n = slot.per_channel.len() as f64;
        self.throughput.push(slot.total_successes as f64 / n);
        self.idle.push(slot.idle_channels() as f64 / n);
    }

    pub fn finish(&self) -> SimStats {
        SimStats {
            slots: self.throughput.n,
            mean_normalized_throughput: self.throughput.mean,
            idle_channel_frequency: self.idle.mean,
            std_error: self.throughput.std_error(),
            idle_std_error: self.idle.std_error(),
        }
    }
}

pub fn run_fixed_load(
    cfg: &SystemConfig,
    arrivals: &ArrivalModel,
    scheme: Scheme,
    slots: u64,
    seed: u64,
) -> Result<SimStats> {
    if slots == 0 {
        return Err(Error::domain("at least one slot is required"));
    }
    let mut acc = StatsAccumulator::default();
    for slot in slot_stream(*cfg, *arrivals, scheme, seed)?.take(slots as usize) {
        acc.push(&slot);
    }
    Ok(acc.finish())
}

/// Per-channel trace, header `t,channel,successes,idle,collision_level`.
pub struct TraceWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(["t", "channel", "successes", "idle", "collision_level"])?;
        Ok(TraceWriter { inner })
    }

    pub fn write_slot(&mut self, t: u64, slot: &SlotOutcome) -> Result<()> {
        for (ch, c) in slot.per_channel.iter().enumerate() {
            self.inner.write_record([
                t.to_string(),
                ch.to_string(),
                c.successes.to_string(),
                u8::from(c.idle).to_string(),
                c.collision_level.map(|l| l.to_string()).unwrap_or_default(),
            ])?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}
