//! Closed-form throughput and idle-probability expressions for NOMA-RA and
//! the multi-channel slotted ALOHA (MS-ALOHA) baselines.
//!
//! Level indices run from 1 (strongest received power) to `L` (weakest).
//! Power terms use the convention `0^0 = 1` throughout; the corner cases of
//! the conditional success probability and the capture sums depend on it.
//! Values are returned raw (no clamping to `[0, 1]`), so oracle comparisons
//! see exactly what the formulas produce.

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Above this many packets the per-channel Binomial pmf is accumulated in
/// log space instead of by the multiplicative recurrence.
const LOG_SPACE_THRESHOLD: u64 = 1000;

/// Hard stop for the Poisson capture series, far beyond any practical load.
const MAX_POISSON_TERMS: u64 = 1_000_000;

/// Default additive tail tolerance for the Poisson capture series.
pub const DEFAULT_TAIL_TOL: f64 = 1e-15;

/// Channel count `N` and power-level count `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemConfig {
    n_channels: u32,
    n_levels: u32,
}

impl SystemConfig {
    pub fn new(n_channels: u32, n_levels: u32) -> Result<Self> {
        if n_channels == 0 {
            return Err(Error::domain("channel count must be at least 1"));
        }
        if n_levels == 0 {
            return Err(Error::domain("power-level count must be at least 1"));
        }
        Ok(SystemConfig {
            n_channels,
            n_levels,
        })
    }

    pub fn n_channels(&self) -> u32 {
        self.n_channels
    }

    pub fn n_levels(&self) -> u32 {
        self.n_levels
    }
}

/// Received-power targets `γ_1 > γ_2 > … > γ_L`, normalized to noise.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLevelSet {
    target_sinr: f64,
    levels: Vec<f64>,
}

impl PowerLevelSet {
    pub fn target_sinr(&self) -> f64 {
        self.target_sinr
    }

    /// Levels ordered strongest first.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

/// An operating point on a throughput curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadPoint {
    /// Poisson arrivals. For NOMA-RA the rate is per power level; for the
    /// MS-ALOHA baselines, which have no power dimension, it is per channel.
    Poisson { lambda: f64 },
    /// A fixed number of contending packets spread over all channels.
    Binomial { users: u64 },
}

impl LoadPoint {
    /// Expected packets per channel per slot: `λ·L` or `U/N`.
    pub fn offered_load(&self, cfg: &SystemConfig) -> f64 {
        match *self {
            LoadPoint::Poisson { lambda } => lambda * f64::from(cfg.n_levels),
            LoadPoint::Binomial { users } => users as f64 / f64::from(cfg.n_channels),
        }
    }
}

/// What a capture receiver does with a packet that is alone on its channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CaptureSemantics {
    /// A lone packet is always received, whatever level it picked.
    #[default]
    Physical,
    /// Reproduces the printed capture sums, where a lone packet on the
    /// weakest level is lost: single-packet success probability `(L-1)/L`.
    PaperFormula,
}

#[inline]
fn powu(base: f64, exp: u64) -> f64 {
    if exp <= i32::MAX as u64 {
        base.powi(exp as i32)
    } else {
        base.powf(exp as f64)
    }
}

/// `n (n-1) … (n-k+1)`.
fn falling(n: u64, k: u64) -> f64 {
    (0..k).map(|j| (n - j) as f64).product()
}

fn binom(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Probability that exactly the lowest `span` levels (a contiguous block
/// starting at the collision level) receive `rest` packets with at least two
/// on the block's top level, each of the `rest` packets having picked any of
/// the `L` levels. Equals `(span^r - (span-1)^r - r (span-1)^(r-1)) / L^r`.
fn collision_block_prob(span: u64, rest: u64, l: u64) -> f64 {
    if rest < 2 || span == 0 {
        return 0.0;
    }
    let lf = l as f64;
    let hi = span as f64 / lf;
    let lo = (span - 1) as f64 / lf;
    powu(hi, rest) - powu(lo, rest) - (rest as f64 / lf) * powu(lo, rest - 1)
}

/// `P(S_i = s_i | U_i = u_i)` for one channel with `l` power levels.
///
/// The collision branch (`s_i < min(l, u_i)`) sums over the number `g` of
/// idle levels between the successful packets and the first power
/// collision. `s_i = 0` is allowed there and gives the probability that the
/// strongest occupied level already collides.
pub fn cond_success_prob(u_i: u64, s_i: u64, l: u32) -> Result<f64> {
    if u_i == 0 {
        return Err(Error::domain(
            "packet count on the channel must be at least 1",
        ));
    }
    if l == 0 {
        return Err(Error::domain("level count must be at least 1"));
    }
    if s_i > u_i {
        return Err(Error::domain(format!(
            "success count {s_i} exceeds packet count {u_i}"
        )));
    }
    let l = u64::from(l);
    let lf = l as f64;

    if s_i < l.min(u_i) {
        let rest = u_i - s_i;
        let lead = falling(u_i, s_i) / powu(lf, s_i);
        let p = (0..=(l - 1 - s_i))
            .map(|g| {
                let span = l - s_i - g;
                lead * binom(s_i + g, s_i) * collision_block_prob(span, rest, l)
            })
            .sum();
        Ok(p)
    } else if s_i == u_i && u_i <= l {
        // u!·C(l, u) / l^u = l(l-1)…(l-u+1) / l^u
        Ok((0..u_i).map(|j| (l - j) as f64 / lf).product())
    } else {
        Ok(0.0)
    }
}

/// `E[S_i | U_i]`, the expected number of decoded packets on one channel.
pub fn cond_throughput(u_i: u64, l: u32) -> Result<f64> {
    if u_i == 0 {
        return Err(Error::domain(
            "packet count on the channel must be at least 1",
        ));
    }
    if l == 0 {
        return Err(Error::domain("level count must be at least 1"));
    }
    let top = u_i.min(u64::from(l));
    (1..=top).try_fold(0.0, |acc, s| {
        Ok(acc + s as f64 * cond_success_prob(u_i, s, l)?)
    })
}

/// Distribution of the packet count on one channel when `u` packets pick
/// one of `n` channels uniformly: entry `k` is `Binom(k; u, 1/n)`.
pub fn channel_occupancy_pmf(u: u64, n: u32) -> Vec<f64> {
    let len = u as usize + 1;
    if n == 1 {
        let mut pmf = vec![0.0; len];
        pmf[u as usize] = 1.0;
        return pmf;
    }
    let nf = f64::from(n);
    if u <= LOG_SPACE_THRESHOLD {
        let mut pmf = Vec::with_capacity(len);
        let mut p = powu(1.0 - 1.0 / nf, u);
        pmf.push(p);
        for k in 0..u {
            p *= (u - k) as f64 / ((k + 1) as f64 * (nf - 1.0));
            pmf.push(p);
        }
        pmf
    } else {
        let ln_p = -nf.ln();
        let ln_q = (1.0 - 1.0 / nf).ln();
        (0..=u)
            .map(|k| (ln_binomial(u, k) + k as f64 * ln_p + (u - k) as f64 * ln_q).exp())
            .collect()
    }
}

/// Expected decoded packets per slot when `u` packets contend over `N`
/// channels and `L` levels.
pub fn throughput_binomial(u: u64, cfg: &SystemConfig) -> f64 {
    if u == 0 {
        return 0.0;
    }
    let pmf = channel_occupancy_pmf(u, cfg.n_channels);
    let per_channel: f64 = (1..=u)
        .filter(|&k| pmf[k as usize] > 0.0)
        .map(|k| {
            let e = cond_throughput(k, cfg.n_levels).expect("k >= 1 and L >= 1");
            e * pmf[k as usize]
        })
        .sum();
    f64::from(cfg.n_channels) * per_channel
}

/// Expected decoded packets per slot when every (channel, level) pair
/// receives Poisson(`lambda`) packets.
pub fn throughput_poisson(lambda: f64, cfg: &SystemConfig) -> f64 {
    assert!(lambda >= 0.0, "arrival rate must be non-negative");
    let q0 = (-lambda).exp();
    let q1 = lambda * q0;
    let no_collision = q0 + q1;
    let per_channel: f64 = (0..cfg.n_levels)
        .map(|i| q1 * no_collision.powi(i as i32))
        .sum();
    f64::from(cfg.n_channels) * per_channel
}

/// MS-ALOHA without capture: `U(1-1/N)^(U-1)` or `Nλe^(-λ)` with `λ` per
/// channel. The level count of `cfg` is ignored.
pub fn throughput_msaloha(load: LoadPoint, cfg: &SystemConfig) -> f64 {
    let nf = f64::from(cfg.n_channels);
    match load {
        LoadPoint::Binomial { users: 0 } => 0.0,
        LoadPoint::Binomial { users } => users as f64 * powu(1.0 - 1.0 / nf, users - 1),
        LoadPoint::Poisson { lambda } => {
            assert!(lambda >= 0.0, "arrival rate must be non-negative");
            nf * lambda * (-lambda).exp()
        }
    }
}

/// Probability that a capture receiver decodes one of `k` packets sharing a
/// channel with `l` levels.
pub fn capture_success_prob(k: u64, l: u32, semantics: CaptureSemantics) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let lf = f64::from(l);
    // k · Σ_{g=0}^{L-2} (L-g-1)^(k-1) / L^k, written as (k/L) Σ_{j=1}^{L-1} (j/L)^(k-1)
    let printed: f64 =
        (1..l).map(|j| powu(f64::from(j) / lf, k - 1)).sum::<f64>() * (k as f64 / lf);
    match semantics {
        CaptureSemantics::PaperFormula => printed,
        // The j = 0 term the printed sum omits: 0^(k-1), nonzero only for k = 1.
        CaptureSemantics::Physical if k == 1 => printed + 1.0 / lf,
        CaptureSemantics::Physical => printed,
    }
}

/// MS-ALOHA with capture, `u` packets over `N` channels, as printed.
pub fn capture_throughput_binomial(u: u64, cfg: &SystemConfig) -> f64 {
    capture_throughput_binomial_with(u, cfg, CaptureSemantics::PaperFormula)
}

pub fn capture_throughput_binomial_with(
    u: u64,
    cfg: &SystemConfig,
    semantics: CaptureSemantics,
) -> f64 {
    if u == 0 {
        return 0.0;
    }
    let pmf = channel_occupancy_pmf(u, cfg.n_channels);
    let per_channel: f64 = (1..=u)
        .map(|k| capture_success_prob(k, cfg.n_levels, semantics) * pmf[k as usize])
        .sum();
    f64::from(cfg.n_channels) * per_channel
}

/// MS-ALOHA with capture under Poisson(`lambda`) packets per channel, as
/// printed. The series stops once a term is below `tail_tol` and the index
/// is past `λ + 10√(λ+1)`.
pub fn capture_throughput_poisson(lambda: f64, cfg: &SystemConfig, tail_tol: f64) -> f64 {
    capture_throughput_poisson_with(lambda, cfg, tail_tol, CaptureSemantics::PaperFormula)
}

pub fn capture_throughput_poisson_with(
    lambda: f64,
    cfg: &SystemConfig,
    tail_tol: f64,
    semantics: CaptureSemantics,
) -> f64 {
    assert!(lambda >= 0.0, "arrival rate must be non-negative");
    assert!(tail_tol > 0.0, "tail tolerance must be positive");
    if lambda == 0.0 {
        return 0.0;
    }
    let ln_lambda = lambda.ln();
    let past_mode = lambda + 10.0 * (lambda + 1.0).sqrt();
    let mut ln_pk = -lambda;
    let mut sum = 0.0;
    for k in 1..=MAX_POISSON_TERMS {
        ln_pk += ln_lambda - (k as f64).ln();
        let term = capture_success_prob(k, cfg.n_levels, semantics) * ln_pk.exp();
        sum += term;
        if term < tail_tol && k as f64 > past_mode {
            break;
        }
    }
    f64::from(cfg.n_channels) * sum
}

/// Probability that a channel is idle (an unoccupied level is seen before
/// decoding stops) when each level receives Poisson(`lambda`) packets.
pub fn idle_channel_prob(lambda: f64, l: u32) -> f64 {
    assert!(lambda >= 0.0, "arrival rate must be non-negative");
    assert!(l >= 1, "level count must be at least 1");
    let q0 = (-lambda).exp();
    let q1 = lambda * q0;
    let b = q0 + q1;
    let li = l as i32;
    let no_collision = b.powi(li) - q1.powi(li);
    let first_collision_below: f64 = (2..=li).map(|i| b.powi(i - 1) - q1.powi(i - 1)).sum();
    no_collision + (1.0 - b) * first_collision_below
}

/// Probability that a channel carrying exactly `m` packets, each on a
/// uniformly chosen level out of `l`, is idle.
pub fn idle_prob_given_packets(m: u64, l: u32) -> f64 {
    let l = u64::from(l);
    let lf = l as f64;
    // No collision at all: at most one packet per level, idle iff m < L.
    let mut p = if m < l {
        (0..m).map(|j| (l - j) as f64 / lf).product()
    } else {
        0.0
    };
    // First collision on level j+1, with k singletons and at least one
    // empty level among the j levels above it.
    for j in 1..l {
        for k in 0..j.min(m + 1) {
            let lead = falling(m, k) * binom(j, k) / powu(lf, k);
            p += lead * collision_block_prob(l - j, m - k, l);
        }
    }
    p
}

/// Idle-channel probability when `u` packets contend over `N` channels and
/// `L` levels (the finite-population counterpart of [`idle_channel_prob`]).
pub fn idle_channel_prob_binomial(u: u64, cfg: &SystemConfig) -> f64 {
    let pmf = channel_occupancy_pmf(u, cfg.n_channels);
    pmf.iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(k, &w)| w * idle_prob_given_packets(k as u64, cfg.n_levels))
        .sum()
}

/// Received-power targets `γ_l = Γ(Γ+1)^(L-l)` for `l = 1..L`.
pub fn power_levels(gamma: f64, l: u32) -> Result<PowerLevelSet> {
    if gamma.is_nan() || gamma <= 0.0 || gamma.is_infinite() {
        return Err(Error::domain("target SINR must be positive and finite"));
    }
    if l == 0 {
        return Err(Error::domain("level count must be at least 1"));
    }
    let levels = (1..=l)
        .map(|level| gamma * (gamma + 1.0).powi((l - level) as i32))
        .collect();
    Ok(PowerLevelSet {
        target_sinr: gamma,
        levels,
    })
}
