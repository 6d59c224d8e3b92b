//! Optimal per-level load, maximum throughput, gain over MS-ALOHA, and the
//! tabulated throughput curve the barring controller inverts.

use std::io::Write;

use crate::analytic::{self, SystemConfig};
use crate::error::{Error, Result};

/// Bisection bracket for the per-level optimum; valid for `L <= 16`.
pub const LAMBDA_BRACKET: (f64, f64) = (1e-6, 10.0);

pub const DEFAULT_TOL: f64 = 1e-9;

pub const DEFAULT_U_MAX: u64 = 500;

/// Offset used for the post-solve local-maximum check. Much larger than the
/// solver tolerance so the comparison is not lost in rounding.
const LOCAL_MAX_PROBE: f64 = 1e-4;

const MAX_BISECTION_STEPS: u32 = 200;

/// The load that maximizes Poisson throughput, with the quantities derived
/// from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalPoint {
    /// Optimal Poisson rate per power level.
    pub lambda_star: f64,
    /// `lambda_star * L`, packets per channel.
    pub channel_load_star: f64,
    /// Throughput at the optimum, summed over all `N` channels.
    pub max_throughput: f64,
    /// Idle-channel probability at `lambda_star` under per-level Poisson arrivals.
    pub idle_threshold: f64,
    /// Target active-user count `round(lambda_star * L * N)`.
    pub u_star: u64,
    /// Idle-channel probability with exactly `u_star` users spread over the
    /// `N` channels. This is the light/heavy threshold the barring
    /// controller compares against, since it serves a finite population.
    pub population_idle_threshold: f64,
}

impl OptimalPoint {
    pub fn normalized_max_throughput(&self, cfg: &SystemConfig) -> f64 {
        self.max_throughput / f64::from(cfg.n_channels())
    }
}

/// Derivative of the Poisson throughput with respect to the per-level rate.
pub fn throughput_derivative(lambda: f64, cfg: &SystemConfig) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::domain(
            "derivative is evaluated for positive rates only (its limit at 0 is N*L)",
        ));
    }
    let e2 = (-2.0 * lambda).exp();
    let base = (-lambda).exp() * (1.0 + lambda);
    let sum: f64 = (1..=cfg.n_levels() as i32)
        .map(|i| (e2 - f64::from(i) * lambda * lambda * e2) * base.powi(i - 2))
        .sum();
    Ok(f64::from(cfg.n_channels()) * sum)
}

/// Solves for the per-level rate at which the Poisson throughput derivative
/// vanishes, by bisection on [`LAMBDA_BRACKET`].
pub fn optimal_lambda(cfg: &SystemConfig, tol: f64) -> Result<OptimalPoint> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::domain("tolerance must be positive"));
    }
    let (mut lo, mut hi) = LAMBDA_BRACKET;
    let f_lo = throughput_derivative(lo, cfg)?;
    let f_hi = throughput_derivative(hi, cfg)?;
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::internal(format!(
            "no sign change of the throughput derivative on [{lo}, {hi}] (L = {})",
            cfg.n_levels()
        )));
    }
    let mut steps = 0;
    while hi - lo >= tol && steps < MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let d = throughput_derivative(mid, cfg)?;
        if d > 0.0 {
            lo = mid;
        } else if d < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
        }
        steps += 1;
    }
    let lambda_star = 0.5 * (lo + hi);

    let max_throughput = analytic::throughput_poisson(lambda_star, cfg);
    let left = analytic::throughput_poisson((lambda_star - LOCAL_MAX_PROBE).max(0.0), cfg);
    let right = analytic::throughput_poisson(lambda_star + LOCAL_MAX_PROBE, cfg);
    if left > max_throughput || right > max_throughput {
        return Err(Error::internal(format!(
            "λ* = {lambda_star} is not a local maximum of the throughput"
        )));
    }

    let l = f64::from(cfg.n_levels());
    let u_star = (lambda_star * l * f64::from(cfg.n_channels())).round() as u64;
    Ok(OptimalPoint {
        lambda_star,
        channel_load_star: lambda_star * l,
        max_throughput,
        idle_threshold: analytic::idle_channel_prob(lambda_star, cfg.n_levels()),
        u_star,
        population_idle_threshold: analytic::idle_channel_prob_binomial(u_star, cfg),
    })
}

/// Ratio of the NOMA-RA per-channel maximum throughput to MS-ALOHA's `e^-1`.
pub fn max_gain_ratio(l: u32) -> f64 {
    let cfg = SystemConfig::new(1, l).expect("level count must be at least 1");
    let opt = optimal_lambda(&cfg, 1e-12).expect("bracket holds for the supported level counts");
    opt.max_throughput / (-1.0f64).exp()
}

/// Expected throughput for `u = 1..=u_max` contending users.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputMatrix {
    cfg: SystemConfig,
    values: Vec<f64>,
    peak: usize,
}

impl ThroughputMatrix {
    pub fn cfg(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn u_max(&self) -> u64 {
        self.values.len() as u64
    }

    /// Tabulated throughput for `u` users, `None` outside `1..=u_max`.
    pub fn get(&self, u: u64) -> Option<f64> {
        if u == 0 {
            return None;
        }
        self.values.get(u as usize - 1).copied()
    }

    /// `(u, t(u))` pairs in increasing `u`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &t)| (i as u64 + 1, t))
    }

    /// User count with the largest tabulated throughput (smallest on ties).
    pub fn peak_users(&self) -> u64 {
        self.peak as u64 + 1
    }

    pub fn peak_value(&self) -> f64 {
        self.values[self.peak]
    }

    /// Writes the table as CSV with header `u,t`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["u", "t"])?;
        for (u, t) in self.iter() {
            w.write_record([u.to_string(), t.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn build_throughput_matrix(cfg: &SystemConfig, u_max: u64) -> Result<ThroughputMatrix> {
    if u_max == 0 {
        return Err(Error::domain("u_max must be at least 1"));
    }
    let values: Vec<f64> = (1..=u_max)
        .map(|u| analytic::throughput_binomial(u, cfg))
        .collect();
    let peak = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &t)| if t > values[best] { i } else { best });
    let rising = values[..=peak].windows(2).all(|w| w[0] <= w[1]);
    let falling = values[peak..].windows(2).all(|w| w[0] >= w[1]);
    if !(rising && falling) {
        return Err(Error::internal(format!(
            "tabulated throughput is not unimodal for N = {}, L = {}",
            cfg.n_channels(),
            cfg.n_levels()
        )));
    }
    Ok(ThroughputMatrix {
        cfg: *cfg,
        values,
        peak,
    })
}

/// The two user counts consistent with an observed throughput: one on the
/// rising side of the curve and one on the falling side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadEstimatePair {
    pub u_light: u64,
    pub u_heavy: u64,
}

/// Matches a normalized throughput observation against the table.
///
/// Each side picks the entry nearest to `t_obs * N` in absolute difference,
/// ties going to the entry closer to the peak.
pub fn invert_throughput(matrix: &ThroughputMatrix, t_obs: f64) -> Result<LoadEstimatePair> {
    if t_obs.is_nan() || t_obs < 0.0 {
        return Err(Error::domain("observed throughput must be non-negative"));
    }
    let target = t_obs * f64::from(matrix.cfg.n_channels());
    let peak = matrix.peak;
    let peak_users = matrix.peak_users();
    if target > matrix.values[peak] {
        return Ok(LoadEstimatePair {
            u_light: peak_users,
            u_heavy: peak_users,
        });
    }

    // Rising side, scanned away from the peak so ties keep the first hit.
    let mut light = peak;
    for i in (0..peak).rev() {
        if (matrix.values[i] - target).abs() < (matrix.values[light] - target).abs() {
            light = i;
        }
    }

    let mut heavy = peak;
    for i in peak + 1..matrix.values.len() {
        if (matrix.values[i] - target).abs() < (matrix.values[heavy] - target).abs() {
            heavy = i;
        }
    }
    let last = matrix.values.len() - 1;
    if matrix.values[last] > target {
        heavy = last;
    }

    Ok(LoadEstimatePair {
        u_light: light as u64 + 1,
        u_heavy: heavy as u64 + 1,
    })
}
