//! Adaptive user barring.
//!
//! The base station picks an access probability once per period of `Λ`
//! slots. Each user flips one coin at the start of the period and, if it
//! joins, contends in every slot of that period. After the period the
//! controller estimates the active population from the observed throughput
//! and idle-channel frequency and rescales the access probability toward
//! the optimal population `U*`.

use std::io::Write;

use rand::Rng;
use serde::Deserialize;

use crate::analytic::SystemConfig;
use crate::error::{Error, Result};
use crate::optimizer::{self, ThroughputMatrix};
use crate::simulator::{self, ArrivalModel, Scheme, SlotEngine};

pub use crate::optimizer::LoadEstimatePair;

#[derive(Debug, Clone)]
pub struct BarringState {
    pub p_access: f64,
    pub period_slots: u64,
    pub u_star: u64,
    pub idle_threshold: f64,
    pub matrix: ThroughputMatrix,
}

impl BarringState {
    /// Controller for `cfg` with `p_access = 1`, `U* = round(λ*·L·N)` and the
    /// idle threshold evaluated with exactly `U*` users.
    pub fn new(cfg: &SystemConfig, period_slots: u64, u_max: u64) -> Result<Self> {
        if period_slots == 0 {
            return Err(Error::domain("period must span at least one slot"));
        }
        let opt = optimizer::optimal_lambda(cfg, optimizer::DEFAULT_TOL)?;
        let matrix = optimizer::build_throughput_matrix(cfg, u_max)?;
        Ok(BarringState {
            p_access: 1.0,
            period_slots,
            u_star: opt.u_star.max(1),
            idle_threshold: opt.population_idle_threshold,
            matrix,
        })
    }

    /// Applies one update in place and returns the decision taken.
    pub fn update(&mut self, obs: &PeriodObservation) -> Result<UpdateDecision> {
        let decision = decide(self, obs)?;
        self.p_access = decision.p_access;
        Ok(decision)
    }
}

/// What the base station measured over one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodObservation {
    /// Successes per channel per slot over the period.
    pub t_insta: f64,
    /// Fraction of (channel, slot) pairs flagged idle.
    pub p_idle_insta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateDecision {
    pub estimates: LoadEstimatePair,
    pub light_load: bool,
    pub p_access: f64,
}

fn decide(state: &BarringState, obs: &PeriodObservation) -> Result<UpdateDecision> {
    let estimates = optimizer::invert_throughput(&state.matrix, obs.t_insta)?;
    // ">=" sends the boundary case to the light-load branch
    let light_load = obs.p_idle_insta >= state.idle_threshold;
    let estimate = if light_load {
        estimates.u_light
    } else {
        estimates.u_heavy
    };
    if estimate == 0 {
        return Err(Error::internal("load estimate of zero users"));
    }
    let p_access = (state.p_access * state.u_star as f64 / estimate as f64).min(1.0);
    Ok(UpdateDecision {
        estimates,
        light_load,
        p_access,
    })
}

/// Access probability for the next period.
pub fn classify_and_update(state: &BarringState, obs: &PeriodObservation) -> Result<f64> {
    decide(state, obs).map(|d| d.p_access)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleBlock {
    pub slots: u64,
    pub users: u64,
}

/// Piecewise-constant total user population, blocks applied back to back
/// from slot 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserSchedule {
    blocks: Vec<ScheduleBlock>,
}

impl UserSchedule {
    pub fn new(blocks: Vec<ScheduleBlock>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Config(
                "schedule: must contain at least one block".into(),
            ));
        }
        if let Some(i) = blocks.iter().position(|b| b.slots == 0) {
            return Err(Error::Config(format!(
                "schedule[{i}].slots: must be positive"
            )));
        }
        Ok(UserSchedule { blocks })
    }

    /// Four blocks of `50Λ` slots with 20, 50, 80 and 110 users.
    pub fn table_one(period_slots: u64) -> Self {
        let blocks = [20, 50, 80, 110]
            .into_iter()
            .map(|users| ScheduleBlock {
                slots: 50 * period_slots,
                users,
            })
            .collect();
        UserSchedule { blocks }
    }

    pub fn blocks(&self) -> &[ScheduleBlock] {
        &self.blocks
    }

    pub fn total_slots(&self) -> u64 {
        self.blocks.iter().map(|b| b.slots).sum()
    }

    /// Population in effect at `slot`, `None` past the end of the schedule.
    pub fn users_at(&self, slot: u64) -> Option<u64> {
        let mut start = 0;
        for b in &self.blocks {
            if slot < start + b.slots {
                return Some(b.users);
            }
            start += b.slots;
        }
        None
    }
}

/// One row of the scenario time series. `p_access` is the probability that
/// was in force during the period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodRecord {
    pub period: u64,
    pub start_slot: u64,
    pub users_total: u64,
    pub users_active: u64,
    pub t_insta: f64,
    pub p_idle_insta: f64,
    pub p_access: f64,
}

/// Runs the closed loop over the whole schedule. The population of a period
/// is the one in effect at its first slot; a trailing partial period runs
/// for the remaining slots only.
pub fn run_barring_scenario(
    cfg: &SystemConfig,
    schedule: &UserSchedule,
    period_slots: u64,
    u_max: u64,
    seed: u64,
    barring_enabled: bool,
) -> Result<Vec<PeriodRecord>> {
    let mut state = BarringState::new(cfg, period_slots, u_max)?;
    let mut rng = simulator::seeded_rng(seed);
    let total = schedule.total_slots();
    let n = f64::from(cfg.n_channels());
    let mut records = Vec::with_capacity(total.div_ceil(period_slots) as usize);

    let mut start = 0;
    let mut period = 0;
    while start < total {
        let users_total = schedule
            .users_at(start)
            .expect("start is inside the schedule");
        let len = period_slots.min(total - start);
        let p_access = state.p_access;
        let users_active = (0..users_total)
            .filter(|_| rng.random_bool(p_access))
            .count() as u64;

        let arrivals = ArrivalModel::BernoulliUsers {
            users: users_active,
            p_access: 1.0,
        };
        let mut engine = SlotEngine::new(*cfg, arrivals, Scheme::NomaRa)?;
        let (mut successes, mut idle) = (0u64, 0u64);
        for _ in 0..len {
            let slot = engine.run_slot(&mut rng);
            successes += slot.total_successes;
            idle += slot.idle_channels() as u64;
        }
        let obs = PeriodObservation {
            t_insta: successes as f64 / n / len as f64,
            p_idle_insta: idle as f64 / n / len as f64,
        };
        records.push(PeriodRecord {
            period,
            start_slot: start,
            users_total,
            users_active,
            t_insta: obs.t_insta,
            p_idle_insta: obs.p_idle_insta,
            p_access,
        });
        if barring_enabled {
            state.update(&obs)?;
        }
        start += len;
        period += 1;
    }
    Ok(records)
}

/// JSON scenario description.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: u32,
    pub l: u32,
    pub period_slots: u64,
    pub u_max: u64,
    pub seed: u64,
    pub barring: bool,
    pub schedule: Vec<ScheduleBlock>,
}

impl ScenarioConfig {
    /// Parses and validates; errors name the offending field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("{path}: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("n", u64::from(self.n)),
            ("l", u64::from(self.l)),
            ("period_slots", self.period_slots),
            ("u_max", self.u_max),
        ];
        if let Some((field, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{field}: must be positive")));
        }
        UserSchedule::new(self.schedule.clone())?;
        Ok(())
    }

    pub fn system(&self) -> Result<SystemConfig> {
        SystemConfig::new(self.n, self.l)
    }

    pub fn run(&self) -> Result<Vec<PeriodRecord>> {
        let schedule = UserSchedule::new(self.schedule.clone())?;
        run_barring_scenario(
            &self.system()?,
            &schedule,
            self.period_slots,
            self.u_max,
            self.seed,
            self.barring,
        )
    }
}

pub fn write_records_csv<W: Write>(records: &[PeriodRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "period",
        "start_slot",
        "users_total",
        "users_active",
        "t_insta",
        "p_idle_insta",
        "p_access",
    ])?;
    for r in records {
        w.write_record([
            r.period.to_string(),
            r.start_slot.to_string(),
            r.users_total.to_string(),
            r.users_active.to_string(),
            r.t_insta.to_string(),
            r.p_idle_insta.to_string(),
            r.p_access.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
