//! C ABI over `noma-ra`.
//!
//! Every entry point returns a [`NomaStatus`] and writes results through out
//! pointers. On failure a message is available from
//! [`noma_last_error_message`] on the same thread. Panics are caught at the
//! boundary and reported as [`NomaStatus::Panic`].
//!
//! # Safety
//!
//! Every pointer argument must be null or valid for the access its type
//! implies: out pointers writable, handles live and obtained from the
//! matching `_new` function, strings NUL-terminated. Null is always detected
//! and reported as [`NomaStatus::NullPointer`] unless documented as optional.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use noma_ra::analytic::{self, CaptureSemantics, LoadPoint, SystemConfig};
use noma_ra::barring::{self, BarringState, PeriodObservation, ScenarioConfig};
use noma_ra::optimizer::{self, ThroughputMatrix};
use noma_ra::simulator::{self, ArrivalModel, Scheme};
use noma_ra::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NomaStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Internal = 3,
    Panic = 4,
}

pub const NOMA_SCHEME_NOMA_RA: u32 = 0;
pub const NOMA_SCHEME_MS_ALOHA: u32 = 1;
pub const NOMA_SCHEME_CAPTURE_PHYSICAL: u32 = 2;
pub const NOMA_SCHEME_CAPTURE_PAPER: u32 = 3;

pub const NOMA_CAPTURE_PHYSICAL: u32 = 0;
pub const NOMA_CAPTURE_PAPER: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NomaOptimalPoint {
    pub lambda_star: f64,
    pub channel_load_star: f64,
    pub max_throughput: f64,
    pub max_norm_throughput: f64,
    /// Idle probability at the optimum under per-level Poisson arrivals.
    pub idle_threshold: f64,
    /// Idle probability with exactly `u_star` users; used by the controller.
    pub population_idle_threshold: f64,
    pub u_star: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NomaSimStats {
    pub slots: u64,
    pub mean_normalized_throughput: f64,
    pub idle_channel_frequency: f64,
    pub std_error: f64,
    pub idle_std_error: f64,
}

/// Opaque table of binomial throughput values for `U = 1..=u_max`.
pub struct NomaThroughputMatrix {
    inner: ThroughputMatrix,
}

/// Opaque closed-loop barring controller.
pub struct NomaBarringController {
    inner: BarringState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(NomaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Internal(_) => NomaStatus::Internal,
            Error::Domain(_) | Error::Config(_) | Error::Io(_) => NomaStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(NomaStatus::InvalidArgument, msg.into())
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NomaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            NomaStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("panic: {msg}"));
            NomaStatus::Panic
        }
    }
}

fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller promises `p` is either null or valid for writes.
    unsafe { p.as_mut() }.ok_or_else(|| Failure(NomaStatus::NullPointer, format!("{name} is null")))
}

fn in_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: the caller promises `p` is either null or a live handle.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(NomaStatus::NullPointer, format!("{name} is null")))
}

fn system(n: u32, l: u32) -> Result<SystemConfig, Failure> {
    Ok(SystemConfig::new(n, l)?)
}

fn rate(x: f64, name: &str) -> Result<f64, Failure> {
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(invalid(format!("{name} must be finite and non-negative")))
    }
}

fn semantics(code: u32) -> Result<CaptureSemantics, Failure> {
    match code {
        NOMA_CAPTURE_PHYSICAL => Ok(CaptureSemantics::Physical),
        NOMA_CAPTURE_PAPER => Ok(CaptureSemantics::PaperFormula),
        _ => Err(invalid(format!("unknown capture semantics {code}"))),
    }
}

fn scheme(code: u32) -> Result<Scheme, Failure> {
    match code {
        NOMA_SCHEME_NOMA_RA => Ok(Scheme::NomaRa),
        NOMA_SCHEME_MS_ALOHA => Ok(Scheme::MsAloha),
        NOMA_SCHEME_CAPTURE_PHYSICAL => Ok(Scheme::MsAlohaCapture(CaptureSemantics::Physical)),
        NOMA_SCHEME_CAPTURE_PAPER => Ok(Scheme::MsAlohaCapture(CaptureSemantics::PaperFormula)),
        _ => Err(invalid(format!("unknown scheme {code}"))),
    }
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn noma_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Probability that `s` of `u` packets sharing one channel of `l` levels are decoded.
#[no_mangle]
pub unsafe extern "C" fn noma_cond_success_prob(
    u: u64,
    s: u64,
    l: u32,
    out: *mut f64,
) -> NomaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = analytic::cond_success_prob(u, s, l)?;
        Ok(())
    })
}

/// Expected successes with `users` users over `n` channels and `l` levels.
#[no_mangle]
pub unsafe extern "C" fn noma_throughput_binomial(
    n: u32,
    l: u32,
    users: u64,
    out: *mut f64,
) -> NomaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = analytic::throughput_binomial(users, &system(n, l)?);
        Ok(())
    })
}

/// Expected successes with Poisson(`lambda`) packets on every channel and level.
#[no_mangle]
pub unsafe extern "C" fn noma_throughput_poisson(
    n: u32,
    l: u32,
    lambda: f64,
    out: *mut f64,
) -> NomaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = analytic::throughput_poisson(rate(lambda, "lambda")?, &system(n, l)?);
        Ok(())
    })
}

/// MS-ALOHA over `n` channels with Poisson(`load`) packets per channel.
#[no_mangle]
pub unsafe extern "C" fn noma_throughput_msaloha_poisson(
    n: u32,
    load: f64,
    out: *mut f64,
) -> NomaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let lambda = rate(load, "load")?;
        *out = analytic::throughput_msaloha(LoadPoint::Poisson { lambda }, &system(n, 1)?);
        Ok(())
    })
}

/// MS-ALOHA over `n` channels with `users` users.
#[no_mangle]
pub unsafe extern "C" fn noma_throughput_msaloha_binomial(
    n: u32,
    users: u64,
    out: *mut f64,
) -> NomaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = analytic::throughput_msaloha(LoadPoint::Binomial { users }, &system(n, 1)?);
        Ok(())
    })
}

/// MS-ALOHA with power capture, Poisson(`load`) packets per channel.
#[no_mangle]
pub unsafe extern "C" fn noma_capture_throughput_poisson(
    n: u32,
    l: u32,
    load: f64,
    capture_semantics: u32,
    out: *mut f64,
) -> NomaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = analytic::capture_throughput_poisson_with(
            rate(load, "load")?,
            &system(n, l)?,
            analytic::DEFAULT_TAIL_TOL,
            semantics(capture_semantics)?,
        );
        Ok(())
    })
}

/// MS-ALOHA with power capture and `users` users.
#[no_mangle]
pub unsafe extern "C" fn noma_capture_throughput_binomial(
    n: u32,
    l: u32,
    users: u64,
    capture_semantics: u32,
    out: *mut f64,
) -> NomaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = analytic::capture_throughput_binomial_with(
            users,
            &system(n, l)?,
            semantics(capture_semantics)?,
        );
        Ok(())
    })
}

/// Idle-channel probability with Poisson(`lambda`) packets per level.
#[no_mangle]
pub unsafe extern "C" fn noma_idle_channel_prob(lambda: f64, l: u32, out: *mut f64) -> NomaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        system(1, l)?;
        *out = analytic::idle_channel_prob(rate(lambda, "lambda")?, l);
        Ok(())
    })
}

/// Idle-channel probability with exactly `users` users.
#[no_mangle]
pub unsafe extern "C" fn noma_idle_channel_prob_binomial(
    n: u32,
    l: u32,
    users: u64,
    out: *mut f64,
) -> NomaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = analytic::idle_channel_prob_binomial(users, &system(n, l)?);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn noma_optimal_lambda(
    n: u32,
    l: u32,
    tol: f64,
    out: *mut NomaOptimalPoint,
) -> NomaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cfg = system(n, l)?;
        let opt = optimizer::optimal_lambda(&cfg, tol)?;
        *out = NomaOptimalPoint {
            lambda_star: opt.lambda_star,
            channel_load_star: opt.channel_load_star,
            max_throughput: opt.max_throughput,
            max_norm_throughput: opt.normalized_max_throughput(&cfg),
            idle_threshold: opt.idle_threshold,
            population_idle_threshold: opt.population_idle_threshold,
            u_star: opt.u_star,
        };
        Ok(())
    })
}

/// Peak throughput with `l` levels relative to single-level MS-ALOHA.
#[no_mangle]
pub unsafe extern "C" fn noma_max_gain_ratio(l: u32, out: *mut f64) -> NomaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        system(1, l)?;
        *out = optimizer::max_gain_ratio(l);
        Ok(())
    })
}

fn simulate(
    n: u32,
    l: u32,
    scheme_code: u32,
    arrivals: ArrivalModel,
    slots: u64,
    seed: u64,
    out: *mut NomaSimStats,
) -> NomaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let s = simulator::run_fixed_load(
            &system(n, l)?,
            &arrivals,
            scheme(scheme_code)?,
            slots,
            seed,
        )?;
        *out = NomaSimStats {
            slots: s.slots,
            mean_normalized_throughput: s.mean_normalized_throughput,
            idle_channel_frequency: s.idle_channel_frequency,
            std_error: s.std_error,
            idle_std_error: s.idle_std_error,
        };
        Ok(())
    })
}

/// Seeded Monte Carlo run with Poisson(`lambda`) packets per channel and level.
#[no_mangle]
pub unsafe extern "C" fn noma_simulate_poisson(
    n: u32,
    l: u32,
    scheme: u32,
    lambda: f64,
    slots: u64,
    seed: u64,
    out: *mut NomaSimStats,
) -> NomaStatus {
    simulate(
        n,
        l,
        scheme,
        ArrivalModel::PoissonPerLevel { lambda },
        slots,
        seed,
        out,
    )
}

/// Seeded Monte Carlo run with `users` users each transmitting with `p_access`.
#[no_mangle]
pub unsafe extern "C" fn noma_simulate_users(
    n: u32,
    l: u32,
    scheme: u32,
    users: u64,
    p_access: f64,
    slots: u64,
    seed: u64,
    out: *mut NomaSimStats,
) -> NomaStatus {
    simulate(
        n,
        l,
        scheme,
        ArrivalModel::BernoulliUsers { users, p_access },
        slots,
        seed,
        out,
    )
}

#[no_mangle]
pub unsafe extern "C" fn noma_matrix_new(
    n: u32,
    l: u32,
    u_max: u64,
    out: *mut *mut NomaThroughputMatrix,
) -> NomaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let inner = optimizer::build_throughput_matrix(&system(n, l)?, u_max)?;
        *out = Box::into_raw(Box::new(NomaThroughputMatrix { inner }));
        Ok(())
    })
}

/// Releases a matrix. Null is ignored; freeing twice is undefined.
#[no_mangle]
pub unsafe extern "C" fn noma_matrix_free(m: *mut NomaThroughputMatrix) {
    if !m.is_null() {
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Largest tabulated user count; entries cover `1..=u_max`.
#[no_mangle]
pub unsafe extern "C" fn noma_matrix_u_max(
    m: *const NomaThroughputMatrix,
    out: *mut u64,
) -> NomaStatus {
    guard(|| {
        let m = in_ref(m, "matrix")?;
        *out_ref(out, "out")? = m.inner.u_max();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn noma_matrix_value(
    m: *const NomaThroughputMatrix,
    users: u64,
    out: *mut f64,
) -> NomaStatus {
    guard(|| {
        let m = in_ref(m, "matrix")?;
        let out = out_ref(out, "out")?;
        *out = m
            .inner
            .get(users)
            .ok_or_else(|| invalid(format!("users {users} outside 1..={}", m.inner.u_max())))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn noma_matrix_peak_users(
    m: *const NomaThroughputMatrix,
    out: *mut u64,
) -> NomaStatus {
    guard(|| {
        let m = in_ref(m, "matrix")?;
        *out_ref(out, "out")? = m.inner.peak_users();
        Ok(())
    })
}

/// Light- and heavy-load user counts matching a normalized throughput.
#[no_mangle]
pub unsafe extern "C" fn noma_matrix_invert(
    m: *const NomaThroughputMatrix,
    t_obs: f64,
    u_light: *mut u64,
    u_heavy: *mut u64,
) -> NomaStatus {
    guard(|| {
        let m = in_ref(m, "matrix")?;
        let light = out_ref(u_light, "u_light")?;
        let heavy = out_ref(u_heavy, "u_heavy")?;
        let est = optimizer::invert_throughput(&m.inner, t_obs)?;
        *light = est.u_light;
        *heavy = est.u_heavy;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn noma_barring_new(
    n: u32,
    l: u32,
    period_slots: u64,
    u_max: u64,
    out: *mut *mut NomaBarringController,
) -> NomaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let inner = BarringState::new(&system(n, l)?, period_slots, u_max)?;
        *out = Box::into_raw(Box::new(NomaBarringController { inner }));
        Ok(())
    })
}

/// Releases a controller. Null is ignored; freeing twice is undefined.
#[no_mangle]
pub unsafe extern "C" fn noma_barring_free(c: *mut NomaBarringController) {
    if !c.is_null() {
        drop(unsafe { Box::from_raw(c) });
    }
}

#[no_mangle]
pub unsafe extern "C" fn noma_barring_p_access(
    c: *const NomaBarringController,
    out: *mut f64,
) -> NomaStatus {
    guard(|| {
        let c = in_ref(c, "controller")?;
        *out_ref(out, "out")? = c.inner.p_access;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn noma_barring_u_star(
    c: *const NomaBarringController,
    out: *mut u64,
) -> NomaStatus {
    guard(|| {
        let c = in_ref(c, "controller")?;
        *out_ref(out, "out")? = c.inner.u_star;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn noma_barring_idle_threshold(
    c: *const NomaBarringController,
    out: *mut f64,
) -> NomaStatus {
    guard(|| {
        let c = in_ref(c, "controller")?;
        *out_ref(out, "out")? = c.inner.idle_threshold;
        Ok(())
    })
}

/// Feeds one period's measurements and writes the new access probability.
/// `light_load` may be null.
#[no_mangle]
pub unsafe extern "C" fn noma_barring_update(
    c: *mut NomaBarringController,
    t_insta: f64,
    p_idle_insta: f64,
    p_access: *mut f64,
    light_load: *mut bool,
) -> NomaStatus {
    guard(|| {
        let c = out_ref(c, "controller")?;
        let p_out = out_ref(p_access, "p_access")?;
        if !(0.0..=1.0).contains(&p_idle_insta) {
            return Err(invalid("p_idle_insta must lie in [0, 1]"));
        }
        let d = c.inner.update(&PeriodObservation {
            t_insta,
            p_idle_insta,
        })?;
        *p_out = d.p_access;
        // SAFETY: optional out pointer, null or valid per the contract above.
        if let Some(flag) = unsafe { light_load.as_mut() } {
            *flag = d.light_load;
        }
        Ok(())
    })
}

/// Runs a JSON scenario and returns the per-period CSV. Release the string
/// with [`noma_string_free`].
#[no_mangle]
pub unsafe extern "C" fn noma_run_scenario_json(
    config_json: *const c_char,
    out_csv: *mut *mut c_char,
) -> NomaStatus {
    guard(|| {
        let out = out_ref(out_csv, "out_csv")?;
        if config_json.is_null() {
            return Err(Failure(
                NomaStatus::NullPointer,
                "config_json is null".into(),
            ));
        }
        // SAFETY: non-null and NUL-terminated per the contract above.
        let text = unsafe { CStr::from_ptr(config_json) }
            .to_str()
            .map_err(|_| invalid("config_json is not UTF-8"))?;
        let records = ScenarioConfig::from_json(text)?.run()?;
        let mut buf = Vec::new();
        barring::write_records_csv(&records, &mut buf)?;
        let csv = CString::new(buf)
            .map_err(|_| Failure(NomaStatus::Internal, "NUL in CSV output".into()))?;
        *out = csv.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored; freeing
/// twice is undefined.
#[no_mangle]
pub unsafe extern "C" fn noma_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
