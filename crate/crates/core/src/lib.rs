//! Throughput analysis, optimal loading and adaptive user barring for
//! NOMA-enabled slotted random access, with MS-ALOHA baselines and a seeded
//! Monte Carlo simulator.
//!
//! Each of `N` orthogonal channels offers `L` received-power levels. A
//! packet picks a channel and a level; the receiver decodes levels from the
//! strongest down with successive interference cancellation and stops at the
//! first level holding more than one packet.
//!
//! ```
//! use noma_ra::analytic::{throughput_poisson, SystemConfig};
//! use noma_ra::optimizer::optimal_lambda;
//!
//! let cfg = SystemConfig::new(10, 4).unwrap();
//! let opt = optimal_lambda(&cfg, 1e-9).unwrap();
//! assert!((opt.channel_load_star - 2.63).abs() < 0.01);
//! assert_eq!(opt.u_star, 26);
//! assert_eq!(opt.max_throughput, throughput_poisson(opt.lambda_star, &cfg));
//! ```

pub mod analytic;
pub mod barring;
pub mod cli;
pub mod error;
pub mod optimizer;
pub mod simulator;

pub use analytic::{CaptureSemantics, LoadPoint, PowerLevelSet, SystemConfig};
pub use error::{Error, Result};
