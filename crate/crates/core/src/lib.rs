//! Desk-scale simulator of a mobile visible-light communication receive
//! chain with automatic gain control.
//!
//! The crate models the full analog path of an intensity-modulated optical
//! link — noisy LED transmitter, Lambertian line-of-sight channel, APD
//! front end with shot and circuit noise — and the AGC amplifier behind it,
//! both as a settled (equilibrium) model and as a time-domain feedback loop.
//! On top of that sit OOK bit-error-rate experiments and a mobile scenario
//! in which the transmitter shuttles along a rail while the AGC tracks the
//! power swing.
//!
//! Everything internal is linear SI; decibels appear only at interfaces.
//! Monte Carlo paths are deterministic per seed and independent of worker
//! count.

pub mod agc_loop;
pub mod agc_static;
pub mod channel;
pub mod error;
pub mod frontend;
pub mod scenario;
pub mod seeding;
pub mod system;
pub mod units;
pub mod waveform;

pub use error::{Error, Result};
pub use system::SystemParams;
