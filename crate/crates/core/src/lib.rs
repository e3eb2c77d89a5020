//! Phase limitations of Zames-Falb multipliers for Lur'e feedback systems.
//!
//! A Lur'e system is the negative feedback interconnection of a stable LTI
//! plant `G` and a static slope-restricted nonlinearity. Stability can be
//! certified by finding a Zames-Falb multiplier `M` with
//! `Re{M(1+kG)} > 0` at all frequencies, but the admissible multipliers obey
//! hard phase limitations over prescribed frequency intervals. This crate
//! computes those limitations in both time domains, uses them to bound the
//! admissible nonlinearity slope for a given plant, checks the off-axis
//! circle criteria, and simulates the feedback loop to exhibit periodic
//! solutions that invalidate the Kalman conjecture and the direct discrete
//! counterpart of the off-axis circle criterion.
//!
//! Module map:
//! - [`lti`]: rational transfer functions, frequency responses, Nyquist value;
//! - [`multipliers`]: FIR and impulse-train Zames-Falb multipliers;
//! - [`ct_limits`]: continuous-time limitation functions and the sup-search
//!   for `rho_c` / `rho_c_odd`;
//! - [`dt_limits`]: discrete-time limitations via an exact finite search,
//!   achieving sets and sparse limiting multipliers;
//! - [`analysis`]: plant-facing procedures (ideal multiplier phase,
//!   violation certificates, slope bisection, off-axis criteria);
//! - [`lure`]: time-domain simulation of the feedback loop with
//!   piecewise-linear nonlinearities and periodic-solution detection.

pub mod analysis;
pub mod ct_limits;
pub mod dt_limits;
mod error;
pub mod lti;
pub mod lure;
pub mod multipliers;
mod search;

pub use error::{Error, Result};

/// Which class of nonlinearities a stability certificate is meant for.
///
/// The multiplier classes differ accordingly: for general (non-odd)
/// slope-restricted nonlinearities all multiplier weights must be
/// nonnegative, while odd nonlinearities admit mixed-sign weights. The odd
/// class is larger, so its phase limitation is weaker (larger `rho`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NonlinearityClass {
    /// General slope-restricted nonlinearities; multiplier weights `h >= 0`.
    NonOdd,
    /// Odd nonlinearities (`N(-x) = -N(x)`); mixed-sign weights allowed.
    Odd,
}

/// A computed phase limitation: the extremal slope `rho = Im/Re` together
/// with the arguments that attain it.
///
/// `angle_deg = atan(rho)` in degrees is the corresponding phase bound. The
/// achieving arguments are times `t > 0` for the continuous-time search and
/// positive integers `n` for the discrete-time search; every listed argument
/// attains the extremum within a relative tolerance of `1e-9`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLimit<Arg> {
    pub rho: f64,
    pub angle_deg: f64,
    pub argmax: Vec<Arg>,
    pub klass: NonlinearityClass,
}

impl<Arg> PhaseLimit<Arg> {
    pub(crate) fn new(rho: f64, argmax: Vec<Arg>, klass: NonlinearityClass) -> Self {
        PhaseLimit {
            rho,
            angle_deg: rho.atan().to_degrees(),
            argmax,
            klass,
        }
    }
}
