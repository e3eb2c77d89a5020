//! Discrete-time phase limitations.
//!
//! For a frequency interval `0 <= a < b <= pi` (rad/sample) define, for
//! nonzero integers `n`,
//!
//! ```text
//! psi_d(n)  = (cos an - cos bn) / n
//! phi_d1(n) = (sin an - sin bn) / n
//! phi_d(n)  = (b - a) + phi_d1(n)
//! phit_d(n) = (b - a) - |phi_d1(n)|
//! ```
//!
//! The limitation values `rho_d = max |psi_d|/phi_d` and
//! `rho_d_odd = max |psi_d|/phit_d` are exact maxima over a *finite* range
//! `1..=n_max`: beyond `n_max` the ratio provably falls below its `n = 1`
//! value. The integers achieving the maximum double as the tap locations of
//! sparse FIR multipliers whose integral phase ratio comes within `O(eps)` of
//! the limitation, which is what makes the bound tight.

use crate::error::{invalid, numerical};
use crate::multipliers::FirMultiplier;
use crate::search::bisect_root;
use crate::{NonlinearityClass, PhaseLimit, Result};

/// A closed frequency interval `[a, b]` with `0 <= a < b <= pi` rad/sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtInterval {
    a: f64,
    b: f64,
}

impl DtInterval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(invalid("interval bounds must be finite"));
        }
        if !(0.0 <= a && a < b && b <= std::f64::consts::PI) {
            return Err(invalid("interval bounds must satisfy 0 <= a < b <= pi"));
        }
        Ok(DtInterval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
}

fn check_n(n: i64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("the integer argument n must be nonzero"));
    }
    Ok(n as f64)
}

/// `psi_d(n) = (cos an - cos bn)/n`; odd in `n`.
pub fn psi_d(n: i64, iv: &DtInterval) -> Result<f64> {
    let nf = check_n(n)?;
    Ok(((iv.a * nf).cos() - (iv.b * nf).cos()) / nf)
}

/// `phi_d1(n) = (sin an - sin bn)/n`; even in `n`.
pub fn phi_d1(n: i64, iv: &DtInterval) -> Result<f64> {
    let nf = check_n(n)?;
    Ok(((iv.a * nf).sin() - (iv.b * nf).sin()) / nf)
}

/// `phi_d(n) = (b - a) + phi_d1(n) > 0`; even in `n`.
pub fn phi_d(n: i64, iv: &DtInterval) -> Result<f64> {
    Ok((iv.b - iv.a) + phi_d1(n, iv)?)
}

/// `phit_d(n) = (b - a) - |phi_d1(n)| > 0`; even in `n`.
pub fn phi_tilde_d(n: i64, iv: &DtInterval) -> Result<f64> {
    Ok((iv.b - iv.a) - phi_d1(n, iv)?.abs())
}

/// Search horizon `nu` beyond which the ratio is provably below its `n = 1`
/// value:
/// `nu = [2(b-a) - 2 sin b + 2 sin a - 2 cos b + 2 cos a] /
///       [(a-b)(cos b - cos a)]`.
pub fn nu(iv: &DtInterval) -> Result<f64> {
    let den = (iv.a - iv.b) * (iv.b.cos() - iv.a.cos());
    if den == 0.0 {
        return Err(invalid("degenerate interval: cos b = cos a"));
    }
    let num = 2.0 * (iv.b - iv.a) - 2.0 * iv.b.sin() + 2.0 * iv.a.sin() - 2.0 * iv.b.cos()
        + 2.0 * iv.a.cos();
    Ok(num / den)
}

/// `max(floor(nu), 1)`: the exhaustive-search bound for the maximizing `n`.
pub fn n_max(iv: &DtInterval) -> Result<i64> {
    Ok((nu(iv)?.floor() as i64).max(1))
}

/// Signed ratio `psi_d/phi_d` (or `psi_d/phit_d` for the odd class) at `n`.
fn signed_ratio(n: i64, iv: &DtInterval, klass: NonlinearityClass) -> Result<f64> {
    let den = match klass {
        NonlinearityClass::NonOdd => phi_d(n, iv)?,
        NonlinearityClass::Odd => phi_tilde_d(n, iv)?,
    };
    Ok(psi_d(n, iv)? / den)
}

const HORIZON_CAP: i64 = 100_000_000;

fn rho_finite_max(iv: &DtInterval, klass: NonlinearityClass) -> Result<PhaseLimit<i64>> {
    let horizon = n_max(iv)?;
    if horizon > HORIZON_CAP {
        return Err(numerical(format!(
            "search horizon n_max = {horizon} exceeds the tractable cap {HORIZON_CAP}"
        )));
    }
    let mut best = f64::NEG_INFINITY;
    for n in 1..=horizon {
        best = best.max(signed_ratio(n, iv, klass)?.abs());
    }
    let mut argmax = Vec::new();
    for n in 1..=horizon {
        if signed_ratio(n, iv, klass)?.abs() >= best * (1.0 - 1e-9) {
            argmax.push(n);
        }
    }
    Ok(PhaseLimit::new(best, argmax, klass))
}

/// `rho_d`: exact max of `|psi_d|/phi_d` over `1..=n_max` (non-odd class).
pub fn rho_d(iv: &DtInterval) -> Result<PhaseLimit<i64>> {
    rho_finite_max(iv, NonlinearityClass::NonOdd)
}

/// `rho_d_odd`: exact max of `|psi_d|/phit_d` over `1..=n_max` (odd class).
pub fn rho_d_odd(iv: &DtInterval) -> Result<PhaseLimit<i64>> {
    rho_finite_max(iv, NonlinearityClass::Odd)
}

/// Sign of the extremal ratio an achieving set refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

/// The nonzero integers whose signed ratio attains `sign * rho` — the tap
/// locations of the limiting sparse multipliers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AchievingSet {
    /// Sorted, both signs, `|n| <= n_max`.
    pub members: Vec<i64>,
    pub sign: Sign,
    pub klass: NonlinearityClass,
}

/// Collects all nonzero `n` with `|n| <= n_max` whose signed ratio equals
/// `sign * rho` within `rel_tol`. Negative `n` are derived from positive `n`
/// by the symmetry `psi_d(-n)/phi_d(-n) = -psi_d(n)/phi_d(n)`.
pub fn achieving_set(
    iv: &DtInterval,
    klass: NonlinearityClass,
    sign: Sign,
    rel_tol: f64,
) -> Result<AchievingSet> {
    if !(rel_tol > 0.0) || !rel_tol.is_finite() {
        return Err(invalid("achieving-set tolerance must be positive"));
    }
    let limit = rho_finite_max(iv, klass)?;
    let target = match sign {
        Sign::Positive => limit.rho,
        Sign::Negative => -limit.rho,
    };
    let mut members = Vec::new();
    for n in 1..=n_max(iv)? {
        let r = signed_ratio(n, iv, klass)?;
        if (r - target).abs() <= rel_tol * limit.rho {
            members.push(n);
        }
        if (-r - target).abs() <= rel_tol * limit.rho {
            members.push(-n);
        }
    }
    members.sort_unstable();
    Ok(AchievingSet {
        members,
        sign,
        klass,
    })
}

/// Builds the limiting sparse multiplier `M(z) = 1 - sum h_n z^{-n}` with
/// taps on the achieving set, scaling the given weights so their absolute sum
/// is `1 - eps` (strictly inside the admissible class). Non-odd sets require
/// nonnegative weights.
pub fn sparse_multiplier(a: &AchievingSet, weights: &[f64], eps: f64) -> Result<FirMultiplier> {
    if weights.len() != a.members.len() {
        return Err(invalid(format!(
            "expected one weight per achieving member ({}), got {}",
            a.members.len(),
            weights.len()
        )));
    }
    if a.members.is_empty() {
        return Err(invalid("achieving set has no members"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps must lie in (0, 1)"));
    }
    if !weights.iter().all(|w| w.is_finite()) {
        return Err(invalid("weights must be finite"));
    }
    if a.klass == NonlinearityClass::NonOdd && weights.iter().any(|&w| w < 0.0) {
        return Err(invalid("non-odd multipliers require nonnegative weights"));
    }
    let mass: f64 = weights.iter().map(|w| w.abs()).sum();
    if mass == 0.0 {
        return Err(invalid("weights must not all vanish"));
    }
    let scale = (1.0 - eps) / mass;
    let m = FirMultiplier::new(
        a.members
            .iter()
            .zip(weights)
            .map(|(&n, &w)| (n, w * scale)),
    );
    m.validate()?;
    Ok(m)
}

/// Integral phase ratio of an FIR multiplier over the interval, in closed
/// form: `int Im M / int Re M` with `int sin(wn) dw = (cos an - cos bn)/n`
/// and `int (1 - cos wn) dw = (b-a) - (sin bn - sin an)/n` per tap.
pub fn integral_ratio(m: &FirMultiplier, iv: &DtInterval) -> Result<f64> {
    let mut num = 0.0;
    let mut den = iv.b - iv.a;
    for (n, h) in m.taps() {
        num += h * psi_d(n, iv)?;
        den += h * phi_d1(n, iv)?;
    }
    if den <= 0.0 {
        return Err(numerical(
            "integrated real part of the multiplier is not positive on the interval",
        ));
    }
    Ok(num / den)
}

/// Searches `b` in `[lo, hi]` making `|ratio(n1)| = |ratio(n2)|` for the
/// non-odd class at fixed `a` — the tuning that makes both integers achieve.
/// Requires the gap to change sign across the bracket.
pub fn tie_break_b(a: f64, n1: i64, n2: i64, lo: f64, hi: f64) -> Result<f64> {
    if n1 == 0 || n2 == 0 || n1 == n2 {
        return Err(invalid("tie search requires two distinct nonzero integers"));
    }
    let gap = |b: f64| -> Result<f64> {
        let iv = DtInterval::new(a, b)?;
        Ok(signed_ratio(n1, &iv, NonlinearityClass::NonOdd)?.abs()
            - signed_ratio(n2, &iv, NonlinearityClass::NonOdd)?.abs())
    };
    let (glo, ghi) = (gap(lo)?, gap(hi)?);
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if glo.signum() == ghi.signum() {
        return Err(invalid(
            "tie search bracket does not straddle an equal-ratio point",
        ));
    }
    // Bisection is safe: the gap is continuous in b on a valid bracket.
    Ok(bisect_root(|b| gap(b).unwrap_or(f64::NAN), lo, hi, 1e-14))
}
