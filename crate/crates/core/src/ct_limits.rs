//! Continuous-time phase limitations.
//!
//! For `0 < a < b < c < d`, weights `lambda, mu > 0` tied by
//! `lambda/mu = (d^2 - c^2)/(b^2 - a^2)` and a scale `kappa > 0`, define
//!
//! ```text
//! psi(t)  = [lambda (cos at - cos bt) - mu (cos ct - cos dt)] / t
//! phi1(t) = [lambda (sin at - sin bt) + kappa mu (sin ct - sin dt)] / t
//! phi(t)  = lambda (b - a) + kappa mu (d - c) + phi1(t)
//! phit(t) = lambda (b - a) + kappa mu (d - c) - |phi1(t)|
//! ```
//!
//! The suprema `rho_c = sup |psi|/phi` and `rho_c_odd = sup |psi|/phit` over
//! `t > 0` bound the phase any admissible multiplier can sustain
//! simultaneously above `atan(rho)` on `[a, b]` and below `-atan(kappa rho)`
//! on `[c, d]` (or the mirrored pattern). Both ratios behave like
//! `|gamma| t` as `t -> 0`, which is numerically ill-conditioned when
//! evaluated directly; small arguments are therefore handled by series.

use std::f64::consts::PI;

use crate::error::{invalid, numerical};
use crate::lti::{freq_response, nyquist_value, FrequencyGrid, TransferFunction};
use crate::search::golden_max;
use crate::{NonlinearityClass, PhaseLimit, Result};

/// Parameter tuple `(a, b, c, d, kappa, lambda, mu)` of the continuous-time
/// limitation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtLimitParams {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    kappa: f64,
    lambda: f64,
    mu: f64,
}

impl CtLimitParams {
    /// Derives the weights from the interval constraint, normalized so that
    /// `lambda (b - a) + kappa mu (d - c) = 1`. The limitation values are
    /// scale-invariant in `(lambda, mu)` once their ratio is fixed, and the
    /// normalization keeps the sweep well conditioned.
    pub fn new(a: f64, b: f64, c: f64, d: f64, kappa: f64) -> Result<Self> {
        check_intervals(a, b, c, d, kappa)?;
        let ratio = (d * d - c * c) / (b * b - a * a);
        let mu = 1.0 / (ratio * (b - a) + kappa * (d - c));
        let lambda = ratio * mu;
        Ok(CtLimitParams {
            a,
            b,
            c,
            d,
            kappa,
            lambda,
            mu,
        })
    }

    /// Accepts explicit weights, which must be positive and satisfy
    /// `lambda/mu = (d^2 - c^2)/(b^2 - a^2)` to a relative `1e-12`.
    pub fn with_weights(
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        kappa: f64,
        lambda: f64,
        mu: f64,
    ) -> Result<Self> {
        check_intervals(a, b, c, d, kappa)?;
        if !(lambda > 0.0) || !(mu > 0.0) {
            return Err(invalid("weights lambda, mu must be positive"));
        }
        let ratio = (d * d - c * c) / (b * b - a * a);
        if (lambda / mu - ratio).abs() > 1e-12 * ratio {
            return Err(invalid(
                "weights must satisfy lambda/mu = (d^2 - c^2)/(b^2 - a^2) within 1e-12",
            ));
        }
        Ok(CtLimitParams {
            a,
            b,
            c,
            d,
            kappa,
            lambda,
            mu,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `lambda (b - a) + kappa mu (d - c)`, the `t -> inf` limit of `phi`.
    fn base(&self) -> f64 {
        self.lambda * (self.b - self.a) + self.kappa * self.mu * (self.d - self.c)
    }
}

fn check_intervals(a: f64, b: f64, c: f64, d: f64, kappa: f64) -> Result<()> {
    if ![a, b, c, d, kappa].iter().all(|v| v.is_finite()) {
        return Err(invalid("parameters must be finite"));
    }
    if !(0.0 < a && a < b && b < c && c < d) {
        return Err(invalid("interval bounds must satisfy 0 < a < b < c < d"));
    }
    if !(kappa > 0.0) {
        return Err(invalid("kappa must be positive"));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid("evaluation time t must be positive"));
    }
    Ok(t)
}

/// `x - sin x`, evaluated by series for small `|x|` to avoid cancellation.
fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        (x * x2 / 6.0) * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x - x.sin()
    }
}

// Relative Taylor coefficients of sin(ut) sin(vt) / (u v t^2).
fn sinc2_c1(u2: f64, v2: f64) -> f64 {
    -(u2 + v2) / 6.0
}
fn sinc2_c2(u2: f64, v2: f64) -> f64 {
    (u2 * u2 + v2 * v2) / 120.0 + u2 * v2 / 36.0
}
fn sinc2_c3(u2: f64, v2: f64) -> f64 {
    -(u2 * u2 * u2 + v2 * v2 * v2) / 5040.0 - u2 * v2 * (u2 + v2) / 720.0
}

fn psi_raw(t: f64, p: &CtLimitParams) -> f64 {
    let (u1, v1) = (0.5 * (p.a + p.b), 0.5 * (p.b - p.a));
    let (u2, v2) = (0.5 * (p.c + p.d), 0.5 * (p.d - p.c));
    if p.d * t.abs() <= 0.05 {
        // psi = 2t [ (P - Q) + (P c1 - Q c1') t^2 + ... ] with P = lambda u1 v1,
        // Q = mu u2 v2. The weight constraint makes P and Q nearly equal; the
        // leading difference is carried explicitly so the evaluation stays
        // accurate even when the supplied weights satisfy the constraint only
        // to a relative 1e-12.
        let (pw, qw) = (p.lambda * u1 * v1, p.mu * u2 * v2);
        let (u1s, v1s, u2s, v2s) = (u1 * u1, v1 * v1, u2 * u2, v2 * v2);
        let t2 = t * t;
        let poly = (pw - qw)
            + (pw * sinc2_c1(u1s, v1s) - qw * sinc2_c1(u2s, v2s)) * t2
            + (pw * sinc2_c2(u1s, v1s) - qw * sinc2_c2(u2s, v2s)) * t2 * t2
            + (pw * sinc2_c3(u1s, v1s) - qw * sinc2_c3(u2s, v2s)) * t2 * t2 * t2;
        2.0 * t * poly
    } else {
        // cos x - cos y = 2 sin((x+y)/2) sin((y-x)/2) keeps the cancellation
        // between the cosine pairs under control.
        let term1 = 2.0 * (u1 * t).sin() * (v1 * t).sin();
        let term2 = 2.0 * (u2 * t).sin() * (v2 * t).sin();
        (p.lambda * term1 - p.mu * term2) / t
    }
}

fn phi_raw(t: f64, p: &CtLimitParams) -> f64 {
    (p.lambda * (x_minus_sin(p.b * t) - x_minus_sin(p.a * t))
        + p.kappa * p.mu * (x_minus_sin(p.d * t) - x_minus_sin(p.c * t)))
        / t
}

fn phi1_raw(t: f64, p: &CtLimitParams) -> f64 {
    phi_raw(t, p) - p.base()
}

fn phi_tilde_raw(t: f64, p: &CtLimitParams) -> f64 {
    let p1 = phi1_raw(t, p);
    if p1 <= 0.0 {
        phi_raw(t, p)
    } else {
        p.base() - p1
    }
}

/// `psi(t)` for `t > 0`; vanishes as `t -> 0` and oscillates with decaying
/// `2(lambda + mu)/t` envelope.
pub fn psi(t: f64, p: &CtLimitParams) -> Result<f64> {
    Ok(psi_raw(check_t(t)?, p))
}

/// `phi(t) > 0` for `t > 0`, tending to `lambda (b-a) + kappa mu (d-c)`.
pub fn phi(t: f64, p: &CtLimitParams) -> Result<f64> {
    Ok(phi_raw(check_t(t)?, p))
}

/// The oscillatory part `phi1 = phi - lim phi`.
pub fn phi1(t: f64, p: &CtLimitParams) -> Result<f64> {
    Ok(phi1_raw(check_t(t)?, p))
}

/// `phi_tilde(t) = lim phi - |phi1(t)| > 0`, the denominator of the odd-class
/// ratio; always `<= phi(t)`.
pub fn phi_tilde(t: f64, p: &CtLimitParams) -> Result<f64> {
    Ok(phi_tilde_raw(check_t(t)?, p))
}

/// Slope of the small-`t` behaviour `psi/phi ~ gamma t`:
/// `gamma = -[lambda (b^4 - a^4) - mu (d^4 - c^4)] /
///          (4 [lambda (b^3 - a^3) + kappa mu (d^3 - c^3)])`.
pub fn gamma(p: &CtLimitParams) -> f64 {
    let pow = |x: f64, n: i32| x.powi(n);
    let num = p.lambda * (pow(p.b, 4) - pow(p.a, 4)) - p.mu * (pow(p.d, 4) - pow(p.c, 4));
    let den = p.lambda * (pow(p.b, 3) - pow(p.a, 3))
        + p.kappa * p.mu * (pow(p.d, 3) - pow(p.c, 3));
    -0.25 * num / den
}

/// Tuning of the `rho_c` sup-search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    /// Minimum sample count per decade of the log-spaced sweep; the actual
    /// count also resolves the fastest oscillation period `2 pi / d` with at
    /// least ten samples.
    pub min_points_per_decade: usize,
    /// Relative width tolerance of the golden-section refinement around each
    /// local maximum.
    pub refine_rel_tol: f64,
    /// Arguments within this relative tolerance of the supremum are reported
    /// as achieving.
    pub argmax_rel_tol: f64,
    /// Give up if the tail bound has not dominated after this many decades.
    pub max_decades: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            min_points_per_decade: 4000,
            refine_rel_tol: 1e-12,
            argmax_rel_tol: 1e-9,
            max_decades: 15,
        }
    }
}

/// `rho_c`: supremum of `|psi|/phi` over `t > 0` (non-odd class).
pub fn rho_c(p: &CtLimitParams, cfg: &SweepConfig) -> Result<PhaseLimit<f64>> {
    rho_search(p, NonlinearityClass::NonOdd, cfg)
}

/// `rho_c_odd`: supremum of `|psi|/phi_tilde` over `t > 0` (odd class).
pub fn rho_c_odd(p: &CtLimitParams, cfg: &SweepConfig) -> Result<PhaseLimit<f64>> {
    rho_search(p, NonlinearityClass::Odd, cfg)
}

/// Sweep skeleton shared by both classes:
/// (i) below `t_switch = 1e-3/d` the ratio follows the `|gamma| t` series and
/// is maximal at the switch point; (ii) decade-by-decade log-spaced sampling
/// with golden-section refinement of every competitive local maximum;
/// (iii) stop once the envelope tail bound
/// `[2(lambda + mu)/T] / [base - 2(lambda + kappa mu)/T]` falls below the
/// incumbent, which certifies that no later `t` can win.
fn rho_search(
    p: &CtLimitParams,
    klass: NonlinearityClass,
    cfg: &SweepConfig,
) -> Result<PhaseLimit<f64>> {
    let base = p.base();
    let ratio = |t: f64| {
        let den = match klass {
            NonlinearityClass::NonOdd => phi_raw(t, p),
            NonlinearityClass::Odd => phi_tilde_raw(t, p),
        };
        psi_raw(t, p).abs() / den
    };

    let t_switch = 1e-3 / p.d;
    let mut best = gamma(p).abs() * t_switch;
    let mut candidates: Vec<(f64, f64)> = vec![(t_switch, best)];
    let mut t0 = t_switch;

    for _ in 0..cfg.max_decades {
        let t1 = t0 * 10.0;
        let oscillation = (2.0 * PI / p.d) / 10.0;
        let npts = (((t1 - t0) / oscillation).ceil() as usize + 1)
            .max(cfg.min_points_per_decade);
        let (llo, lhi) = (t0.ln(), t1.ln());
        let step = (lhi - llo) / (npts - 1) as f64;
        let ts: Vec<f64> = (0..npts).map(|i| (llo + step * i as f64).exp()).collect();
        let rs: Vec<f64> = ts.iter().map(|&t| ratio(t)).collect();

        for i in 1..npts - 1 {
            if rs[i] >= rs[i - 1] && rs[i] >= rs[i + 1] && rs[i] > best * 0.999 {
                let (t_ref, v) = golden_max(&ratio, ts[i - 1], ts[i + 1], cfg.refine_rel_tol);
                if v > best {
                    best = v;
                }
                if v >= best * (1.0 - 1e-6) {
                    candidates.push((t_ref, v));
                }
            }
        }

        let tail_den = base - 2.0 * (p.lambda + p.kappa * p.mu) / t1;
        if tail_den > 0.0 && (2.0 * (p.lambda + p.mu) / t1) / tail_den < best {
            let mut argmax: Vec<f64> = candidates
                .iter()
                .filter(|(_, v)| *v >= best * (1.0 - cfg.argmax_rel_tol))
                .map(|(t, _)| *t)
                .collect();
            argmax.sort_by(f64::total_cmp);
            argmax.dedup_by(|a, b| (*a - *b).abs() <= 1e-8 * b.abs());
            return Ok(PhaseLimit::new(best, argmax, klass));
        }
        t0 = t1;
    }
    Err(numerical(format!(
        "sweep tail bound never dominated within {} decades (partial rho = {:.9})",
        cfg.max_decades, best
    )))
}

/// A closed positive frequency interval in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyInterval {
    lo: f64,
    hi: f64,
}

impl FrequencyInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            return Err(invalid("frequency interval requires 0 < lo < hi"));
        }
        Ok(FrequencyInterval { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }
    pub fn hi(&self) -> f64 {
        self.hi
    }
}

/// Outcome of the continuous-time limitation test for a plant and gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// No admissible multiplier of the requested class can provide the phase
    /// the loop demands on the given intervals.
    Precluded,
    /// The limitation does not rule out a multiplier (which is not a
    /// feasibility certificate).
    Inconclusive,
}

/// Tests whether the phase limitation rules out every multiplier of the
/// requested class for the loop `1 + kG` on the interval pair.
///
/// Decision procedure (each clause documented because the underlying theorem
/// constrains an ideal requirement over whole intervals, which a finite-gain
/// loop only pins down asymptotically):
///
/// 1. the finite-gain term `1 + kG` decides *activity*: each interval must
///    contain frequencies where `|angle(1 + kG)| > 90 deg`, with one
///    consistent sign per interval, opposite across the intervals, and
///    agreeing with the sign of `angle(G)` there — otherwise the multiplier
///    phase requirement vanishes somewhere relevant and the test returns
///    [`Verdict::Inconclusive`] (this is what happens as `k -> 0`);
/// 2. the *level* of the requirement is taken from the gain-independent
///    envelope `|angle(G)| - 90 deg`, minimized over the full interval; the
///    envelope is the requirement the loop enforces once the loop gain
///    dominates, and using its interval minimum matches the all-frequencies
///    hypothesis of the limitation theorem;
/// 3. with levels `theta_1, theta_2` the best exploitable slope is
///    `min(tan theta_1, tan(theta_2)/kappa)`; the verdict is
///    [`Verdict::Precluded`] exactly when it exceeds `rho_c` (or
///    `rho_c_odd` for the odd class) of the interval tuple. Both sign
///    patterns (positive first or negative first) are accepted.
pub fn ct_limitation_verdict(
    tf: &TransferFunction,
    k: f64,
    i1: FrequencyInterval,
    i2: FrequencyInterval,
    kappa: f64,
    klass: NonlinearityClass,
    grid_points: usize,
    cfg: &SweepConfig,
) -> Result<Verdict> {
    if tf.domain() != crate::lti::Domain::Continuous {
        return Err(invalid("the continuous-time verdict requires an s-domain plant"));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(invalid("gain k must be positive and finite"));
    }
    if !(i1.hi < i2.lo) {
        return Err(invalid("intervals must be ordered with I1 strictly below I2"));
    }
    let kn = nyquist_value(tf, 10_001)?;
    if k >= kn {
        return Err(invalid(format!(
            "gain k = {k} must stay below the Nyquist value {kn}"
        )));
    }
    let n = grid_points.max(16);

    let mut signs = [0.0f64; 2];
    let mut levels = [0.0f64; 2];
    for (idx, iv) in [i1, i2].iter().enumerate() {
        let grid = FrequencyGrid::linear(iv.lo, iv.hi, n)?;
        let resp = freq_response(tf, &grid)?;

        // Activity and sign pattern from the finite-gain loop term.
        let mut active_sign = 0.0f64;
        for g in &resp {
            let loop_term = 1.0 + k * g;
            if loop_term.re == 0.0 && loop_term.im == 0.0 {
                return Err(numerical("1 + kG vanishes on the interval; phase degenerate"));
            }
            let ang = loop_term.arg().to_degrees();
            if ang.abs() > 90.0 {
                let s = ang.signum();
                if active_sign == 0.0 {
                    active_sign = s;
                } else if active_sign != s {
                    return Ok(Verdict::Inconclusive);
                }
            }
        }
        if active_sign == 0.0 {
            return Ok(Verdict::Inconclusive);
        }

        // Requirement level from the high-gain envelope |angle(G)| - 90.
        let mut level = f64::INFINITY;
        for g in &resp {
            let ang = g.arg().to_degrees();
            if ang.abs() <= 90.0 || ang.signum() != active_sign {
                return Ok(Verdict::Inconclusive);
            }
            level = level.min(ang.abs() - 90.0);
        }
        signs[idx] = active_sign;
        levels[idx] = level;
    }

    if signs[0] == signs[1] {
        return Ok(Verdict::Inconclusive);
    }

    let params = CtLimitParams::new(i1.lo, i1.hi, i2.lo, i2.hi, kappa)?;
    let limit = match klass {
        NonlinearityClass::NonOdd => rho_c(&params, cfg)?,
        NonlinearityClass::Odd => rho_c_odd(&params, cfg)?,
    };
    let exploitable = (levels[0].to_radians().tan())
        .min(levels[1].to_radians().tan() / kappa);
    if exploitable > limit.rho {
        Ok(Verdict::Precluded)
    } else {
        Ok(Verdict::Inconclusive)
    }
}
