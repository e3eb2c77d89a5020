//! Plant-facing slope-restriction analysis.
//!
//! Ties the phase limitations to a concrete loop `1 + kG`: the ideal
//! multiplier phase a gain demands, the water-level search for intervals
//! where that demand provably exceeds what any admissible multiplier can
//! deliver, the resulting critical gain `k_PL`, and the off-axis
//! separating-line criteria (`k_O`, `k_RO`) that complete the slope report.

use num_complex::Complex64;

use crate::dt_limits::{rho_d, rho_d_odd, DtInterval, Sign};
use crate::error::{invalid, numerical};
use crate::lti::{freq_response, nyquist_value, Domain, FrequencyGrid, TransferFunction};
use crate::search::golden_max;
use crate::{NonlinearityClass, Result};

/// Shared tuning of the analysis procedures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    /// Absolute tolerance of every gain bisection.
    pub tol: f64,
    /// Separating lines are anchored at `-1/k + margin/k`, strictly right of
    /// the critical point.
    pub margin: f64,
    /// Samples of `[0, pi]` used for ideal-phase evaluation.
    pub phase_points: usize,
    /// Candidate water levels drawn from the sampled phase magnitudes.
    pub levels: usize,
    /// Samples of `[0, pi]` for discrete Nyquist loci.
    pub locus_points: usize,
    /// Log-spaced samples of `[1e-4, 1e4]` rad/s for continuous loci.
    pub ct_locus_points: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            tol: 1e-4,
            margin: 1e-6,
            phase_points: 2000,
            levels: 200,
            locus_points: 10_001,
            ct_locus_points: 20_001,
        }
    }
}

/// Phase (degrees) an ideal multiplier would need at each grid point:
/// `angle(G + 1/k) -/+ 90` where the principal angle leaves `(-90, 90)`,
/// and `0` inside that band. `angle(G + 1/k) = angle(1 + kG)` since `k > 0`.
pub fn ideal_phase(tf: &TransferFunction, k: f64, grid: &FrequencyGrid) -> Result<Vec<f64>> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(invalid("gain k must be positive and finite"));
    }
    let resp = freq_response(tf, grid)?;
    resp.iter()
        .map(|g| {
            let h = g + Complex64::new(1.0 / k, 0.0);
            if h.re == 0.0 && h.im == 0.0 {
                return Err(numerical(
                    "1 + kG vanishes at a grid point; the ideal phase is degenerate",
                ));
            }
            let ang = h.arg().to_degrees();
            Ok(if ang > 90.0 {
                ang - 90.0
            } else if ang < -90.0 {
                ang + 90.0
            } else {
                0.0
            })
        })
        .collect()
}

/// Proof that no admissible multiplier exists for the loop at gain `k`: the
/// ideal phase stays at or above `required_angle_deg` (in magnitude, with one
/// sign) across `interval`, yet the interval's limitation caps multiplier
/// phase at `limit_angle_deg < required_angle_deg`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationCertificate {
    pub interval: DtInterval,
    pub k: f64,
    pub required_angle_deg: f64,
    pub limit_angle_deg: f64,
    pub sign: Sign,
}

fn limit_angle_deg(iv: &DtInterval, klass: NonlinearityClass) -> Result<f64> {
    let lim = match klass {
        NonlinearityClass::NonOdd => rho_d(iv)?,
        NonlinearityClass::Odd => rho_d_odd(iv)?,
    };
    Ok(lim.angle_deg)
}

/// Water-level search for a limitation violation at gain `k`.
///
/// Candidate levels are the sampled `|ideal phase|` values themselves
/// (descending, thinned to at most `cfg.levels` by rank). For each level,
/// every maximal same-sign run of grid points at or above the level forms a
/// candidate interval; the first run whose level exceeds the interval's
/// limitation angle is returned. `None` means no sampled level violates.
pub fn find_violation(
    tf: &TransferFunction,
    k: f64,
    klass: NonlinearityClass,
    cfg: &AnalysisConfig,
) -> Result<Option<ViolationCertificate>> {
    if tf.domain() != Domain::Discrete {
        return Err(invalid("the violation search requires a discrete plant"));
    }
    let grid = FrequencyGrid::linear(0.0, std::f64::consts::PI, cfg.phase_points.max(16))?;
    let ideal = ideal_phase(tf, k, &grid)?;
    let w = grid.points();
    let n = ideal.len();

    let mut vals: Vec<f64> = ideal.iter().map(|p| p.abs()).filter(|&m| m > 0.0).collect();
    if vals.is_empty() {
        return Ok(None);
    }
    vals.sort_by(|x, y| y.total_cmp(x));
    let nlev = cfg.levels.max(2);
    let mut levels: Vec<f64> = if vals.len() <= nlev {
        vals
    } else {
        // Rank-based thinning keeps actual sampled values, max to min.
        (0..nlev)
            .map(|i| vals[(i * (vals.len() - 1)) / (nlev - 1)])
            .collect()
    };
    levels.dedup();

    for level in levels {
        let mut i = 0;
        while i < n {
            if ideal[i].abs() < level || ideal[i] == 0.0 {
                i += 1;
                continue;
            }
            let sign = ideal[i].signum();
            let mut j = i;
            while j + 1 < n && ideal[j + 1].abs() >= level && ideal[j + 1].signum() == sign {
                j += 1;
            }
            if j > i {
                let interval = DtInterval::new(w[i], w[j])?;
                let limit = limit_angle_deg(&interval, klass)?;
                if level > limit {
                    return Ok(Some(ViolationCertificate {
                        interval,
                        k,
                        required_angle_deg: level,
                        limit_angle_deg: limit,
                        sign: if sign > 0.0 { Sign::Positive } else { Sign::Negative },
                    }));
                }
            }
            i = j + 1;
        }
    }
    Ok(None)
}

/// Result of the `k_PL` search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KplEstimate {
    /// Smallest violating gain found (or the Nyquist value when inactive).
    pub k_pl: f64,
    /// Nyquist value bounding the search from above.
    pub k_n: f64,
    /// No gain below the Nyquist value produced a violation.
    pub inactive: bool,
    /// The coarse scan saw the violation predicate switch off again above a
    /// violating gain; the reported value is then the first transition only.
    pub non_monotone: bool,
}

/// Critical limitation gain: the smallest `k` for which [`find_violation`]
/// succeeds, located by a 64-point coarse scan of `(0, k_N)` followed by
/// bisection of the first transition to absolute tolerance `cfg.tol`.
pub fn k_pl(
    tf: &TransferFunction,
    klass: NonlinearityClass,
    cfg: &AnalysisConfig,
) -> Result<KplEstimate> {
    check_stable(tf, Domain::Discrete, "the limitation gain search")?;
    let k_n = nyquist_value(tf, cfg.locus_points)?;
    let k_hi = if k_n.is_finite() {
        k_n * (1.0 - 1e-9)
    } else {
        // Without a Nyquist bound, violations require the locus to cross
        // Re G < -1/k somewhere; cap the scan where that becomes possible.
        let grid = FrequencyGrid::linear(0.0, std::f64::consts::PI, cfg.locus_points.max(3))?;
        let min_re = freq_response(tf, &grid)?
            .iter()
            .map(|g| g.re)
            .fold(f64::INFINITY, f64::min);
        if min_re >= 0.0 {
            return Ok(KplEstimate {
                k_pl: f64::INFINITY,
                k_n,
                inactive: true,
                non_monotone: false,
            });
        }
        100.0 / min_re.abs()
    };

    let scan = 64;
    let mut first: Option<usize> = None;
    let mut non_monotone = false;
    let mut ks = Vec::with_capacity(scan);
    for i in 0..scan {
        let k = k_hi * (i + 1) as f64 / scan as f64;
        ks.push(k);
        let hit = find_violation(tf, k, klass, cfg)?.is_some();
        if hit && first.is_none() {
            first = Some(i);
        }
        if !hit && first.is_some() {
            non_monotone = true;
        }
    }
    let Some(first) = first else {
        return Ok(KplEstimate {
            k_pl: k_n,
            k_n,
            inactive: true,
            non_monotone: false,
        });
    };

    let mut lo = if first == 0 { 0.0 } else { ks[first - 1] };
    let mut hi = ks[first];
    while hi - lo > cfg.tol {
        let mid = 0.5 * (lo + hi);
        if find_violation(tf, mid, klass, cfg)?.is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(KplEstimate {
        k_pl: hi,
        k_n,
        inactive: false,
        non_monotone,
    })
}

/// The phase-dump row set: for each grid frequency, the loop phase
/// `angle(1 + kG)` (degrees, principal), the ideal multiplier phase, and the
/// limitation angle of that frequency's own level set — the maximal same-sign
/// run where `|ideal|` is at least the row's value. Rows with zero ideal
/// phase (including single-point runs, which no interval result constrains)
/// carry their own value as the limit, so `ideal > limit` on a row flags a
/// genuine interval violation.
pub fn phase_profile(
    tf: &TransferFunction,
    k: f64,
    klass: NonlinearityClass,
    cfg: &AnalysisConfig,
) -> Result<Vec<PhaseRow>> {
    if tf.domain() != Domain::Discrete {
        return Err(invalid("the phase profile requires a discrete plant"));
    }
    let grid = FrequencyGrid::linear(0.0, std::f64::consts::PI, cfg.phase_points.max(16))?;
    let resp = freq_response(tf, &grid)?;
    let ideal = ideal_phase(tf, k, &grid)?;
    let w = grid.points();
    let n = ideal.len();

    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let loop_term = Complex64::new(1.0, 0.0) + k * resp[i];
        let phase_1pkg = loop_term.arg().to_degrees();
        let level = ideal[i].abs();
        let limit = if level == 0.0 {
            0.0
        } else {
            let sign = ideal[i].signum();
            let keep = |j: usize| ideal[j].abs() >= level && ideal[j].signum() == sign;
            let mut lo = i;
            while lo > 0 && keep(lo - 1) {
                lo -= 1;
            }
            let mut hi = i;
            while hi + 1 < n && keep(hi + 1) {
                hi += 1;
            }
            if lo == hi {
                level
            } else {
                limit_angle_deg(&DtInterval::new(w[lo], w[hi])?, klass)?
            }
        };
        rows.push(PhaseRow {
            omega: w[i],
            phase_1pkg_deg: phase_1pkg,
            ideal_phase_deg: ideal[i],
            limit_angle_deg: limit,
        });
    }
    Ok(rows)
}

/// One row of [`phase_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRow {
    pub omega: f64,
    pub phase_1pkg_deg: f64,
    pub ideal_phase_deg: f64,
    pub limit_angle_deg: f64,
}

// ---------------------------------------------------------------------------
// Off-axis separating-line criteria.
// ---------------------------------------------------------------------------

/// Largest over line angles `theta` of the smallest signed distance from the
/// locus to the line through `(anchor, 0)`; positive means the whole locus
/// lies strictly on the line's right. Coarse 1800-point scan over
/// `[theta_lo, theta_hi]`, then golden-section refinement around the best.
fn max_min_dist(
    locus: &[Complex64],
    anchor: f64,
    theta_lo: f64,
    theta_hi: f64,
) -> (f64, f64) {
    let min_dist = |theta: f64| {
        let (s, c) = theta.sin_cos();
        locus
            .iter()
            .map(|p| (p.re - anchor) * c - p.im * s)
            .fold(f64::INFINITY, f64::min)
    };
    let n = 1800;
    let (mut best, mut best_theta) = (f64::NEG_INFINITY, theta_lo);
    for i in 0..n {
        let theta = theta_lo + (theta_hi - theta_lo) * i as f64 / (n - 1) as f64;
        let m = min_dist(theta);
        if m > best {
            best = m;
            best_theta = theta;
        }
    }
    let lo = (best_theta - 0.005).max(theta_lo);
    let hi = (best_theta + 0.005).min(theta_hi);
    let (theta_ref, v) = golden_max(min_dist, lo, hi, 1e-12);
    if v > best {
        (v, theta_ref)
    } else {
        (best, best_theta)
    }
}

const THETA_EPS: f64 = 1e-12;

fn dt_locus(tf: &TransferFunction, cfg: &AnalysisConfig) -> Result<Vec<Complex64>> {
    let grid = FrequencyGrid::linear(0.0, std::f64::consts::PI, cfg.locus_points.max(3))?;
    freq_response(tf, &grid)
}

fn ct_locus(tf: &TransferFunction, cfg: &AnalysisConfig) -> Result<Vec<Complex64>> {
    let grid = FrequencyGrid::log_spaced(1e-4, 1e4, cfg.ct_locus_points.max(3))?;
    freq_response(tf, &grid)
}

fn check_stable(tf: &TransferFunction, domain: Domain, what: &str) -> Result<()> {
    if tf.domain() != domain {
        return Err(invalid(format!("{what} requires a {domain:?} plant")));
    }
    if !tf.is_stable()? {
        return Err(invalid(format!("{what} requires a stable plant")));
    }
    Ok(())
}

fn separable(locus: &[Complex64], k: f64, margin: f64) -> bool {
    let anchor = (-1.0 + margin) / k;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let (m, _) = max_min_dist(locus, anchor, -half_pi + THETA_EPS, half_pi - THETA_EPS);
    m > 0.0
}

/// True iff some line through `(-1/k + margin/k, 0)` keeps the whole sampled
/// continuous-frequency Nyquist locus strictly on its right.
pub fn offaxis_ct(tf: &TransferFunction, k: f64, cfg: &AnalysisConfig) -> Result<bool> {
    check_stable(tf, Domain::Continuous, "the off-axis line test")?;
    if !(k > 0.0) || !k.is_finite() {
        return Err(invalid("gain k must be positive and finite"));
    }
    Ok(separable(&ct_locus(tf, cfg)?, k, cfg.margin))
}

/// Discrete-domain analogue of [`offaxis_ct`] for a single gain.
pub fn offaxis_dt_separable(tf: &TransferFunction, k: f64, cfg: &AnalysisConfig) -> Result<bool> {
    check_stable(tf, Domain::Discrete, "the off-axis line test")?;
    if !(k > 0.0) || !k.is_finite() {
        return Err(invalid("gain k must be positive and finite"));
    }
    Ok(separable(&dt_locus(tf, cfg)?, k, cfg.margin))
}

/// Largest gain found whose separating line exists (bisection, tolerance
/// `cfg.tol`): the slope a direct discrete-time transcription of the
/// continuous off-axis criterion would certify. Infinite when the locus never
/// leaves the closed right half-plane.
pub fn offaxis_conjecture_k(tf: &TransferFunction, cfg: &AnalysisConfig) -> Result<f64> {
    check_stable(tf, Domain::Discrete, "the off-axis line test")?;
    let locus = dt_locus(tf, cfg)?;
    let min_re = locus.iter().map(|p| p.re).fold(f64::INFINITY, f64::min);
    if min_re >= 0.0 {
        return Ok(f64::INFINITY);
    }
    // Small gains always separate: a vertical line works once the anchor is
    // left of the whole locus.
    let lo = 0.5 / min_re.abs().max(1.0);
    debug_assert!(separable(&locus, lo, cfg.margin));
    let k_n = nyquist_value(tf, cfg.locus_points)?;
    let hi = if k_n.is_finite() {
        // At the Nyquist gain the locus touches the real axis left of the
        // anchor, so no line through the anchor can win.
        k_n * (1.0 + 1e-9)
    } else {
        let mut probe = lo.max(1.0);
        let mut doublings = 0;
        while separable(&locus, probe, cfg.margin) {
            probe *= 2.0;
            doublings += 1;
            if doublings > 60 {
                return Ok(f64::INFINITY);
            }
        }
        probe
    };
    Ok(bisect_largest_true(
        |k| separable(&locus, k, cfg.margin),
        lo,
        hi,
        cfg.tol,
    ))
}

fn bisect_largest_true(mut pred: impl FnMut(f64) -> bool, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Outcome of the reduced (slope-constrained) off-axis criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedCriterion {
    /// Largest certified slope bound.
    pub k_ro: f64,
    /// False when every non-vacuous probe failed the criterion's sign
    /// preconditions, i.e. the value reflects only gains at which the locus
    /// never reaches `-1/k` and the criterion said nothing.
    pub applicable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ReducedOutcome {
    VacuousPass,
    SeparatedPass,
    SignFail,
    SeparationFail,
    NoReturnFail,
}

/// One reduced-criterion check at slope bound `k2`:
/// - vacuous pass when the locus never reaches the level `-1/k2`;
/// - otherwise `omega0` is the last upward crossing of `Re G` through the
///   level (bisected between grid neighbours), so that `Re G >= -1/k2` holds
///   on `[omega0, pi]`;
/// - the nonnegative-slope branch needs `Im G <= 0` on `[0, omega0]` and a
///   separating line through `(-1/k2, 0)` with angle in `[0, pi/2 - omega0/2]`
///   (cap inclusive); the mirrored branch swaps both signs.
fn reduced_check(
    locus: &[Complex64],
    w: &[f64],
    tf: &TransferFunction,
    k2: f64,
) -> ReducedOutcome {
    let level = -1.0 / k2;
    let min_re = locus.iter().map(|p| p.re).fold(f64::INFINITY, f64::min);
    if min_re >= level {
        return ReducedOutcome::VacuousPass;
    }
    let last_below = locus
        .iter()
        .rposition(|p| p.re < level)
        .expect("min_re < level guarantees a point below");
    if last_below == locus.len() - 1 {
        return ReducedOutcome::NoReturnFail;
    }
    let (mut lo, mut hi) = (w[last_below], w[last_below + 1]);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if tf.response_at(mid).re < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w0 = 0.5 * (lo + hi);

    // Grid points at or below omega0 are exactly the indices 0..=last_below.
    let (mut max_im, mut min_im) = (f64::NEG_INFINITY, f64::INFINITY);
    for p in &locus[..=last_below] {
        max_im = max_im.max(p.im);
        min_im = min_im.min(p.im);
    }
    let half_pi = std::f64::consts::FRAC_PI_2;

    let mut sign_ok = false;
    if max_im <= 1e-12 {
        sign_ok = true;
        let cap = half_pi - 0.5 * w0;
        if cap >= 0.0 {
            let (m, _) = max_min_dist(locus, level, 0.0, cap);
            if m > 0.0 {
                return ReducedOutcome::SeparatedPass;
            }
        }
    }
    if min_im >= -1e-12 {
        sign_ok = true;
        let cap = 0.5 * w0 - half_pi;
        if cap <= 0.0 {
            let (m, _) = max_min_dist(locus, level, cap, 0.0);
            if m > 0.0 {
                return ReducedOutcome::SeparatedPass;
            }
        }
    }
    if sign_ok {
        ReducedOutcome::SeparationFail
    } else {
        ReducedOutcome::SignFail
    }
}

/// Largest slope bound certified by the reduced off-axis criterion
/// (bisection to `cfg.tol`). Infinite when the criterion passes at every
/// probed gain.
pub fn offaxis_reduced(tf: &TransferFunction, cfg: &AnalysisConfig) -> Result<ReducedCriterion> {
    check_stable(tf, Domain::Discrete, "the reduced off-axis criterion")?;
    let grid = FrequencyGrid::linear(0.0, std::f64::consts::PI, cfg.locus_points.max(3))?;
    let locus = freq_response(tf, &grid)?;
    let w = grid.points();
    let min_re = locus.iter().map(|p| p.re).fold(f64::INFINITY, f64::min);
    if min_re >= 0.0 {
        return Ok(ReducedCriterion {
            k_ro: f64::INFINITY,
            applicable: true,
        });
    }

    let mut saw_nonvacuous_pass = false;
    let mut check = |k2: f64| {
        let out = reduced_check(&locus, w, tf, k2);
        if out == ReducedOutcome::SeparatedPass {
            saw_nonvacuous_pass = true;
        }
        matches!(out, ReducedOutcome::VacuousPass | ReducedOutcome::SeparatedPass)
    };

    let lo = 0.5 / min_re.abs().max(1.0);
    debug_assert!(matches!(
        reduced_check(&locus, w, tf, lo),
        ReducedOutcome::VacuousPass
    ));
    let k_n = nyquist_value(tf, cfg.locus_points)?;
    let hi = if k_n.is_finite() {
        k_n
    } else {
        let mut probe = lo.max(1.0);
        let mut doublings = 0;
        while check(probe) {
            probe *= 2.0;
            doublings += 1;
            if doublings > 60 {
                return Ok(ReducedCriterion {
                    k_ro: f64::INFINITY,
                    applicable: true,
                });
            }
        }
        probe
    };
    let k_ro = bisect_largest_true(&mut check, lo, hi, cfg.tol);
    Ok(ReducedCriterion {
        k_ro,
        applicable: saw_nonvacuous_pass,
    })
}

/// Reduced-criterion check at a single slope bound.
pub fn offaxis_reduced_at(tf: &TransferFunction, k2: f64, cfg: &AnalysisConfig) -> Result<bool> {
    check_stable(tf, Domain::Discrete, "the reduced off-axis criterion")?;
    if !(k2 > 0.0) || !k2.is_finite() {
        return Err(invalid("slope bound must be positive and finite"));
    }
    let grid = FrequencyGrid::linear(0.0, std::f64::consts::PI, cfg.locus_points.max(3))?;
    let locus = freq_response(tf, &grid)?;
    Ok(matches!(
        reduced_check(&locus, grid.points(), tf, k2),
        ReducedOutcome::VacuousPass | ReducedOutcome::SeparatedPass
    ))
}

/// Slope restrictions of a discrete plant, side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeReport {
    /// Nyquist value (linear destabilization bound).
    pub k_n: f64,
    /// Smallest gain at which the phase limitation precludes a multiplier.
    pub k_pl: f64,
    pub k_pl_inactive: bool,
    pub k_pl_non_monotone: bool,
    /// Reduced off-axis criterion bound.
    pub k_ro: f64,
    pub k_ro_applicable: bool,
    /// Bound the (refuted) direct off-axis transcription would certify.
    pub k_o: f64,
    /// Externally supplied multiplier-synthesis bound, if any.
    pub k_zf_ref: Option<f64>,
    /// Externally supplied counterexample slope (e.g. from simulation), if any.
    pub k_c_ref: Option<f64>,
    pub klass: NonlinearityClass,
}

/// Assembles the slope report for a stable discrete plant. Reference values
/// are attached, not recomputed.
pub fn slope_report(
    tf: &TransferFunction,
    klass: NonlinearityClass,
    k_zf_ref: Option<f64>,
    k_c_ref: Option<f64>,
    cfg: &AnalysisConfig,
) -> Result<SlopeReport> {
    check_stable(tf, Domain::Discrete, "the slope report")?;
    let kpl = k_pl(tf, klass, cfg)?;
    let reduced = offaxis_reduced(tf, cfg)?;
    let k_o = offaxis_conjecture_k(tf, cfg)?;
    Ok(SlopeReport {
        k_n: kpl.k_n,
        k_pl: kpl.k_pl,
        k_pl_inactive: kpl.inactive,
        k_pl_non_monotone: kpl.non_monotone,
        k_ro: reduced.k_ro,
        k_ro_applicable: reduced.applicable,
        k_o,
        k_zf_ref,
        k_c_ref,
        klass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn example_plant() -> TransferFunction {
        TransferFunction::discrete(vec![1.0, 0.0], vec![1.0, -1.8, 0.81]).unwrap()
    }

    fn ct_remark_plant() -> TransferFunction {
        TransferFunction::continuous(
            vec![1.0, 0.0, 0.0],
            vec![1.0, 1.002, 1.0, 0.998],
        )
        .unwrap()
    }

    #[test]
    fn ideal_phase_zero_for_tiny_gain_and_band() {
        let tf = example_plant();
        let grid = FrequencyGrid::linear(0.0, PI, 512).unwrap();
        let phases = ideal_phase(&tf, 1e-9, &grid).unwrap();
        assert!(phases.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn ideal_phase_nonzero_band_at_working_gain() {
        let tf = example_plant();
        let grid = FrequencyGrid::linear(0.0, PI, 2000).unwrap();
        let phases = ideal_phase(&tf, 1.5, &grid).unwrap();
        let active: Vec<f64> = grid
            .points()
            .iter()
            .zip(&phases)
            .filter(|&(_, &p)| p != 0.0)
            .map(|(&w, _)| w)
            .collect();
        assert!(!active.is_empty());
        // The nonzero band encloses the published certificate interval.
        assert!(*active.first().unwrap() < 0.7198);
        assert!(*active.last().unwrap() > 0.8996);
    }

    #[test]
    fn violation_found_at_published_gain() {
        let tf = example_plant();
        let cert = find_violation(&tf, 1.5, NonlinearityClass::NonOdd, &AnalysisConfig::default())
            .unwrap()
            .expect("k = 1.5 must violate");
        assert!(cert.required_angle_deg > cert.limit_angle_deg);
        assert_eq!(cert.sign, Sign::Negative);
        assert!((cert.interval.a() - 0.726).abs() < 5e-3);
        assert!((cert.interval.b() - 0.893).abs() < 5e-3);
        assert!((cert.limit_angle_deg - 67.17).abs() < 0.25);
    }

    #[test]
    fn no_violation_at_multiplier_synthesis_gain() {
        let tf = example_plant();
        for k in [1.3028, 1e-6] {
            assert!(
                find_violation(&tf, k, NonlinearityClass::NonOdd, &AnalysisConfig::default())
                    .unwrap()
                    .is_none(),
                "k = {k} must not violate"
            );
        }
    }

    #[test]
    fn k_pl_of_example_plant() {
        let tf = example_plant();
        let est = k_pl(&tf, NonlinearityClass::NonOdd, &AnalysisConfig::default()).unwrap();
        assert!(!est.inactive);
        assert!(!est.non_monotone);
        assert_relative_eq!(est.k_n, 3.61, max_relative = 1e-9);
        assert!((est.k_pl - 1.4603).abs() < 0.01, "k_pl = {}", est.k_pl);
        // Local bracketing contract.
        let cfg = AnalysisConfig::default();
        assert!(find_violation(&tf, est.k_pl + cfg.tol, NonlinearityClass::NonOdd, &cfg)
            .unwrap()
            .is_some());
        assert!(find_violation(&tf, est.k_pl - cfg.tol, NonlinearityClass::NonOdd, &cfg)
            .unwrap()
            .is_none());
    }

    #[test]
    fn odd_class_weakens_the_limitation() {
        let tf = example_plant();
        let cfg = AnalysisConfig::default();
        let non_odd = k_pl(&tf, NonlinearityClass::NonOdd, &cfg).unwrap();
        let odd = k_pl(&tf, NonlinearityClass::Odd, &cfg).unwrap();
        assert!(odd.inactive || odd.k_pl >= non_odd.k_pl);
    }

    #[test]
    fn phase_profile_reproduces_certificate_limit() {
        let tf = example_plant();
        let rows = phase_profile(&tf, 1.5, NonlinearityClass::NonOdd, &AnalysisConfig::default())
            .unwrap();
        assert_eq!(rows.len(), 2000);
        // Rows near the certificate edge see the full certificate-scale run,
        // so their limit matches the published 66.7137 degrees closely.
        let near_edge: Vec<&PhaseRow> = rows
            .iter()
            .filter(|r| r.ideal_phase_deg != 0.0 && r.limit_angle_deg < 67.0)
            .collect();
        assert!(!near_edge.is_empty());
        assert!(near_edge
            .iter()
            .any(|r| (r.limit_angle_deg - 66.7137).abs() < 0.05));
    }

    #[test]
    fn phase_profile_no_exceedance_below_critical_gain() {
        let tf = example_plant();
        let rows = phase_profile(
            &tf,
            1.3028,
            NonlinearityClass::NonOdd,
            &AnalysisConfig::default(),
        )
        .unwrap();
        assert!(rows
            .iter()
            .all(|r| r.ideal_phase_deg.abs() <= r.limit_angle_deg + 1e-12));
    }

    #[test]
    fn offaxis_ct_boundary_of_remark_plant() {
        let tf = ct_remark_plant();
        let cfg = AnalysisConfig::default();
        assert!(offaxis_ct(&tf, 3.9, &cfg).unwrap());
        assert!(!offaxis_ct(&tf, 4.0, &cfg).unwrap());
        let lag = TransferFunction::continuous(vec![1.0], vec![1.0, 1.0]).unwrap();
        for k in [0.5, 10.0, 1000.0] {
            assert!(offaxis_ct(&lag, k, &cfg).unwrap());
        }
    }

    #[test]
    fn offaxis_conjecture_value_of_example_plant() {
        let tf = example_plant();
        let k_o = offaxis_conjecture_k(&tf, &AnalysisConfig::default()).unwrap();
        assert!((k_o - 3.609946445260336).abs() < 1e-3, "k_o = {k_o}");
        assert!((k_o - 3.61).abs() < 0.01);
    }

    #[test]
    fn offaxis_conjecture_unit_delay_and_rhp_locus() {
        let cfg = AnalysisConfig::default();
        let delay = TransferFunction::discrete(vec![1.0], vec![1.0, 0.0]).unwrap();
        let k_o = offaxis_conjecture_k(&delay, &cfg).unwrap();
        assert!((k_o - 1.0).abs() < 1e-3, "k_o = {k_o}");
        // A pure gain keeps the locus at a single right-half-plane point.
        let flat = TransferFunction::discrete(vec![0.5], vec![1.0]).unwrap();
        assert!(offaxis_conjecture_k(&flat, &cfg).unwrap().is_infinite());
    }

    #[test]
    fn offaxis_reduced_value_of_example_plant() {
        let tf = example_plant();
        let red = offaxis_reduced(&tf, &AnalysisConfig::default()).unwrap();
        assert!(red.applicable);
        assert!((red.k_ro - 0.9004).abs() < 1e-3, "k_ro = {}", red.k_ro);
        assert!((red.k_ro - 0.8962).abs() < 0.01);
        assert!(offaxis_reduced_at(&tf, 0.5, &AnalysisConfig::default()).unwrap());
        assert!(!offaxis_reduced_at(&tf, 0.91, &AnalysisConfig::default()).unwrap());
    }

    #[test]
    fn slope_report_of_example_plant() {
        let tf = example_plant();
        let rep = slope_report(
            &tf,
            NonlinearityClass::NonOdd,
            Some(1.3028),
            Some(1.3666),
            &AnalysisConfig::default(),
        )
        .unwrap();
        assert_relative_eq!(rep.k_n, 3.61, max_relative = 1e-9);
        assert!((rep.k_pl - 1.4603).abs() < 0.01);
        assert!((rep.k_ro - 0.8962).abs() < 0.01);
        assert!((rep.k_o - 3.61).abs() < 0.01);
        assert!(rep.k_ro <= rep.k_n);
        assert!(rep.k_pl <= rep.k_n);
        // Published ordering: synthesis bound < counterexample slope < k_PL,
        // and the direct off-axis transcription overshoots k_PL (refuting it).
        assert!(rep.k_zf_ref.unwrap() < rep.k_c_ref.unwrap());
        assert!(rep.k_c_ref.unwrap() < rep.k_pl);
        assert!(rep.k_o > rep.k_pl);
    }
}
