//! Time-domain simulation of the Lur'e interconnection.
//!
//! The loop is `v = f + G w`, `w = -N(v) + g` with a linear plant `G`, a
//! memoryless slope-restricted nonlinearity `N`, and exogenous inputs
//! `f, g`. Continuous plants integrate the closed loop with fixed-step RK4;
//! discrete plants iterate the exact state recursion. Post-hoc flags report
//! settling, divergence, and detected periodic solutions — the latter being
//! the evidence counterexample constructions rest on.

use nalgebra::{Complex, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, numerical};
use crate::lti::{Domain, TransferFunction};
use crate::Result;

/// A single-input single-output state-space realization
/// `x' = A x + B u`, `y = C x + D u` (with `x' = x(t+1)` in discrete time).
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub d: f64,
    pub domain: Domain,
}

impl StateSpace {
    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    /// Frequency response `C (qI - A)^{-1} B + D` at `q = j omega` or
    /// `q = e^{j omega}` depending on domain.
    pub fn response_at(&self, omega: f64) -> Result<Complex64> {
        let q = match self.domain {
            Domain::Continuous => Complex64::new(0.0, omega),
            Domain::Discrete => Complex64::new(0.0, omega).exp(),
        };
        let n = self.n_states();
        if n == 0 {
            return Ok(Complex64::new(self.d, 0.0));
        }
        let mut m = DMatrix::<Complex<f64>>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex::new(-self.a[(i, j)], 0.0);
            }
            m[(i, i)] += q;
        }
        let rhs = DVector::from_iterator(n, self.b.iter().map(|&x| Complex::new(x, 0.0)));
        let x = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| numerical("qI - A is singular at the probe frequency"))?;
        let mut y = Complex64::new(self.d, 0.0);
        for i in 0..n {
            y += self.c[i] * x[i];
        }
        Ok(y)
    }
}

/// Controllable-canonical realization of a proper transfer function. A
/// biproper function gets its feedthrough split off into `D`; an improper one
/// is rejected.
pub fn tf_to_ss(tf: &TransferFunction) -> Result<StateSpace> {
    let nd = tf.den_degree();
    let nn = tf.num_degree();
    if nn > nd {
        return Err(invalid(
            "transfer function is improper: numerator degree exceeds denominator degree",
        ));
    }
    // Normalize to a monic denominator, dropping leading zeros.
    let den_lead_at = tf.den().len() - 1 - nd;
    let lead = tf.den()[den_lead_at];
    let den: Vec<f64> = tf.den()[den_lead_at..].iter().map(|c| c / lead).collect();
    let num_lead_at = tf.num().len().saturating_sub(nn + 1);
    let mut num: Vec<f64> = tf.num()[num_lead_at..].iter().map(|c| c / lead).collect();

    // Feedthrough: subtract d * den so the remainder is strictly proper.
    let mut d = 0.0;
    if nn == nd {
        d = num[0];
        for (ni, di) in num.iter_mut().zip(&den) {
            *ni -= d * di;
        }
        num.remove(0);
    }

    let n = nd;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        // den = [1, a_{n-1}, ..., a_0] descending; ascending index j holds
        // a_j = den[n - j].
        a[(n - 1, j)] = -den[n - j];
    }
    let mut b = DVector::<f64>::zeros(n);
    if n > 0 {
        b[n - 1] = 1.0;
    }
    let mut c = DVector::<f64>::zeros(n);
    for (pow, &coeff) in num.iter().rev().enumerate() {
        // num is descending; reversed iteration yields ascending powers.
        if pow < n {
            c[pow] = coeff;
        }
    }
    Ok(StateSpace {
        a,
        b,
        c,
        d,
        domain: tf.domain(),
    })
}

/// A continuous piecewise-linear, nondecreasing function with `N(0) = 0`:
/// node values at increasing breakpoints, linear extensions beyond them.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearNonlinearity {
    xs: Vec<f64>,
    ys: Vec<f64>,
    left_slope: f64,
    right_slope: f64,
}

impl PiecewiseLinearNonlinearity {
    /// General constructor; validates monotone breakpoints, nonnegative
    /// segment and extension slopes, and `N(0) = 0`.
    pub fn from_breakpoints(
        xs: Vec<f64>,
        ys: Vec<f64>,
        left_slope: f64,
        right_slope: f64,
    ) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(invalid("breakpoints and node values must pair up"));
        }
        if xs.is_empty() && left_slope != right_slope {
            return Err(invalid(
                "a breakpoint-free nonlinearity must have equal extension slopes",
            ));
        }
        if !xs.iter().chain(ys.iter()).all(|v| v.is_finite())
            || !left_slope.is_finite()
            || !right_slope.is_finite()
        {
            return Err(invalid("nonlinearity data must be finite"));
        }
        if xs.windows(2).any(|p| p[0] >= p[1]) {
            return Err(invalid("breakpoints must be strictly increasing"));
        }
        if left_slope < 0.0 || right_slope < 0.0 {
            return Err(invalid("extension slopes must be nonnegative"));
        }
        for (px, py) in xs.windows(2).zip(ys.windows(2)) {
            if (py[1] - py[0]) / (px[1] - px[0]) < 0.0 {
                return Err(invalid("segment slopes must be nonnegative"));
            }
        }
        let nl = PiecewiseLinearNonlinearity {
            xs,
            ys,
            left_slope,
            right_slope,
        };
        let scale = nl.ys.iter().fold(1.0f64, |m, y| m.max(y.abs()));
        if nl.eval(0.0).abs() > 1e-12 * scale {
            return Err(invalid("the nonlinearity must vanish at zero"));
        }
        Ok(nl)
    }

    /// `N(v) = clamp(slope * v, -limit, limit)`.
    pub fn saturation(slope: f64, limit: f64) -> Result<Self> {
        if !(limit > 0.0) {
            return Err(invalid("saturation limit must be positive"));
        }
        if slope == 0.0 {
            return Self::from_breakpoints(vec![], vec![], 0.0, 0.0);
        }
        if !(slope > 0.0) {
            return Err(invalid("saturation slope must be nonnegative"));
        }
        let knee = limit / slope;
        Self::from_breakpoints(vec![-knee, knee], vec![-limit, limit], 0.0, 0.0)
    }

    /// `N(v) = clamp(slope * v, lower, upper)` with `lower <= 0 <= upper`.
    pub fn asymmetric_saturation(slope: f64, lower: f64, upper: f64) -> Result<Self> {
        if !(slope > 0.0) {
            return Err(invalid("saturation slope must be positive"));
        }
        if !(lower <= 0.0 && 0.0 <= upper && lower < upper) {
            return Err(invalid(
                "saturation bounds must satisfy lower <= 0 <= upper with lower < upper",
            ));
        }
        Self::from_breakpoints(
            vec![lower / slope, upper / slope],
            vec![lower, upper],
            0.0,
            0.0,
        )
    }

    /// Deadzone of half-width `deadzone` followed by a slope and a symmetric
    /// saturation at `limit`:
    /// `N(v) = clamp(slope * dz(v), -limit, limit)` with
    /// `dz(v) = sign(v) * max(|v| - deadzone, 0)`.
    pub fn deadzone_saturation(slope: f64, deadzone: f64, limit: f64) -> Result<Self> {
        if !(slope > 0.0) || !(limit > 0.0) || !(deadzone >= 0.0) {
            return Err(invalid(
                "deadzone saturation needs slope > 0, limit > 0, deadzone >= 0",
            ));
        }
        if deadzone == 0.0 {
            return Self::saturation(slope, limit);
        }
        let knee = deadzone + limit / slope;
        Self::from_breakpoints(
            vec![-knee, -deadzone, deadzone, knee],
            vec![-limit, 0.0, 0.0, limit],
            0.0,
            0.0,
        )
    }

    pub fn eval(&self, v: f64) -> f64 {
        let m = self.xs.len();
        if m == 0 {
            return self.right_slope * v;
        }
        if v <= self.xs[0] {
            return self.ys[0] + self.left_slope * (v - self.xs[0]);
        }
        if v >= self.xs[m - 1] {
            return self.ys[m - 1] + self.right_slope * (v - self.xs[m - 1]);
        }
        let i = self.xs.partition_point(|&x| x <= v) - 1;
        let t = (v - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ys[i] + t * (self.ys[i + 1] - self.ys[i])
    }

    /// Largest segment or extension slope — the `k` of the sector `S[0, k]`
    /// the function certifiably lives in.
    pub fn max_slope(&self) -> f64 {
        let mut k = self.left_slope.max(self.right_slope);
        for (px, py) in self.xs.windows(2).zip(self.ys.windows(2)) {
            k = k.max((py[1] - py[0]) / (px[1] - px[0]));
        }
        k
    }

    /// True iff `N(-v) = -N(v)` at every breakpoint, segment midpoint, and an
    /// extension probe.
    pub fn is_odd(&self) -> bool {
        let mut probes: Vec<f64> = self.xs.iter().map(|x| x.abs()).collect();
        probes.extend(
            self.xs
                .windows(2)
                .map(|p| (0.5 * (p[0] + p[1])).abs()),
        );
        let reach = self.xs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        probes.push(2.0 * reach);
        let scale = self.ys.iter().fold(1.0f64, |m, y| m.max(y.abs()));
        probes
            .iter()
            .all(|&p| (self.eval(p) + self.eval(-p)).abs() <= 1e-12 * scale)
    }
}

/// Exogenous scalar signal.
#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    Zero,
    Constant { value: f64 },
    /// `amplitude` while `t <= until` (seconds or samples), then zero.
    Pulse { amplitude: f64, until: f64 },
    /// Discrete: `amplitude` at the first sample. Continuous: an initial
    /// state jump `x(0+) = x(0) + B * amplitude` (only supported on `g`).
    Impulse { amplitude: f64 },
    /// Explicit samples; zero past the end. Continuous simulation holds each
    /// sample for one step.
    Samples { values: Vec<f64> },
}

impl Signal {
    fn validate(&self) -> Result<()> {
        let finite = match self {
            Signal::Zero => true,
            Signal::Constant { value } => value.is_finite(),
            Signal::Pulse { amplitude, until } => amplitude.is_finite() && until.is_finite(),
            Signal::Impulse { amplitude } => amplitude.is_finite(),
            Signal::Samples { values } => values.iter().all(|v| v.is_finite()),
        };
        if finite {
            Ok(())
        } else {
            Err(invalid("signal parameters must be finite"))
        }
    }

    fn at_sample(&self, n: usize) -> f64 {
        match self {
            Signal::Zero => 0.0,
            Signal::Constant { value } => *value,
            Signal::Pulse { amplitude, until } => {
                if (n as f64) <= *until {
                    *amplitude
                } else {
                    0.0
                }
            }
            Signal::Impulse { amplitude } => {
                if n == 0 {
                    *amplitude
                } else {
                    0.0
                }
            }
            Signal::Samples { values } => values.get(n).copied().unwrap_or(0.0),
        }
    }

    /// Continuous-time value; `Impulse` contributes zero here because it is
    /// applied as a state jump.
    fn at_time(&self, t: f64, step: f64) -> f64 {
        match self {
            Signal::Zero => 0.0,
            Signal::Constant { value } => *value,
            Signal::Pulse { amplitude, until } => {
                if t <= *until {
                    *amplitude
                } else {
                    0.0
                }
            }
            Signal::Impulse { .. } => 0.0,
            Signal::Samples { values } => {
                let idx = (t / step).floor();
                if idx < 0.0 {
                    0.0
                } else {
                    values.get(idx as usize).copied().unwrap_or(0.0)
                }
            }
        }
    }
}

/// Simulation horizon and solver step.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Seconds (continuous) or samples (discrete).
    pub duration: f64,
    /// RK4 step in seconds; ignored by discrete plants.
    pub step: f64,
    /// Initial state in the realization produced by [`tf_to_ss`]; zero when
    /// absent.
    pub x0: Option<Vec<f64>>,
}

impl SimConfig {
    pub fn new(duration: f64, step: f64) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(invalid("duration must be positive and finite"));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(invalid("step must be positive and finite"));
        }
        Ok(SimConfig {
            duration,
            step,
            x0: None,
        })
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }
}

/// Trajectory and post-hoc classification flags.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Sample times (seconds) or indices (samples).
    pub t: Vec<f64>,
    /// Plant output `v = C x + f`.
    pub v: Vec<f64>,
    /// Nonlinearity output path `w = -N(v) + g`.
    pub w: Vec<f64>,
    /// State after the last recorded sample; restarting from it continues the
    /// trajectory (bit-exactly in discrete time).
    pub final_state: Vec<f64>,
    /// Final-quarter `max |v|` fell below `1e-3` of the trajectory's own peak.
    pub settled: bool,
    /// Detected period in samples, if any.
    pub periodic: Option<usize>,
    /// A state component left `[-1e12, 1e12]` (or became non-finite); the
    /// series is truncated at that point.
    pub diverged: bool,
}

const DIVERGENCE_BOUND: f64 = 1e12;
const MAX_STEPS: usize = 50_000_000;

fn state_escaped(x: &[f64]) -> bool {
    x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND)
}

/// Closed-loop simulation of `v = f + G w`, `w = -N(v) + g`.
///
/// Continuous: fixed-step RK4 on `x' = A x + B (-N(C x + f(t)) + g(t))`.
/// Discrete: exact recursion `x+ = A x + B w_n`, `v_n = C x_n + f_n`.
/// Requires a stable, strictly proper plant (feedthrough would close an
/// algebraic loop through `N`).
pub fn simulate(
    tf: &TransferFunction,
    nl: &PiecewiseLinearNonlinearity,
    f: &Signal,
    g: &Signal,
    cfg: &SimConfig,
) -> Result<SimResult> {
    if !tf.is_stable()? {
        return Err(invalid("simulation requires a stable plant"));
    }
    f.validate()?;
    g.validate()?;
    let ss = tf_to_ss(tf)?;
    if ss.d != 0.0 {
        return Err(invalid(
            "simulation requires a strictly proper plant (nonzero feedthrough closes an algebraic loop)",
        ));
    }
    let n = ss.n_states();
    let a: Vec<f64> = ss.a.transpose().iter().copied().collect(); // row-major
    let b: Vec<f64> = ss.b.iter().copied().collect();
    let c: Vec<f64> = ss.c.iter().copied().collect();
    let mut x: Vec<f64> = match &cfg.x0 {
        Some(x0) => {
            if x0.len() != n {
                return Err(invalid(format!(
                    "initial state has {} entries, realization has {n} states",
                    x0.len()
                )));
            }
            x0.clone()
        }
        None => vec![0.0; n],
    };

    let steps = match tf.domain() {
        Domain::Discrete => cfg.duration.round() as usize,
        Domain::Continuous => (cfg.duration / cfg.step).round() as usize,
    };
    if steps == 0 {
        return Err(invalid("duration too short for a single step"));
    }
    if steps > MAX_STEPS {
        return Err(invalid(format!(
            "simulation of {steps} steps exceeds the {MAX_STEPS}-step cap"
        )));
    }

    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).map(|(p, q)| p * q).sum() };
    let matvec = |m: &[f64], v: &[f64], out: &mut [f64]| {
        for i in 0..n {
            out[i] = dot(&m[i * n..(i + 1) * n], v);
        }
    };

    let mut t_series = Vec::with_capacity(steps + 1);
    let mut v_series = Vec::with_capacity(steps + 1);
    let mut w_series = Vec::with_capacity(steps + 1);
    let mut diverged = false;

    match tf.domain() {
        Domain::Discrete => {
            let mut ax = vec![0.0; n];
            for k in 0..steps {
                if state_escaped(&x) {
                    diverged = true;
                    break;
                }
                let v = dot(&c, &x) + f.at_sample(k);
                let w = -nl.eval(v) + g.at_sample(k);
                t_series.push(k as f64);
                v_series.push(v);
                w_series.push(w);
                matvec(&a, &x, &mut ax);
                for i in 0..n {
                    x[i] = ax[i] + b[i] * w;
                }
            }
        }
        Domain::Continuous => {
            let h = cfg.step;
            if let Signal::Impulse { amplitude } = f {
                if *amplitude != 0.0 {
                    return Err(invalid(
                        "impulse forcing is supported on g (state jump), not on f",
                    ));
                }
            }
            if let Signal::Impulse { amplitude } = g {
                for i in 0..n {
                    x[i] += b[i] * amplitude;
                }
            }
            let mut k1 = vec![0.0; n];
            let mut k2 = vec![0.0; n];
            let mut k3 = vec![0.0; n];
            let mut k4 = vec![0.0; n];
            let mut stage = vec![0.0; n];
            let deriv = |x: &[f64], t: f64, out: &mut [f64]| {
                let v = dot(&c, x) + f.at_time(t, h);
                let w = -nl.eval(v) + g.at_time(t, h);
                for i in 0..n {
                    out[i] = dot(&a[i * n..(i + 1) * n], x) + b[i] * w;
                }
            };
            for k in 0..=steps {
                let t = k as f64 * h;
                if state_escaped(&x) {
                    diverged = true;
                    break;
                }
                let v = dot(&c, &x) + f.at_time(t, h);
                t_series.push(t);
                v_series.push(v);
                w_series.push(-nl.eval(v) + g.at_time(t, h));
                if k == steps {
                    break;
                }
                deriv(&x, t, &mut k1);
                for i in 0..n {
                    stage[i] = x[i] + 0.5 * h * k1[i];
                }
                deriv(&stage, t + 0.5 * h, &mut k2);
                for i in 0..n {
                    stage[i] = x[i] + 0.5 * h * k2[i];
                }
                deriv(&stage, t + 0.5 * h, &mut k3);
                for i in 0..n {
                    stage[i] = x[i] + h * k3[i];
                }
                deriv(&stage, t + h, &mut k4);
                for i in 0..n {
                    x[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
    }

    let peak = v_series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tail_len = (v_series.len() / 4).max(1);
    let tail = v_series[v_series.len() - tail_len.min(v_series.len())..]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let settled = !diverged && (peak == 0.0 || tail < 1e-3 * peak);
    // A fifth of the series keeps the required 4x history margin.
    let window = (v_series.len() / 5).min(1024);
    let periodic = if diverged {
        None
    } else {
        detect_period(&v_series, window, 1e-3)
    };

    Ok(SimResult {
        t: t_series,
        v: v_series,
        w: w_series,
        final_state: x,
        settled,
        periodic,
        diverged,
    })
}

/// Smallest-mismatch period of the trailing window: for each candidate
/// `p in 2..=window`, the relative sup-norm mismatch between the last
/// `window` samples and the same window shifted `p` samples back is computed;
/// the minimizing `p` is returned iff its mismatch is below `tol` and the
/// window is non-constant. Needs `series.len() > 4 * window`.
pub fn detect_period(series: &[f64], window: usize, tol: f64) -> Option<usize> {
    let len = series.len();
    if window < 2 || len <= 4 * window {
        return None;
    }
    let seg = &series[len - window..];
    let scale = seg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale <= 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in seg {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi - lo <= 1e-9 * scale {
        return None;
    }
    let mut best: Option<(usize, f64)> = None;
    for p in 2..=window {
        let shifted = &series[len - window - p..len - p];
        let mismatch = seg
            .iter()
            .zip(shifted)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max)
            / scale;
        if best.map_or(true, |(_, m)| mismatch < m) {
            best = Some((p, mismatch));
        }
    }
    best.and_then(|(p, m)| if m < tol { Some(p) } else { None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn example_plant() -> TransferFunction {
        TransferFunction::discrete(vec![1.0, 0.0], vec![1.0, -1.8, 0.81]).unwrap()
    }

    fn resonant_plant() -> TransferFunction {
        TransferFunction::continuous(
            vec![1.0, 0.0, 0.0],
            vec![1.0, 1.0, 2.25, 1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn first_order_canonical_form() {
        let tf = TransferFunction::continuous(vec![3.0], vec![1.0, 2.0]).unwrap();
        let ss = tf_to_ss(&tf).unwrap();
        assert_eq!(ss.n_states(), 1);
        assert_relative_eq!(ss.a[(0, 0)], -2.0);
        assert_relative_eq!(ss.b[0], 1.0);
        assert_relative_eq!(ss.c[0], 3.0);
        assert_eq!(ss.d, 0.0);
    }

    #[test]
    fn realizations_match_transfer_functions_on_probe_grids() {
        for (tf, probes) in [
            (resonant_plant(), vec![0.1, 1.0, 10.0]),
            (example_plant(), vec![0.3, 1.0, 2.5]),
        ] {
            let ss = tf_to_ss(&tf).unwrap();
            for w in probes {
                let via_ss = ss.response_at(w).unwrap();
                let direct = tf.response_at(w);
                assert_relative_eq!(via_ss.re, direct.re, max_relative = 1e-9);
                assert_relative_eq!(via_ss.im, direct.im, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn resonant_realization_has_four_states_and_unit_mid_tap() {
        let ss = tf_to_ss(&resonant_plant()).unwrap();
        assert_eq!(ss.n_states(), 4);
        assert_eq!(ss.c.as_slice(), &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(ss.d, 0.0);
    }

    #[test]
    fn biproper_feedthrough_split() {
        let tf = TransferFunction::continuous(vec![1.0, 2.0], vec![1.0, 1.0]).unwrap();
        let ss = tf_to_ss(&tf).unwrap();
        assert_relative_eq!(ss.d, 1.0);
        let via_ss = ss.response_at(0.7).unwrap();
        let direct = tf.response_at(0.7);
        assert_relative_eq!(via_ss.re, direct.re, max_relative = 1e-12);
        assert_relative_eq!(via_ss.im, direct.im, max_relative = 1e-12);
        let nl = PiecewiseLinearNonlinearity::saturation(1.0, 1.0).unwrap();
        let cfg = SimConfig::new(1.0, 0.01).unwrap();
        assert!(simulate(&tf, &nl, &Signal::Zero, &Signal::Zero, &cfg).is_err());
    }

    #[test]
    fn improper_rejected() {
        let tf = TransferFunction::continuous(vec![1.0, 0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(tf_to_ss(&tf).is_err());
    }

    #[test]
    fn saturation_shapes() {
        let sat = PiecewiseLinearNonlinearity::saturation(2.1, 2.1).unwrap();
        assert_relative_eq!(sat.eval(0.5), 1.05);
        assert_relative_eq!(sat.eval(3.0), 2.1);
        assert_relative_eq!(sat.eval(-3.0), -2.1);
        assert_relative_eq!(sat.max_slope(), 2.1);
        assert!(sat.is_odd());

        let asym = PiecewiseLinearNonlinearity::asymmetric_saturation(1000.0, -1000.0, 0.0)
            .unwrap();
        assert_relative_eq!(asym.eval(-2.0), -1000.0);
        assert_relative_eq!(asym.eval(-0.5), -500.0);
        assert_relative_eq!(asym.eval(1.0), 0.0);
        assert!(!asym.is_odd());

        let dz = PiecewiseLinearNonlinearity::deadzone_saturation(1.3666, 0.232, 1.0).unwrap();
        assert_relative_eq!(dz.eval(0.232), 0.0);
        assert_relative_eq!(dz.eval(-0.232), 0.0);
        assert_relative_eq!(dz.eval(0.5), 1.3666 * (0.5 - 0.232));
        assert_relative_eq!(dz.eval(2.0), 1.0);
        assert!(dz.is_odd());
        assert_relative_eq!(dz.max_slope(), 1.3666);
    }

    #[test]
    fn invalid_nonlinearities_rejected() {
        // Decreasing segment.
        assert!(PiecewiseLinearNonlinearity::from_breakpoints(
            vec![-1.0, 1.0],
            vec![1.0, -1.0],
            0.0,
            0.0
        )
        .is_err());
        // Nonzero at the origin.
        assert!(PiecewiseLinearNonlinearity::from_breakpoints(
            vec![-1.0, 1.0],
            vec![0.0, 2.0],
            1.0,
            1.0
        )
        .is_err());
        // Negative extension slope.
        assert!(PiecewiseLinearNonlinearity::from_breakpoints(
            vec![-1.0, 1.0],
            vec![-1.0, 1.0],
            -0.1,
            0.0
        )
        .is_err());
    }

    #[test]
    fn zero_input_zero_state_stays_zero() {
        let cfg = SimConfig::new(200.0, 1.0).unwrap();
        let nl = PiecewiseLinearNonlinearity::saturation(2.1, 2.1).unwrap();
        let r = simulate(&example_plant(), &nl, &Signal::Zero, &Signal::Zero, &cfg).unwrap();
        assert!(r.v.iter().all(|&v| v == 0.0));
        assert!(r.w.iter().all(|&w| w == 0.0));
        assert!(r.settled);
        assert!(!r.diverged);
        assert_eq!(r.periodic, None);
    }

    #[test]
    fn saturation_kick_produces_period_six_orbit() {
        let cfg = SimConfig::new(2400.0, 1.0).unwrap();
        let nl = PiecewiseLinearNonlinearity::saturation(2.1, 2.1).unwrap();
        let r = simulate(
            &example_plant(),
            &nl,
            &Signal::Zero,
            &Signal::Impulse { amplitude: 8.0 },
            &cfg,
        )
        .unwrap();
        assert!(!r.diverged);
        assert!(!r.settled);
        let p = r.periodic.expect("kick must land on the periodic orbit");
        assert_eq!(p % 6, 0);
        let tail = &r.v[r.v.len() - 6..];
        let expect = [-2.8323, -1.2252, 2.1888, 2.8323, 1.2252, -2.1888];
        let aligned = expect
            .iter()
            .cycle()
            .skip(
                (0..6)
                    .min_by_key(|&s| {
                        let d: f64 = (0..6)
                            .map(|i| (tail[i] - expect[(i + s) % 6]).abs())
                            .sum();
                        (d * 1e9) as i64
                    })
                    .unwrap(),
            )
            .take(6);
        for (got, want) in tail.iter().zip(aligned) {
            assert!((got - want).abs() < 1e-3, "orbit mismatch: {tail:?}");
        }
    }

    #[test]
    fn discrete_restart_is_bit_exact() {
        let nl = PiecewiseLinearNonlinearity::saturation(2.1, 2.1).unwrap();
        let g = Signal::Impulse { amplitude: 8.0 };
        let full = simulate(
            &example_plant(),
            &nl,
            &Signal::Zero,
            &g,
            &SimConfig::new(400.0, 1.0).unwrap(),
        )
        .unwrap();
        let head = simulate(
            &example_plant(),
            &nl,
            &Signal::Zero,
            &g,
            &SimConfig::new(200.0, 1.0).unwrap(),
        )
        .unwrap();
        let tail = simulate(
            &example_plant(),
            &nl,
            &Signal::Zero,
            &Signal::Zero,
            &SimConfig::new(200.0, 1.0).unwrap().with_x0(head.final_state.clone()),
        )
        .unwrap();
        for i in 0..200 {
            assert_eq!(full.v[200 + i].to_bits(), tail.v[i].to_bits());
        }
    }

    #[test]
    fn decaying_series_is_not_periodic() {
        let tf = TransferFunction::discrete(vec![1.0], vec![1.0, -0.5]).unwrap();
        let nl = PiecewiseLinearNonlinearity::saturation(0.0, 1.0).unwrap();
        let r = simulate(
            &tf,
            &nl,
            &Signal::Zero,
            &Signal::Impulse { amplitude: 1.0 },
            &SimConfig::new(400.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!(r.settled);
        assert_eq!(r.periodic, None);
    }

    #[test]
    fn linear_gain_above_critical_gain_diverges() {
        // N(v) = 4v exactly (extension slopes carry the gain past the
        // breakpoints), which exceeds the plant's critical gain 3.61.
        let nl = PiecewiseLinearNonlinearity::from_breakpoints(
            vec![-1.0, 1.0],
            vec![-4.0, 4.0],
            4.0,
            4.0,
        )
        .unwrap();
        let r = simulate(
            &example_plant(),
            &nl,
            &Signal::Zero,
            &Signal::Impulse { amplitude: 1.0 },
            &SimConfig::new(2000.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!(r.diverged);
        assert!(r.v.len() < 2000);
    }

    #[test]
    fn unstable_plant_rejected() {
        let tf = TransferFunction::discrete(vec![1.0], vec![1.0, -1.5]).unwrap();
        let nl = PiecewiseLinearNonlinearity::saturation(1.0, 1.0).unwrap();
        assert!(simulate(
            &tf,
            &nl,
            &Signal::Zero,
            &Signal::Zero,
            &SimConfig::new(10.0, 1.0).unwrap()
        )
        .is_err());
    }

    #[test]
    fn continuous_pulse_run_is_bounded_and_consistent() {
        let nl = PiecewiseLinearNonlinearity::saturation(1.0, 1.0).unwrap();
        let cfg = SimConfig::new(5.0, 1e-3).unwrap();
        let tf = TransferFunction::continuous(vec![1.0], vec![1.0, 1.0]).unwrap();
        let r = simulate(
            &tf,
            &nl,
            &Signal::Zero,
            &Signal::Pulse {
                amplitude: 1.0,
                until: 2.0,
            },
            &cfg,
        )
        .unwrap();
        assert_eq!(r.v.len(), 5001);
        assert!(!r.diverged);
        // First-order lag driven to w = 1 - N(v): equilibrium at v = 0.5.
        let mid = r.v[(2.0 / 1e-3) as usize];
        assert!((mid - 0.5).abs() < 1e-2, "mid = {mid}");
    }

    #[test]
    fn detect_period_semantics() {
        let wave: Vec<f64> = (0..400)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / 25.0).sin())
            .collect();
        let p = detect_period(&wave, 80, 1e-3).unwrap();
        assert_eq!(p % 25, 0);
        let constant = vec![3.0; 400];
        assert_eq!(detect_period(&constant, 80, 1e-3), None);
        let short = vec![1.0; 10];
        assert_eq!(detect_period(&short, 80, 1e-3), None);
    }
}
