//! Rational transfer functions, frequency response, phase, stability and the
//! Nyquist value, for both the continuous (`s`) and discrete (`z`) domains.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, numerical};
use crate::Result;

/// Time domain of a transfer function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Continuous,
    Discrete,
}

/// A rational LTI system given by real polynomial coefficients in descending
/// powers of `s` (continuous) or `z` (discrete).
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    domain: Domain,
    num: Vec<f64>,
    den: Vec<f64>,
}

impl TransferFunction {
    /// Builds a transfer function, checking that both coefficient lists are
    /// nonempty and finite and that the leading denominator coefficient is
    /// nonzero.
    pub fn new(domain: Domain, num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if num.is_empty() || den.is_empty() {
            return Err(invalid("coefficient lists must be nonempty"));
        }
        if num.iter().chain(den.iter()).any(|c| !c.is_finite()) {
            return Err(invalid("coefficients must be finite"));
        }
        if den[0] == 0.0 {
            return Err(invalid("leading denominator coefficient must be nonzero"));
        }
        Ok(TransferFunction { domain, num, den })
    }

    pub fn continuous(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        Self::new(Domain::Continuous, num, den)
    }

    pub fn discrete(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        Self::new(Domain::Discrete, num, den)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    /// Degree of the numerator after stripping leading zero coefficients.
    pub fn num_degree(&self) -> usize {
        let lead = self.num.iter().position(|&c| c != 0.0);
        match lead {
            Some(i) => self.num.len() - 1 - i,
            None => 0,
        }
    }

    pub fn den_degree(&self) -> usize {
        let lead = self
            .den
            .iter()
            .position(|&c| c != 0.0)
            .expect("validated leading coefficient");
        self.den.len() - 1 - lead
    }

    /// `deg num <= deg den`; required of plants used in simulation.
    pub fn is_proper(&self) -> bool {
        self.num_degree() <= self.den_degree()
    }

    /// Evaluates `num(x)/den(x)` at a complex point by Horner's rule.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        horner(&self.num, x) / horner(&self.den, x)
    }

    /// Evaluates the frequency response at a single frequency (rad/s for the
    /// continuous domain; rad/sample for the discrete domain).
    pub fn response_at(&self, omega: f64) -> Complex64 {
        self.eval(self.boundary_point(omega))
    }

    fn boundary_point(&self, omega: f64) -> Complex64 {
        match self.domain {
            Domain::Continuous => Complex64::new(0.0, omega),
            Domain::Discrete => Complex64::from_polar(1.0, omega),
        }
    }

    /// Poles as roots of the denominator, via companion-matrix eigenvalues.
    pub fn poles(&self) -> Result<Vec<Complex64>> {
        let lead = self
            .den
            .iter()
            .position(|&c| c != 0.0)
            .expect("validated leading coefficient");
        let monic: Vec<f64> = self.den[lead..]
            .iter()
            .map(|c| c / self.den[lead])
            .collect();
        let deg = monic.len() - 1;
        if deg == 0 {
            return Ok(Vec::new());
        }
        // Companion matrix with the characteristic polynomial
        // x^deg + monic[1] x^(deg-1) + ... + monic[deg].
        let mut m = DMatrix::<f64>::zeros(deg, deg);
        for i in 1..deg {
            m[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            m[(i, deg - 1)] = -monic[deg - i];
        }
        Ok(m.complex_eigenvalues().iter().copied().collect())
    }

    /// Stability test: all poles in the open left half-plane (continuous) or
    /// the open unit disk (discrete). A pole within `1e-9` of the stability
    /// boundary counts as unstable, which is the conservative call for a
    /// stability tool.
    pub fn is_stable(&self) -> Result<bool> {
        const MARGIN: f64 = 1e-9;
        let poles = self.poles()?;
        Ok(match self.domain {
            Domain::Continuous => poles.iter().all(|p| p.re < -MARGIN),
            Domain::Discrete => poles.iter().all(|p| p.norm() < 1.0 - MARGIN),
        })
    }
}

fn horner(coeffs: &[f64], x: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        acc = acc * x + c;
    }
    acc
}

/// A strictly increasing list of evaluation frequencies.
///
/// Frequencies are rad/s for continuous systems and rad/sample for discrete
/// systems, where the evaluation routines additionally require the grid to
/// stay within `[0, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("frequency grid must be nonempty"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(invalid("frequency grid points must be finite"));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("frequency grid must be strictly increasing"));
        }
        Ok(FrequencyGrid { points })
    }

    /// `n >= 2` evenly spaced points covering `[lo, hi]` inclusively.
    pub fn linear(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(lo < hi) {
            return Err(invalid("linear grid needs lo < hi and at least 2 points"));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        points[n - 1] = hi;
        Self::new(points)
    }

    /// `n >= 2` logarithmically spaced points covering `[lo, hi]`, `lo > 0`.
    pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(lo < hi) || lo <= 0.0 {
            return Err(invalid(
                "log grid needs 0 < lo < hi and at least 2 points",
            ));
        }
        let (llo, lhi) = (lo.ln(), hi.ln());
        let step = (lhi - llo) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| (llo + step * i as f64).exp()).collect();
        points[0] = lo;
        points[n - 1] = hi;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn check_grid_for(tf: &TransferFunction, grid: &FrequencyGrid) -> Result<()> {
    if tf.domain() == Domain::Discrete {
        let pts = grid.points();
        if pts[0] < 0.0 || pts[pts.len() - 1] > std::f64::consts::PI {
            return Err(invalid("discrete frequency grid must lie within [0, pi]"));
        }
    }
    Ok(())
}

/// Frequency response of `tf` on `grid`: element `i` is `G` evaluated at
/// `s = j*omega_i` or `z = e^{j*omega_i}`.
///
/// A grid point where the denominator vanishes (pole on the boundary) is
/// reported as a numerical error rather than an infinite sample.
pub fn freq_response(tf: &TransferFunction, grid: &FrequencyGrid) -> Result<Vec<Complex64>> {
    check_grid_for(tf, grid)?;
    let mut out = Vec::with_capacity(grid.len());
    for &w in grid.points() {
        let v = tf.response_at(w);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(numerical(format!(
                "pole on the evaluation boundary at omega = {w}"
            )));
        }
        out.push(v);
    }
    Ok(out)
}

/// Phase of the frequency response in degrees: principal values followed by
/// a continuity-based unwrapping pass, so adjacent points differ by less
/// than 180 degrees on pole/zero-free grids.
pub fn phase_deg(tf: &TransferFunction, grid: &FrequencyGrid) -> Result<Vec<f64>> {
    let resp = freq_response(tf, grid)?;
    let mut out = Vec::with_capacity(resp.len());
    let mut offset = 0.0;
    let mut prev = 0.0;
    for (i, r) in resp.iter().enumerate() {
        if r.re == 0.0 && r.im == 0.0 {
            return Err(numerical(format!(
                "response is exactly zero at omega = {}; phase undefined",
                grid.points()[i]
            )));
        }
        let mut ph = r.arg().to_degrees() + offset;
        if i > 0 {
            while ph - prev > 180.0 {
                ph -= 360.0;
                offset -= 360.0;
            }
            while prev - ph > 180.0 {
                ph += 360.0;
                offset += 360.0;
            }
        }
        prev = ph;
        out.push(ph);
    }
    Ok(out)
}

/// The Nyquist value: the supremum of gains `k` such that `1 + tau*k*G`
/// stays away from zero for all `tau` in `[0,1]` over all frequencies.
///
/// Equivalently `min 1/|Re G|` over real-axis crossings with `Re G < 0`
/// (including the real-valued endpoint evaluations), or `+inf` when the
/// locus never touches the negative real axis. Crossings are located by
/// sign-change bracketing of `Im G` on a dense grid followed by bisection to
/// a tolerance of `1e-10` in `omega`.
pub fn nyquist_value(tf: &TransferFunction, grid_points: usize) -> Result<f64> {
    if !tf.is_stable()? {
        return Err(invalid("Nyquist value requires a stable transfer function"));
    }
    let n = grid_points.max(3);
    let grid = match tf.domain() {
        Domain::Discrete => FrequencyGrid::linear(0.0, std::f64::consts::PI, n)?,
        Domain::Continuous => {
            let mut pts = vec![0.0];
            pts.extend_from_slice(FrequencyGrid::log_spaced(1e-6, 1e6, n - 1)?.points());
            FrequencyGrid::new(pts)?
        }
    };
    let resp = freq_response(tf, &grid)?;
    let mut worst_re: Option<f64> = None;
    let mut note = |re: f64| {
        if re < 0.0 && worst_re.map_or(true, |w| re < w) {
            worst_re = Some(re);
        }
    };

    for (i, r) in resp.iter().enumerate() {
        // Grid points that are real up to roundoff (e.g. omega = pi, where
        // sin(pi) evaluates to ~1e-16) count as axis crossings.
        if r.im.abs() <= 1e-12 * (1.0 + r.norm()) {
            note(r.re);
        }
        if i + 1 < resp.len() && r.im * resp[i + 1].im < 0.0 {
            let w = crate::search::bisect_root(
                |x| tf.response_at(x).im,
                grid.points()[i],
                grid.points()[i + 1],
                1e-10,
            );
            note(tf.response_at(w).re);
        }
    }
    if tf.domain() == Domain::Continuous && tf.num_degree() == tf.den_degree() {
        // Biproper systems keep a real response in the limit omega -> inf.
        let lead_num = tf.num().iter().copied().find(|&c| c != 0.0).unwrap_or(0.0);
        let lead_den = tf.den()[tf.den().len() - 1 - tf.den_degree()];
        note(lead_num / lead_den);
    }
    Ok(worst_re.map_or(f64::INFINITY, |re| -1.0 / re))
}

/// Sampled necessary check of the multiplier inequality: true iff
/// `Re{ M * (1 + kG) } > margin` at every grid point.
///
/// This is a finite sampling of a continuum condition and therefore never a
/// proof of feasibility; it can only refute a candidate multiplier.
pub fn positivity_check(
    m_response: &[Complex64],
    tf: &TransferFunction,
    k: f64,
    grid: &FrequencyGrid,
    margin: f64,
) -> Result<bool> {
    if k <= 0.0 {
        return Err(invalid("positivity check requires k > 0"));
    }
    if m_response.len() != grid.len() {
        return Err(invalid(
            "multiplier response length must match the frequency grid",
        ));
    }
    let resp = freq_response(tf, grid)?;
    Ok(m_response
        .iter()
        .zip(resp.iter())
        .all(|(m, g)| (m * (1.0 + k * g)).re > margin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn example_plant() -> TransferFunction {
        TransferFunction::discrete(vec![1.0, 0.0], vec![1.0, -1.8, 0.81]).unwrap()
    }

    fn resonant_plant(xi: f64) -> TransferFunction {
        // s^2 / (s^2 + 2 xi s + 1)^2
        let den = vec![
            1.0,
            4.0 * xi,
            2.0 + 4.0 * xi * xi,
            4.0 * xi,
            1.0,
        ];
        TransferFunction::continuous(vec![1.0, 0.0, 0.0], den).unwrap()
    }

    #[test]
    fn response_of_example_plant_at_endpoints() {
        let g = example_plant();
        let r0 = g.response_at(0.0);
        assert_relative_eq!(r0.re, 100.0, max_relative = 1e-12);
        assert!(r0.im.abs() < 1e-12);
        let rpi = g.response_at(std::f64::consts::PI);
        assert_relative_eq!(rpi.re, -1.0 / 3.61, max_relative = 1e-12);
        assert!(rpi.im.abs() < 1e-12);
    }

    #[test]
    fn identity_response_is_one() {
        let g = TransferFunction::continuous(vec![1.0], vec![1.0]).unwrap();
        let grid = FrequencyGrid::linear(0.1, 10.0, 5).unwrap();
        for v in freq_response(&g, &grid).unwrap() {
            assert_relative_eq!(v.re, 1.0, max_relative = 1e-15);
            assert!(v.im.abs() < 1e-15);
        }
        for p in phase_deg(&g, &grid).unwrap() {
            assert!(p.abs() < 1e-12);
        }
    }

    #[test]
    fn delay_phase_is_minus_ninety() {
        let g = TransferFunction::discrete(vec![1.0], vec![1.0, 0.0]).unwrap();
        let grid = FrequencyGrid::new(vec![std::f64::consts::FRAC_PI_2]).unwrap();
        let ph = phase_deg(&g, &grid).unwrap();
        assert_relative_eq!(ph[0], -90.0, max_relative = 1e-12);
    }

    #[test]
    fn resonant_phase_exceeds_177_98_on_the_low_interval() {
        let g = resonant_plant(0.25);
        let grid = FrequencyGrid::linear(0.02249, 0.03511, 200).unwrap();
        for p in phase_deg(&g, &grid).unwrap() {
            assert!(p > 177.98, "phase {p} not above 177.98 deg");
        }
    }

    #[test]
    fn phase_unwrap_keeps_adjacent_jumps_small() {
        let g = resonant_plant(0.25);
        let grid = FrequencyGrid::log_spaced(1e-3, 1e3, 4000).unwrap();
        let ph = phase_deg(&g, &grid).unwrap();
        for w in ph.windows(2) {
            assert!((w[1] - w[0]).abs() < 180.0);
        }
    }

    #[test]
    fn nyquist_value_of_example_plant() {
        let k = nyquist_value(&example_plant(), 10_001).unwrap();
        assert_relative_eq!(k, 3.61, max_relative = 1e-9);
    }

    #[test]
    fn nyquist_value_of_first_order_lag_is_infinite() {
        let g = TransferFunction::continuous(vec![1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(nyquist_value(&g, 10_001).unwrap(), f64::INFINITY);
    }

    #[test]
    fn nyquist_value_of_pure_delay() {
        let g = TransferFunction::discrete(vec![1.0], vec![1.0, 0.0]).unwrap();
        assert_relative_eq!(nyquist_value(&g, 10_001).unwrap(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn nyquist_scales_inversely_with_gain() {
        let g = example_plant();
        let scaled =
            TransferFunction::discrete(vec![2.0, 0.0], vec![1.0, -1.8, 0.81]).unwrap();
        let k = nyquist_value(&g, 10_001).unwrap();
        let ks = nyquist_value(&scaled, 10_001).unwrap();
        assert_relative_eq!(ks, k / 2.0, max_relative = 1e-9);
    }

    #[test]
    fn nyquist_rejects_unstable_plants() {
        let g = TransferFunction::continuous(vec![1.0], vec![1.0, -1.0]).unwrap();
        assert!(nyquist_value(&g, 101).is_err());
    }

    #[test]
    fn stability_margins() {
        let stable = example_plant();
        assert!(stable.is_stable().unwrap());
        let marginal = TransferFunction::discrete(vec![1.0], vec![1.0, -1.0]).unwrap();
        assert!(!marginal.is_stable().unwrap());
        let ct = TransferFunction::continuous(vec![1.0], vec![1.0, 0.5, 1.0]).unwrap();
        assert!(ct.is_stable().unwrap());
    }

    #[test]
    fn conjugate_symmetry_on_mirrored_grids() {
        let g = resonant_plant(0.25);
        let pos = FrequencyGrid::linear(0.1, 5.0, 50).unwrap();
        let neg = FrequencyGrid::linear(-5.0, -0.1, 50).unwrap();
        let rp = freq_response(&g, &pos).unwrap();
        let rn = freq_response(&g, &neg).unwrap();
        for (a, b) in rp.iter().zip(rn.iter().rev()) {
            assert_relative_eq!(a.re, b.re, max_relative = 1e-12);
            assert_relative_eq!(a.im, -b.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn positivity_check_examples() {
        let g = example_plant();
        let grid = FrequencyGrid::linear(0.0, std::f64::consts::PI, 2001).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); grid.len()];
        // k beyond the Nyquist value makes 1 + kG(-1) negative.
        assert!(!positivity_check(&ones, &g, 3.7, &grid, 0.0).unwrap());
        // A small gain keeps 1 + kG positive-real on the grid.
        assert!(positivity_check(&ones, &g, 0.005, &grid, 0.0).unwrap());
        // Zero plant with an FIR multiplier: Re M = 1 - 0.9 cos(omega) > 0.
        let zero = TransferFunction::discrete(vec![0.0], vec![1.0]).unwrap();
        let fir: Vec<Complex64> = grid
            .points()
            .iter()
            .map(|&w| Complex64::new(1.0, 0.0) - 0.9 * Complex64::from_polar(1.0, -w))
            .collect();
        assert!(positivity_check(&fir, &zero, 1.0, &grid, 0.0).unwrap());
    }

    #[test]
    fn pole_on_boundary_is_reported() {
        let g = TransferFunction::discrete(vec![1.0], vec![1.0, -1.0]).unwrap();
        let grid = FrequencyGrid::new(vec![0.0]).unwrap();
        assert!(freq_response(&g, &grid).is_err());
    }

    #[test]
    fn discrete_grid_bounds_are_enforced() {
        let g = example_plant();
        let grid = FrequencyGrid::new(vec![1.0, 4.0]).unwrap();
        assert!(freq_response(&g, &grid).is_err());
    }

    #[test]
    fn improper_detection() {
        let g = TransferFunction::continuous(vec![1.0, 0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(!g.is_proper());
        assert_eq!(g.num_degree(), 2);
        assert_eq!(g.den_degree(), 1);
    }
}
