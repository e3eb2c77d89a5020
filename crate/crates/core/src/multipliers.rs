//! Discrete FIR and continuous impulse-train Zames-Falb multipliers.
//!
//! A multiplier has the form `M = 1 - H` where `H` is a finite impulse train
//! with total weight `sum |h_i| < 1` (and `h_0 = 0` in the discrete case).
//! When all weights are nonnegative the multiplier preserves positivity for
//! every slope-restricted nonlinearity; mixed-sign weights are admissible
//! only for odd nonlinearities.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::invalid;
use crate::lti::FrequencyGrid;
use crate::Result;

/// Class membership of a multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MultiplierClass {
    /// All weights nonnegative: valid for general slope-restricted
    /// nonlinearities (and a fortiori for odd ones).
    NonOdd,
    /// Mixed-sign weights with total weight below one: valid only for odd
    /// nonlinearities.
    Odd,
    /// Not a multiplier: total weight at least one, or a nonzero weight at
    /// tap zero.
    Invalid,
}

/// Discrete multiplier `M(z) = 1 - sum_n h_n z^{-n}` with finitely many taps.
///
/// Tap indices may be negative (anticausal part). The representation admits
/// invalid weight configurations so that candidates can be inspected;
/// [`FirMultiplier::klass`] reports whether the invariants hold and
/// [`FirMultiplier::validate`] turns an invalid configuration into an error.
#[derive(Debug, Clone, PartialEq)]
pub struct FirMultiplier {
    taps: BTreeMap<i64, f64>,
}

impl FirMultiplier {
    /// Collects taps, dropping explicit zero weights.
    pub fn new(taps: impl IntoIterator<Item = (i64, f64)>) -> Self {
        let taps = taps.into_iter().filter(|&(_, h)| h != 0.0).collect();
        FirMultiplier { taps }
    }

    /// The identity multiplier `M = 1`.
    pub fn identity() -> Self {
        FirMultiplier {
            taps: BTreeMap::new(),
        }
    }

    /// Tap pairs `(n, h_n)` in increasing tap order.
    pub fn taps(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.taps.iter().map(|(&n, &h)| (n, h))
    }

    pub fn l1_norm(&self) -> f64 {
        self.taps.values().map(|h| h.abs()).sum()
    }

    pub fn klass(&self) -> MultiplierClass {
        if self.taps.contains_key(&0) || self.l1_norm() >= 1.0 {
            MultiplierClass::Invalid
        } else if self.taps.values().all(|&h| h >= 0.0) {
            MultiplierClass::NonOdd
        } else {
            MultiplierClass::Odd
        }
    }

    /// Errors unless the multiplier invariants hold (`h_0 = 0`, total weight
    /// below one).
    pub fn validate(&self) -> Result<()> {
        match self.klass() {
            MultiplierClass::Invalid => Err(invalid(
                "FIR multiplier requires h_0 = 0 and sum |h_n| < 1",
            )),
            _ => Ok(()),
        }
    }

    /// `M(e^{j omega})` by exact trigonometric evaluation.
    pub fn response_at(&self, omega: f64) -> Complex64 {
        let mut m = Complex64::new(1.0, 0.0);
        for (&n, &h) in &self.taps {
            m -= h * Complex64::from_polar(1.0, -omega * n as f64);
        }
        m
    }

    pub fn response_on(&self, grid: &FrequencyGrid) -> Vec<Complex64> {
        grid.points().iter().map(|&w| self.response_at(w)).collect()
    }
}

/// Continuous multiplier `M(j omega) = 1 - sum_i h_i e^{-j omega t_i}` built
/// from finitely many impulses `h_i * delta(t - t_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseMultiplier {
    impulses: Vec<(f64, f64)>,
}

impl ImpulseMultiplier {
    /// Collects `(time, weight)` impulses, dropping zero weights.
    pub fn new(impulses: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let impulses: Vec<(f64, f64)> = impulses
            .into_iter()
            .filter(|&(_, h)| h != 0.0)
            .collect();
        if impulses
            .iter()
            .any(|&(t, h)| !t.is_finite() || !h.is_finite())
        {
            return Err(invalid("impulse times and weights must be finite"));
        }
        Ok(ImpulseMultiplier { impulses })
    }

    pub fn impulses(&self) -> &[(f64, f64)] {
        &self.impulses
    }

    pub fn l1_norm(&self) -> f64 {
        self.impulses.iter().map(|(_, h)| h.abs()).sum()
    }

    pub fn klass(&self) -> MultiplierClass {
        if self.l1_norm() >= 1.0 {
            MultiplierClass::Invalid
        } else if self.impulses.iter().all(|&(_, h)| h >= 0.0) {
            MultiplierClass::NonOdd
        } else {
            MultiplierClass::Odd
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.klass() {
            MultiplierClass::Invalid => {
                Err(invalid("impulse multiplier requires sum |h_i| < 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn response_at(&self, omega: f64) -> Complex64 {
        let mut m = Complex64::new(1.0, 0.0);
        for &(t, h) in &self.impulses {
            m -= h * Complex64::from_polar(1.0, -omega * t);
        }
        m
    }

    pub fn response_on(&self, grid: &FrequencyGrid) -> Vec<Complex64> {
        grid.points().iter().map(|&w| self.response_at(w)).collect()
    }
}
