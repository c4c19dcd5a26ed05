//! Quantum recurrence-time bounds.
//!
//! The one-particle correlation matrix returns ϵ-close to its initial value
//! only when every phase (ε_ν − ε_ν′)t/2ħ over the d_F nonzero coefficient
//! pairs is close to a multiple of π.  Sweeping a d_F-dimensional ball
//! through the integer lattice gives
//!
//! t_± = (2πħ/Δε) d_F^{−1/2} (4π|C|²/ϵ)^{(d_F−1)/2} Γ((d_F+1)/2)
//!
//! with |C| the smallest (t₋) or largest (t₊) amplitude.  These are
//! heuristic bounds on the recurrence time, not certified ones.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mathcore::ln_gamma;

/// Past this d_F the bounds are only reported in log space.
pub const LOG_SPACE_THRESHOLD: u64 = 300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceInput {
    /// Number of nonzero off-diagonal coefficient pairs.
    pub d_f: u64,
    pub c_min: f64,
    pub c_max: f64,
    /// Root-mean-square level difference over the nonzero pairs.
    pub delta_eps: f64,
    /// Recurrence tolerance ϵ.
    pub eps_rec: f64,
    pub hbar: f64,
}

impl RecurrenceInput {
    pub fn validate(&self) -> Result<()> {
        if self.d_f == 0 {
            return Err(Error::Domain("d_F must be ≥ 1".into()));
        }
        if !(self.c_min > 0.0) || !(self.c_max >= self.c_min) || !self.c_max.is_finite() {
            return Err(Error::Domain(format!(
                "need 0 < |C|_min ≤ |C|_max, got {} and {}",
                self.c_min, self.c_max
            )));
        }
        for (name, v) in [("Δε", self.delta_eps), ("ϵ", self.eps_rec), ("ħ", self.hbar)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceBounds {
    pub ln_t_minus: f64,
    pub ln_t_plus: f64,
    /// Linear values; `None` when only the logarithm is reported.
    pub t_minus: Option<f64>,
    pub t_plus: Option<f64>,
}

impl RecurrenceBounds {
    pub fn log10_t_minus(&self) -> f64 {
        self.ln_t_minus / std::f64::consts::LN_10
    }

    pub fn log10_t_plus(&self) -> f64 {
        self.ln_t_plus / std::f64::consts::LN_10
    }
}

fn ln_bound(input: &RecurrenceInput, c: f64) -> Result<f64> {
    let d = input.d_f as f64;
    Ok((2.0 * PI * input.hbar / input.delta_eps).ln() - 0.5 * d.ln()
        + 0.5 * (d - 1.0) * (4.0 * PI * c * c / input.eps_rec).ln()
        + ln_gamma(0.5 * (d + 1.0))?)
}

/// Γ(k/2) for k ≥ 1 by the product recurrence, exact at k = 2.
fn gamma_half_integer(k: u64) -> f64 {
    let (mut g, mut x) = if k % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while x < 0.5 * k as f64 - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

fn linear_bound(input: &RecurrenceInput, c: f64) -> Option<f64> {
    let d = input.d_f as f64;
    let power = (4.0 * PI * c * c / input.eps_rec).powf(0.5 * (d - 1.0));
    let gamma = gamma_half_integer(input.d_f + 1);
    let t = 2.0 * PI * input.hbar / input.delta_eps / d.sqrt() * power * gamma;
    (t.is_finite() && t > 0.0).then_some(t)
}

/// Both bounds in linear space (while d_F ≤ 300 and the value is
/// representable) and always in log space.
pub fn recurrence_bounds(input: &RecurrenceInput) -> Result<RecurrenceBounds> {
    input.validate()?;
    let ln_t_minus = ln_bound(input, input.c_min)?;
    let ln_t_plus = ln_bound(input, input.c_max)?;
    let (t_minus, t_plus) = if input.d_f <= LOG_SPACE_THRESHOLD {
        (linear_bound(input, input.c_min), linear_bound(input, input.c_max))
    } else {
        (None, None)
    };
    Ok(RecurrenceBounds {
        ln_t_minus,
        ln_t_plus,
        t_minus,
        t_plus,
    })
}

/// Extract d_F, the amplitude range and the RMS level difference from a
/// square coefficient table `c[ν][ν′]` over levels `energies`.
pub fn derive_input(c: &[Vec<f64>], energies: &[f64], eps_rec: f64, hbar: f64) -> Result<RecurrenceInput> {
    let n = energies.len();
    if c.len() != n || c.iter().any(|row| row.len() != n) {
        return Err(Error::Domain(format!("coefficient table must be {n}×{n}")));
    }
    if c.iter().flatten().chain(energies).any(|v| !v.is_finite()) {
        return Err(Error::Domain("coefficient table and energies must be finite".into()));
    }
    let mut d_f = 0u64;
    let (mut c_min, mut c_max, mut sq) = (f64::INFINITY, 0.0f64, 0.0);
    for (i, row) in c.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if i != j && v != 0.0 {
                d_f += 1;
                c_min = c_min.min(v.abs());
                c_max = c_max.max(v.abs());
                sq += (energies[i] - energies[j]).powi(2);
            }
        }
    }
    if d_f == 0 {
        return Err(Error::Precondition(
            "no nonzero off-diagonal coefficients: the state has no recurrence structure".into(),
        ));
    }
    let input = RecurrenceInput {
        d_f,
        c_min,
        c_max,
        delta_eps: (sq / d_f as f64).sqrt(),
        eps_rec,
        hbar,
    };
    input.validate()?;
    Ok(input)
}

/// I(t) = Σ_{ν≠ν′} |C_{νν′}|² sin²((ε_ν − ε_ν′)t/2ħ); the correlation matrix
/// is within ϵ of its initial value when 4I(t) ≤ ϵ.
pub fn return_distance(c: &[Vec<f64>], energies: &[f64], t: f64, hbar: f64) -> f64 {
    let mut total = 0.0;
    for (i, row) in c.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if i != j && v != 0.0 {
                total += v * v * ((energies[i] - energies[j]) * t / (2.0 * hbar)).sin().powi(2);
            }
        }
    }
    total
}
