//! Units, the cavity model, Fermi–Dirac statistics and the thermal solver.
//!
//! Everything carries `hbar` and `mass` explicitly (both default to 1).  The
//! continuous cavity spectrum is `dm = ρ dε` with `ρ = V m / (2π ħ²)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mathcore::{brent, integrate, newton2d, QuadratureSpec};

/// Number of temperatures above the top of the Fermi sea at which
/// occupations are treated as zero (e^{-60} ≈ 1e-26).
pub(crate) const TAIL_WIDTH: f64 = 60.0;

/// Physical constants and geometry of the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityModel {
    pub hbar: f64,
    pub mass: f64,
    /// Area V of the two-dimensional cavity.
    pub volume: f64,
    /// Linear size L; `volume / linear_size²` is the recorded shape factor.
    pub linear_size: f64,
    /// Lattice constant a of the discretised subsystem (0 = continuum).
    pub lattice_a: f64,
    /// Order-one factor c in the Lyapunov exponent λ_L = c √(ε/m) / L.
    pub lyapunov_prefactor: f64,
}

impl CavityModel {
    /// Cavity of area `volume` and linear size `linear_size` with ħ = m = 1.
    pub fn new(volume: f64, linear_size: f64) -> Result<Self> {
        let c = Self {
            hbar: 1.0,
            mass: 1.0,
            volume,
            linear_size,
            lattice_a: 0.0,
            lyapunov_prefactor: 1.0,
        };
        c.validate()?;
        Ok(c)
    }

    /// Square cavity of side `side` (shape factor 1).
    pub fn square(side: f64) -> Result<Self> {
        Self::new(side * side, side)
    }

    pub fn with_units(mut self, hbar: f64, mass: f64) -> Result<Self> {
        self.hbar = hbar;
        self.mass = mass;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lattice(mut self, lattice_a: f64) -> Result<Self> {
        self.lattice_a = lattice_a;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lyapunov_prefactor(mut self, c: f64) -> Result<Self> {
        self.lyapunov_prefactor = c;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("volume", self.volume),
            ("linear_size", self.linear_size),
            ("lyapunov_prefactor", self.lyapunov_prefactor),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("cavity {name} must be positive and finite, got {v}")));
            }
        }
        if !(self.lattice_a.is_finite() && self.lattice_a >= 0.0) {
            return Err(Error::Domain(format!("lattice_a must be ≥ 0, got {}", self.lattice_a)));
        }
        Ok(())
    }

    /// V / L², the explicit factor relating the area to the linear size.
    pub fn shape_factor(&self) -> f64 {
        self.volume / (self.linear_size * self.linear_size)
    }

    /// Average single-particle density of states ρ = V m / (2π ħ²).
    pub fn spectral_density(&self) -> f64 {
        self.volume * self.mass / (2.0 * PI * self.hbar * self.hbar)
    }

    /// Reduced de Broglie wavelength λ_ε = ħ / √(2 m ε).
    pub fn reduced_wavelength(&self, eps: f64) -> f64 {
        self.hbar / (2.0 * self.mass * eps).sqrt()
    }

    /// Thermal de Broglie wavelength λ_T = √(2π ħ² / (m T)).
    pub fn thermal_wavelength(&self, temperature: f64) -> f64 {
        (2.0 * PI * self.hbar * self.hbar / (self.mass * temperature)).sqrt()
    }

    /// Largest lattice constant for which the lattice still resolves every
    /// occupied wavelength: the Brillouin-zone edge energy π²ħ²/(2ma²) must
    /// lie at least one temperature above the top of the Fermi sea,
    /// max(μ, 0) + T.  Beyond it aliased momenta can push the lattice symbol
    /// above 1.
    pub fn max_lattice_spacing(&self, ts: &ThermalState) -> f64 {
        let top = ts.chemical_potential.max(0.0) + ts.temperature;
        PI * self.hbar / (2.0 * self.mass * top).sqrt()
    }
}

/// Thermal parameters together with the (E, N) they reproduce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    pub temperature: f64,
    pub chemical_potential: f64,
    pub energy: f64,
    pub particles: f64,
}

impl ThermalState {
    /// State at (T, μ) on `spectrum`, with E and N evaluated from it.
    pub fn at(spectrum: &SpectrumModel, temperature: f64, chemical_potential: f64) -> Result<Self> {
        check_parameters(temperature, chemical_potential)?;
        Ok(Self {
            temperature,
            chemical_potential,
            energy: energy(spectrum, temperature, chemical_potential)?,
            particles: particle_number(spectrum, temperature, chemical_potential)?,
        })
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    /// α = −μ/T.
    pub fn alpha(&self) -> f64 {
        -self.chemical_potential / self.temperature
    }

    pub fn validate(&self) -> Result<()> {
        check_parameters(self.temperature, self.chemical_potential)
    }
}

fn check_parameters(temperature: f64, chemical_potential: f64) -> Result<()> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::Domain(format!("temperature must be positive, got {temperature}")));
    }
    if !chemical_potential.is_finite() {
        return Err(Error::Domain(format!("chemical potential must be finite, got {chemical_potential}")));
    }
    Ok(())
}

/// Single-particle spectrum.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumModel {
    /// `dm = ρ dε` on ε > 0.
    Continuous2d { rho: f64 },
    /// Finite set of strictly ascending levels.
    Discrete { levels: Vec<f64> },
    /// Unbounded ladder ε_ν = ν·spacing, ν = 1, 2, …
    Harmonic { spacing: f64 },
}

impl SpectrumModel {
    pub fn continuous(cavity: &CavityModel) -> Self {
        SpectrumModel::Continuous2d {
            rho: cavity.spectral_density(),
        }
    }

    pub fn harmonic() -> Self {
        SpectrumModel::Harmonic { spacing: 1.0 }
    }

    pub fn discrete(levels: Vec<f64>) -> Result<Self> {
        let s = SpectrumModel::Discrete { levels };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpectrumModel::Continuous2d { rho } => {
                if !(rho.is_finite() && *rho > 0.0) {
                    return Err(Error::Domain(format!("spectral density must be positive, got {rho}")));
                }
            }
            SpectrumModel::Harmonic { spacing } => {
                if !(spacing.is_finite() && *spacing > 0.0) {
                    return Err(Error::Domain(format!("level spacing must be positive, got {spacing}")));
                }
            }
            SpectrumModel::Discrete { levels } => {
                if levels.is_empty() {
                    return Err(Error::Domain("discrete spectrum has no levels".into()));
                }
                if levels.iter().any(|e| !e.is_finite()) || levels.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Domain("discrete levels must be finite and strictly ascending".into()));
                }
            }
        }
        Ok(())
    }
}

/// Fermi–Dirac occupation 1/(e^{(ε−μ)/T} + 1), evaluated without overflow
/// and with full relative accuracy in both tails.
pub fn fermi_dirac(eps: f64, ts: &ThermalState) -> f64 {
    occupation(eps, ts.temperature, ts.chemical_potential)
}

/// [`fermi_dirac`] on bare parameters.
pub fn occupation(eps: f64, temperature: f64, chemical_potential: f64) -> f64 {
    let x = (eps - chemical_potential) / temperature;
    if x.is_nan() {
        // T → 0⁺ at ε = μ.
        return 0.5;
    }
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Binary entropy −n ln n − (1−n) ln(1−n) of a level at reduced energy
/// x = (ε − μ)/T, stable in both tails.
pub fn level_entropy(x: f64) -> f64 {
    let a = x.abs();
    let e = (-a).exp();
    e.ln_1p() + a * e / (1.0 + e)
}

/// Binary entropy of an occupation, clamped to [0, 1].
pub fn binary_entropy(n: f64) -> f64 {
    let n = n.clamp(0.0, 1.0);
    let mut s = 0.0;
    if n > 0.0 {
        s -= n * n.ln();
    }
    if n < 1.0 {
        s -= (1.0 - n) * (-n).ln_1p();
    }
    s
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn physics_quad() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-300,
        rel_tol: 1e-13,
        max_subdivisions: 4000,
    }
}

/// Integrate `g(ε)·(weight)` over the thermally relevant window of a
/// continuous spectrum, split at μ where the occupation changes fastest.
pub(crate) fn thermal_window_integral<F: FnMut(f64) -> f64>(
    mut g: F,
    temperature: f64,
    chemical_potential: f64,
    lower: f64,
) -> Result<f64> {
    let top = chemical_potential.max(lower) + TAIL_WIDTH * temperature;
    let mut total = 0.0;
    if chemical_potential > lower {
        total += integrate(&mut g, lower, chemical_potential, physics_quad())?;
        total += integrate(&mut g, chemical_potential, top, physics_quad())?;
    } else {
        total += integrate(&mut g, lower, top, physics_quad())?;
    }
    Ok(total)
}

fn harmonic_sum<F: FnMut(f64) -> f64>(spacing: f64, temperature: f64, chemical_potential: f64, mut g: F) -> f64 {
    let top = chemical_potential.max(0.0) + TAIL_WIDTH * temperature;
    let count = (top / spacing).ceil().max(1.0) as usize + 1;
    (1..=count).map(|nu| g(nu as f64 * spacing)).sum()
}

/// N(T, μ) = ∫ dm n_FD (or the discrete sum).
pub fn particle_number(spectrum: &SpectrumModel, temperature: f64, chemical_potential: f64) -> Result<f64> {
    spectrum.validate()?;
    check_parameters(temperature, chemical_potential)?;
    Ok(match spectrum {
        SpectrumModel::Continuous2d { rho } => rho * temperature * softplus(chemical_potential / temperature),
        SpectrumModel::Harmonic { spacing } => harmonic_sum(*spacing, temperature, chemical_potential, |e| {
            occupation(e, temperature, chemical_potential)
        }),
        SpectrumModel::Discrete { levels } => levels
            .iter()
            .map(|&e| occupation(e, temperature, chemical_potential))
            .sum(),
    })
}

/// E(T, μ) = ∫ dm ε n_FD (or the discrete sum).
pub fn energy(spectrum: &SpectrumModel, temperature: f64, chemical_potential: f64) -> Result<f64> {
    spectrum.validate()?;
    check_parameters(temperature, chemical_potential)?;
    Ok(match spectrum {
        SpectrumModel::Continuous2d { rho } => {
            rho * thermal_window_integral(
                |e| e * occupation(e, temperature, chemical_potential),
                temperature,
                chemical_potential,
                0.0,
            )?
        }
        SpectrumModel::Harmonic { spacing } => harmonic_sum(*spacing, temperature, chemical_potential, |e| {
            e * occupation(e, temperature, chemical_potential)
        }),
        SpectrumModel::Discrete { levels } => levels
            .iter()
            .map(|&e| e * occupation(e, temperature, chemical_potential))
            .sum(),
    })
}

/// Lowest energy of N fermions on the spectrum (fractional N fills the
/// next level partially).
pub fn ground_state_energy(spectrum: &SpectrumModel, particles: f64) -> Result<f64> {
    spectrum.validate()?;
    if !(particles.is_finite() && particles > 0.0) {
        return Err(Error::Domain(format!("particle number must be positive, got {particles}")));
    }
    match spectrum {
        SpectrumModel::Continuous2d { rho } => Ok(particles * particles / (2.0 * rho)),
        SpectrumModel::Harmonic { spacing } => {
            let full = particles.floor();
            let frac = particles - full;
            Ok(spacing * (full * (full + 1.0) / 2.0 + frac * (full + 1.0)))
        }
        SpectrumModel::Discrete { levels } => {
            if particles > levels.len() as f64 {
                return Err(Error::Infeasible(format!(
                    "{particles} fermions do not fit on {} levels",
                    levels.len()
                )));
            }
            let full = particles.floor() as usize;
            let mut e: f64 = levels[..full].iter().sum();
            if full < levels.len() {
                e += (particles - full as f64) * levels[full];
            }
            Ok(e)
        }
    }
}

/// μ(T) that reproduces N at temperature T.
fn chemical_potential_for(spectrum: &SpectrumModel, temperature: f64, particles: f64) -> Result<f64> {
    if let SpectrumModel::Continuous2d { rho } = spectrum {
        // N = ρ T ln(1 + e^{μ/T})  ⇒  μ = T ln(e^{N/ρT} − 1)
        let x = particles / (rho * temperature);
        let ln_expm1 = if x > 30.0 { x + (-(-x).exp()).ln_1p() } else { x.exp_m1().ln() };
        return Ok(temperature * ln_expm1);
    }
    let count = |mu: f64| particle_number(spectrum, temperature, mu).map(|n| n - particles);
    let scale = match spectrum {
        SpectrumModel::Harmonic { spacing } => spacing * particles.max(1.0),
        SpectrumModel::Discrete { levels } => levels[levels.len() - 1].abs().max(levels[0].abs()).max(1.0),
        SpectrumModel::Continuous2d { .. } => unreachable!(),
    };
    let mut lo = -scale - temperature;
    let mut hi = scale + temperature;
    let mut widen = 0;
    while count(lo)? > 0.0 {
        lo -= (hi - lo).max(temperature);
        widen += 1;
        if widen > 200 {
            return Err(Error::numeric("could not bracket μ from below", lo, f64::INFINITY));
        }
    }
    while count(hi)? < 0.0 {
        hi += (hi - lo).max(temperature);
        widen += 1;
        if widen > 400 {
            return Err(Error::Infeasible(format!("{particles} particles cannot be placed at T = {temperature}")));
        }
    }
    let mut failure = None;
    let root = brent(
        |mu| match count(mu) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-14 * scale.max(temperature),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    root
}

/// Solve Σ n_FD = N and Σ ε n_FD = E for (T, μ).
///
/// Newton on (ln T, μ) is tried first from a Sommerfeld-type guess.  If it
/// fails, the solver falls back to bracketing in β = 1/T with μ(T)
/// eliminated exactly, which cannot diverge.
pub fn solve_thermal(spectrum: &SpectrumModel, energy_target: f64, particles: f64) -> Result<ThermalState> {
    spectrum.validate()?;
    if !(energy_target.is_finite() && particles.is_finite() && particles > 0.0) {
        return Err(Error::Domain(format!(
            "need finite E and positive N, got E = {energy_target}, N = {particles}"
        )));
    }
    let e0 = ground_state_energy(spectrum, particles)?;
    if energy_target <= e0 {
        return Err(Error::Infeasible(format!(
            "E = {energy_target} is not above the Pauli minimum {e0} for N = {particles}"
        )));
    }
    if let SpectrumModel::Discrete { levels } = spectrum {
        if particles >= levels.len() as f64 {
            return Err(Error::Infeasible(format!(
                "{particles} fermions fill all {} levels; no positive temperature exists",
                levels.len()
            )));
        }
        let e_inf = particles * levels.iter().sum::<f64>() / levels.len() as f64;
        if energy_target >= e_inf {
            return Err(Error::Infeasible(format!(
                "E = {energy_target} needs a negative temperature (infinite-T energy is {e_inf})"
            )));
        }
    }

    let scale = energy_target / particles;
    let density = match spectrum {
        SpectrumModel::Continuous2d { rho } => *rho,
        SpectrumModel::Harmonic { spacing } => 1.0 / spacing,
        SpectrumModel::Discrete { levels } => (levels.len() - 1).max(1) as f64 / (levels[levels.len() - 1] - levels[0]).max(f64::MIN_POSITIVE),
    };
    let t_guess = (6.0 * (energy_target - e0) / (PI * PI * density)).sqrt().max(1e-300);

    let residual = |t: f64, mu: f64| -> Result<[f64; 2]> {
        Ok([
            particle_number(spectrum, t, mu)? / particles - 1.0,
            energy(spectrum, t, mu)? / energy_target - 1.0,
        ])
    };

    let newton = {
        let mu_guess = chemical_potential_for(spectrum, t_guess, particles).unwrap_or(particles / density);
        newton2d(
            |x| match residual(x[0].exp(), x[1] * scale) {
                Ok(r) if r[0].is_finite() && r[1].is_finite() => r,
                _ => [f64::INFINITY, f64::INFINITY],
            },
            [t_guess.ln(), mu_guess / scale],
            1e-12,
        )
        .ok()
        .map(|x| (x[0].exp(), x[1] * scale))
    };

    let (temperature, chemical_potential) = match newton {
        Some(v) => v,
        None => {
            log::debug!("solve_thermal: Newton failed, bracketing in beta");
            bracket_in_beta(spectrum, energy_target, particles, t_guess)?
        }
    };
    let r = residual(temperature, chemical_potential)?;
    if r[0].abs() >= 1e-8 || r[1].abs() >= 1e-8 {
        // Newton may land on a poor point for extreme inputs; bracketing is
        // the robust path.
        let (t, mu) = bracket_in_beta(spectrum, energy_target, particles, t_guess)?;
        let r = residual(t, mu)?;
        if r[0].abs() >= 1e-8 || r[1].abs() >= 1e-8 {
            return Err(Error::numeric(
                "solve_thermal: residual above 1e-8",
                t,
                r[0].abs().max(r[1].abs()),
            ));
        }
        return Ok(ThermalState {
            temperature: t,
            chemical_potential: mu,
            energy: energy_target,
            particles,
        });
    }
    Ok(ThermalState {
        temperature,
        chemical_potential,
        energy: energy_target,
        particles,
    })
}

fn bracket_in_beta(spectrum: &SpectrumModel, energy_target: f64, particles: f64, t_guess: f64) -> Result<(f64, f64)> {
    let excess = |ln_beta: f64| -> Result<f64> {
        let t = (-ln_beta).exp();
        let mu = chemical_potential_for(spectrum, t, particles)?;
        Ok(energy(spectrum, t, mu)? / energy_target - 1.0)
    };
    // Energy falls as β grows.
    let mut lo = -(t_guess.ln()) - 1.0;
    let mut hi = -(t_guess.ln()) + 1.0;
    let mut guard = 0;
    while excess(lo)? < 0.0 {
        lo -= 2.0;
        guard += 1;
        if guard > 300 {
            return Err(Error::numeric("could not bracket β from below", lo, f64::INFINITY));
        }
    }
    while excess(hi)? > 0.0 {
        hi += 2.0;
        guard += 1;
        if guard > 600 {
            return Err(Error::numeric("could not bracket β from above", hi, f64::INFINITY));
        }
    }
    let mut failure = None;
    let ln_beta = brent(
        |lb| match excess(lb) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-15,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let t = (-ln_beta).exp();
    Ok((t, chemical_potential_for(spectrum, t, particles)?))
}

/// Ehrenfest time t_E = ln(A/ħ) / λ_L with A = L √(2 m ε) and
/// λ_L = c √(ε/m) / L.
pub fn ehrenfest_time(cavity: &CavityModel, eps_avg: f64) -> Result<f64> {
    cavity.validate()?;
    if !(eps_avg.is_finite() && eps_avg > 0.0) {
        return Err(Error::Domain(format!("average energy must be positive, got {eps_avg}")));
    }
    let action = cavity.linear_size * (2.0 * cavity.mass * eps_avg).sqrt();
    if action <= cavity.hbar {
        return Err(Error::Domain(format!(
            "classical action {action} does not exceed ħ = {}; not semiclassical",
            cavity.hbar
        )));
    }
    let lyapunov = cavity.lyapunov_prefactor * (eps_avg / cavity.mass).sqrt() / cavity.linear_size;
    Ok((action / cavity.hbar).ln() / lyapunov)
}

/// Entropy per unit area of the unconfined gas,
/// S₀ = (m / 2πħ²) ∫₀^∞ dε s(n_FD(ε)).
pub fn entropy_density_continuum(ts: &ThermalState, cavity: &CavityModel) -> Result<f64> {
    ts.validate()?;
    cavity.validate()?;
    let (t, mu) = (ts.temperature, ts.chemical_potential);
    let integral = thermal_window_integral(|e| level_entropy((e - mu) / t), t, mu, 0.0)?;
    Ok(cavity.mass / (2.0 * PI * cavity.hbar * cavity.hbar) * integral)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_entropy_matches_binary_entropy() {
        for &x in &[-30.0, -3.0, -0.2, 0.0, 0.7, 5.0, 40.0] {
            let n = occupation(x, 1.0, 0.0);
            assert!((level_entropy(x) - binary_entropy(n)).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn continuous_mu_inverts_particle_number() {
        let spec = SpectrumModel::Continuous2d { rho: 3.0 };
        for &(t, n) in &[(0.5, 10.0), (2.0, 0.01), (0.01, 100.0)] {
            let mu = chemical_potential_for(&spec, t, n).unwrap();
            let back = particle_number(&spec, t, mu).unwrap();
            assert!((back / n - 1.0).abs() < 1e-13);
        }
    }
}
