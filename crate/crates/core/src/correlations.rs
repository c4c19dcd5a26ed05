//! Eigenfunction autocorrelation and relaxed one- and multi-particle
//! correlation functions.
//!
//! For a chaotic cavity the energy-shell average of ψ_ν(r)ψ_ν(r′) depends
//! only on the separation: J₀(|r−r′|/λ_ε)/V in two dimensions and
//! sin(x)/x /V in three.  Summing over occupied levels gives the relaxed
//! one-particle correlation; Wick's theorem turns the j-particle one into a
//! determinant of one-particle entries.

use std::f64::consts::PI;

use log::warn;

use crate::error::{Error, Result};
use crate::mathcore::{determinant, integrate, j0, QuadratureSpec};
use crate::partitions::Partition;
use crate::thermo::{occupation, CavityModel, ThermalState};

/// Largest j handled by direct determinant evaluation.
pub const MAX_PARTICLES: usize = 8;

/// Default distance to the cavity boundary, in thermal wavelengths.
pub const DEFAULT_MARGIN_WAVELENGTHS: f64 = 5.0;

pub type Point = [f64; 2];

/// Which single-particle levels are occupied.
#[derive(Debug, Clone, PartialEq)]
pub enum OccupationPattern {
    /// Fermi–Dirac occupation over the continuous spectrum.
    Thermal(ThermalState),
    /// Explicit levels (energies) each occupied or empty.
    Explicit { levels: Vec<f64>, occupied: Vec<bool> },
}

impl OccupationPattern {
    pub fn explicit(levels: Vec<f64>, occupied: Vec<bool>) -> Result<Self> {
        let p = Self::Explicit { levels, occupied };
        p.validate()?;
        Ok(p)
    }

    /// Map a partition of integer levels ν onto energies (ν − ½)/ρ, i.e. a
    /// ladder with the mean spacing of the cavity spectrum.  Only the occupied
    /// levels are kept.
    pub fn from_partition(p: &Partition, cavity: &CavityModel) -> Result<Self> {
        p.validate()?;
        let rho = cavity.spectral_density();
        let levels = p.levels.iter().map(|&l| (l as f64 - 0.5) / rho).collect::<Vec<_>>();
        let occupied = vec![true; levels.len()];
        Self::explicit(levels, occupied)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Thermal(ts) => ts.validate(),
            Self::Explicit { levels, occupied } => {
                if levels.len() != occupied.len() {
                    return Err(Error::Domain(format!(
                        "{} levels but {} occupations",
                        levels.len(),
                        occupied.len()
                    )));
                }
                if levels.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
                    return Err(Error::Domain("explicit levels must be positive and finite".into()));
                }
                Ok(())
            }
        }
    }
}

/// Points used together in a correlation function, with a record of whether
/// all of them keep the requested distance from the cavity boundary.  The
/// cavity is modelled as the square [−L/2, L/2]² for this purpose.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub points: Vec<Point>,
    pub margin: f64,
    pub far_from_boundary: bool,
}

impl PointSet {
    pub fn new(points: Vec<Point>, cavity: &CavityModel, margin: f64) -> Result<Self> {
        if !(margin >= 0.0) {
            return Err(Error::Domain(format!("margin must be ≥ 0, got {margin}")));
        }
        let half = 0.5 * cavity.linear_size;
        let mut far = true;
        for p in &points {
            if !p[0].is_finite() || !p[1].is_finite() || p[0].abs() > half || p[1].abs() > half {
                return Err(Error::Domain(format!("point {p:?} is outside the cavity")));
            }
            let clearance = half - p[0].abs().max(p[1].abs());
            if clearance < margin {
                far = false;
            }
        }
        if !far {
            warn!(
                "points closer than {margin} to the cavity boundary; bulk correlation formulas may not apply"
            );
        }
        Ok(Self {
            points,
            margin,
            far_from_boundary: far,
        })
    }

    /// Margin of five thermal wavelengths at the given state.
    pub fn thermal(points: Vec<Point>, cavity: &CavityModel, ts: &ThermalState) -> Result<Self> {
        let margin = DEFAULT_MARGIN_WAVELENGTHS * cavity.thermal_wavelength(ts.temperature);
        Self::new(points, cavity, margin)
    }

    pub fn separation(&self, i: usize, j: usize) -> f64 {
        distance(self.points[i], self.points[j])
    }
}

fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Shell-averaged eigenfunction autocorrelation at energy `eps` in d = 2 or 3
/// dimensions: f(x)/V with x = separation/λ_ε.
pub fn autocorrelation(eps: f64, separation: f64, d: u32, cavity: &CavityModel) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("energy must be positive, got {eps}")));
    }
    if !(separation >= 0.0) || !separation.is_finite() {
        return Err(Error::Domain(format!("separation must be ≥ 0, got {separation}")));
    }
    let x = separation / cavity.reduced_wavelength(eps);
    let f = match d {
        2 => j0(x),
        3 => {
            if x == 0.0 {
                1.0
            } else {
                x.sin() / x
            }
        }
        _ => return Err(Error::Unsupported(format!("dimension {d}; only 2 and 3 are supported"))),
    };
    Ok(f / cavity.volume)
}

/// Thermal one-particle correlation at separation `s`:
/// M(s) = (1/V)∫ρ dε J₀(s/λ_ε) n_FD(ε) = (1/2π)∫ k dk J₀(ks) n_FD(ħ²k²/2m).
pub fn thermal_kernel(s: f64, ts: &ThermalState, cavity: &CavityModel) -> Result<f64> {
    let (hbar, m) = (cavity.hbar, cavity.mass);
    let (t, mu) = (ts.temperature, ts.chemical_potential);
    let dispersion = hbar * hbar / (2.0 * m);
    let n = |k: f64| occupation(dispersion * k * k, t, mu);
    let k_top = ((mu.max(0.0) + 60.0 * t) / dispersion).sqrt();
    let k_fermi = (mu.max(0.0) / dispersion).sqrt();
    // Scale tolerances by the zero-separation density.
    let density = (m * t / (2.0 * PI * hbar * hbar)) * (mu / t).exp().ln_1p();
    let spec = QuadratureSpec::new(1e-13 * density.max(f64::MIN_POSITIVE), 1e-12, 40_000)?;
    let f = |k: f64| k * j0(k * s) * n(k);
    let mut total = 0.0;
    let mut lo = 0.0;
    // Split at the Fermi edge and, for long separations, every few periods.
    let mut cuts = Vec::new();
    if k_fermi > 0.0 && k_fermi < k_top {
        cuts.push(k_fermi);
    }
    cuts.push(k_top);
    for hi in cuts {
        if hi > lo {
            let pieces = ((hi - lo) * s / (8.0 * PI)).ceil().max(1.0) as usize;
            let w = (hi - lo) / pieces as f64;
            for p in 0..pieces {
                let a = lo + p as f64 * w;
                let b = if p + 1 == pieces { hi } else { a + w };
                total += integrate(f, a, b, spec)?;
            }
        }
        lo = hi;
    }
    Ok(total / (2.0 * PI))
}

/// Relaxed one-particle correlation ⟨ψ†(r)ψ(r′)⟩ for the given pattern.
pub fn relaxed_one_particle(r: Point, r2: Point, pat: &OccupationPattern, cavity: &CavityModel) -> Result<f64> {
    let s = distance(r, r2);
    match pat {
        OccupationPattern::Thermal(ts) => thermal_kernel(s, ts, cavity),
        OccupationPattern::Explicit { levels, occupied } => {
            let mut sum = 0.0;
            for (&e, &occ) in levels.iter().zip(occupied) {
                if occ {
                    sum += j0(s / cavity.reduced_wavelength(e));
                }
            }
            Ok(sum / cavity.volume)
        }
    }
}

/// The j×j matrix of one-particle correlations between annihilation point
/// r_k (row) and creation point r′_l (column), row-major.
pub fn one_particle_matrix(
    annihilate: &[Point],
    create: &[Point],
    pat: &OccupationPattern,
    cavity: &CavityModel,
) -> Result<Vec<f64>> {
    let j = annihilate.len();
    if create.len() != j {
        return Err(Error::Domain(format!(
            "{} annihilation points but {} creation points",
            j,
            create.len()
        )));
    }
    let mut out = Vec::with_capacity(j * j);
    for &r in annihilate {
        for &r2 in create {
            out.push(relaxed_one_particle(r, r2, pat, cavity)?);
        }
    }
    Ok(out)
}

/// Relaxed j-particle correlation: by Wick's theorem the signed sum over
/// permutations of products of one-particle correlations, i.e. a determinant.
pub fn relaxed_multi_particle(
    annihilate: &[Point],
    create: &[Point],
    pat: &OccupationPattern,
    cavity: &CavityModel,
) -> Result<f64> {
    let j = annihilate.len();
    if j == 0 || j > MAX_PARTICLES {
        return Err(Error::Unsupported(format!(
            "j = {j}; direct evaluation covers 1 ≤ j ≤ {MAX_PARTICLES}"
        )));
    }
    let m = one_particle_matrix(annihilate, create, pat, cavity)?;
    determinant(j, &m)
}

/// [`relaxed_multi_particle`] on a [`PointSet`] holding the j annihilation
/// points followed by the j creation points.
pub fn relaxed_multi_particle_set(set: &PointSet, pat: &OccupationPattern, cavity: &CavityModel) -> Result<f64> {
    if set.points.len() % 2 != 0 {
        return Err(Error::Domain("point set must hold j annihilation and j creation points".into()));
    }
    let (a, c) = set.points.split_at(set.points.len() / 2);
    relaxed_multi_particle(a, c, pat, cavity)
}
