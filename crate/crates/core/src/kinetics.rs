//! Pauli-blocked kinetic equation for level occupations.
//!
//! Two particles in levels ν, ν′ exchange an energy δ and land in ν+δ,
//! ν′−δ.  The rate of each reaction is W(δ) times the occupation of the
//! initial levels and the vacancy of the final ones.  Iterating reaction
//! tuples and crediting each of the four participants equally makes particle
//! number and energy conserved to roundoff; the stationary solutions are
//! Fermi–Dirac distributions.

use log::debug;

use crate::error::{Error, Result};
use crate::thermo::{occupation, solve_thermal, SpectrumModel, ThermalState};

/// Occupations on a uniform energy grid at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    pub energies: Vec<f64>,
    pub occupations: Vec<f64>,
    pub time: f64,
}

impl KineticState {
    pub fn new(energies: Vec<f64>, occupations: Vec<f64>) -> Result<Self> {
        let s = Self {
            energies,
            occupations,
            time: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    /// Levels ε_ν = ν·spacing, ν = 0..levels.
    pub fn on_ladder(levels: usize, spacing: f64, occupations: Vec<f64>) -> Result<Self> {
        Self::new((0..levels).map(|i| i as f64 * spacing).collect(), occupations)
    }

    pub fn validate(&self) -> Result<()> {
        if self.energies.len() != self.occupations.len() || self.energies.is_empty() {
            return Err(Error::Domain("energies and occupations must be non-empty and of equal length".into()));
        }
        if self.energies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("energies must be strictly ascending".into()));
        }
        if self.occupations.iter().any(|n| !(0.0..=1.0).contains(n)) {
            return Err(Error::Domain("occupations must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn particle_number(&self) -> f64 {
        self.occupations.iter().sum()
    }

    pub fn energy(&self) -> f64 {
        self.energies.iter().zip(&self.occupations).map(|(e, n)| e * n).sum()
    }

    fn spacing(&self) -> Result<f64> {
        let e = &self.energies;
        if e.len() < 2 {
            return Ok(1.0);
        }
        let h = (e[e.len() - 1] - e[0]) / (e.len() - 1) as f64;
        let tol = 1e-12 * e[e.len() - 1].abs().max(h);
        for (i, &x) in e.iter().enumerate() {
            if (x - (e[0] + i as f64 * h)).abs() > tol {
                return Err(Error::Unsupported(
                    "non-uniform grid: reaction partners would fall between levels".into(),
                ));
            }
        }
        Ok(h)
    }
}

/// Transition rates W(δ) for transfers of δ = ±1, ±2, … grid steps;
/// W(−δ) = W(δ) by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionKernel {
    /// `rates[k]` is W for |δ| = k + 1.
    pub rates: Vec<f64>,
}

impl CollisionKernel {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() || rates.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Domain("collision rates must be non-empty, finite and ≥ 0".into()));
        }
        Ok(Self { rates })
    }

    /// W(δ) = `rate` for 1 ≤ |δ| ≤ `window`.
    pub fn constant(window: usize, rate: f64) -> Result<Self> {
        Self::new(vec![rate; window])
    }

    pub fn rate(&self, delta: i64) -> f64 {
        let k = delta.unsigned_abs() as usize;
        if k == 0 {
            0.0
        } else {
            self.rates.get(k - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn window(&self) -> usize {
        self.rates.len()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.rates.iter().map(|w| w * factor).collect())
    }
}

/// dÑ/dt.  Every reaction tuple (ν, ν′, δ) whose four participants lie on
/// the grid contributes Φ = W(δ)[gain − loss]; a quarter of it goes to each
/// of ν and ν′ and is taken from ν+δ and ν′−δ.  Summed over tuples this is
/// exactly the per-level gain–loss equation.
pub fn collision_rhs(s: &KineticState, w: &CollisionKernel) -> Result<Vec<f64>> {
    s.spacing()?;
    Ok(rhs_unchecked(&s.occupations, w))
}

fn rhs_unchecked(n: &[f64], w: &CollisionKernel) -> Vec<f64> {
    let len = n.len() as i64;
    let window = w.window() as i64;
    let mut out = vec![0.0; n.len()];
    for nu in 0..len {
        for d in (-window..=window).filter(|&d| d != 0) {
            let up = nu + d;
            if up < 0 || up >= len {
                continue;
            }
            let rate = 0.25 * w.rate(d);
            let (a, c) = (n[nu as usize], n[up as usize]);
            // ν′ such that ν′ − δ stays on the grid.
            for nu2 in d.max(0)..len.min(len + d) {
                let down = nu2 - d;
                let (b, e) = (n[nu2 as usize], n[down as usize]);
                let gain = c * e * (1.0 - a) * (1.0 - b);
                let loss = a * b * (1.0 - c) * (1.0 - e);
                let phi = rate * (gain - loss);
                out[nu as usize] += phi;
                out[nu2 as usize] += phi;
                out[up as usize] -= phi;
                out[down as usize] -= phi;
            }
        }
    }
    out
}

/// Allowed excursion of an occupation outside [0, 1] before a step is
/// rejected.
pub const OCCUPATION_SLACK: f64 = 1e-9;
const MAX_HALVINGS: u32 = 30;

fn rk4_step(n: &[f64], w: &CollisionKernel, dt: f64) -> Vec<f64> {
    let axpy = |x: &[f64], k: &[f64], h: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let k1 = rhs_unchecked(n, w);
    let k2 = rhs_unchecked(&axpy(n, &k1, 0.5 * dt), w);
    let k3 = rhs_unchecked(&axpy(n, &k2, 0.5 * dt), w);
    let k4 = rhs_unchecked(&axpy(n, &k3, dt), w);
    n.iter()
        .enumerate()
        .map(|(i, x)| x + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Conserved totals recorded after each requested step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub particles: f64,
    pub energy: f64,
    /// Sup-norm distance to the Fermi–Dirac fixed point.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub final_state: KineticState,
    pub fixed_point: ThermalState,
    /// Steps that had to be split because an occupation left [0, 1].
    pub halvings: usize,
}

/// The Fermi–Dirac state on the same grid with the same Σ Ñ and Σ ε Ñ.
pub fn fixed_point(s: &KineticState) -> Result<(ThermalState, Vec<f64>)> {
    let spectrum = SpectrumModel::discrete(s.energies.clone())?;
    let ts = solve_thermal(&spectrum, s.energy(), s.particle_number())?;
    let n = s
        .energies
        .iter()
        .map(|&e| occupation(e, ts.temperature, ts.chemical_potential))
        .collect();
    Ok((ts, n))
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Integrate `steps` steps of size `dt` with classical RK4.  A step that
/// pushes an occupation outside [−1e-9, 1+1e-9] is redone as two half steps
/// (recursively); persistent failure is a numeric error.
pub fn evolve(s0: &KineticState, w: &CollisionKernel, dt: f64, steps: usize) -> Result<Trajectory> {
    s0.validate()?;
    s0.spacing()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    let r0 = rhs_unchecked(&s0.occupations, w);
    let speed = r0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if dt * speed >= 0.1 {
        return Err(Error::Precondition(format!(
            "dt·max|dÑ/dt| = {} ≥ 0.1; reduce dt",
            dt * speed
        )));
    }
    let (ts, target) = fixed_point(s0)?;
    let mut n = s0.occupations.clone();
    let mut t = s0.time;
    let mut halvings = 0;
    let mut points = Vec::with_capacity(steps);
    for k in 1..=steps {
        n = advance(&n, w, dt, 0, &mut halvings)?;
        t = s0.time + k as f64 * dt;
        let particles: f64 = n.iter().sum();
        let energy: f64 = s0.energies.iter().zip(&n).map(|(e, x)| e * x).sum();
        points.push(TrajectoryPoint {
            time: t,
            particles,
            energy,
            distance: sup_distance(&n, &target),
        });
    }
    debug!("kinetics: {steps} steps, {halvings} halvings");
    Ok(Trajectory {
        points,
        final_state: KineticState {
            energies: s0.energies.clone(),
            occupations: n,
            time: t,
        },
        fixed_point: ts,
        halvings,
    })
}

fn advance(n: &[f64], w: &CollisionKernel, dt: f64, depth: u32, halvings: &mut usize) -> Result<Vec<f64>> {
    let next = rk4_step(n, w, dt);
    let ok = next
        .iter()
        .all(|x| x.is_finite() && (-OCCUPATION_SLACK..=1.0 + OCCUPATION_SLACK).contains(x));
    if ok {
        return Ok(next);
    }
    if depth >= MAX_HALVINGS {
        let worst = next.iter().map(|x| (-x).max(x - 1.0)).fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::numeric(
            "occupations keep leaving [0, 1] after repeated step halving",
            worst,
            dt,
        ));
    }
    *halvings += 1;
    let half = advance(n, w, 0.5 * dt, depth + 1, halvings)?;
    advance(&half, w, 0.5 * dt, depth + 1, halvings)
}
