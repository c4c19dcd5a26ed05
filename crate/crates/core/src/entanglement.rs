//! Entanglement entropy of lattice subsystems from correlation-matrix
//! spectra, and the Toeplitz asymptotics that predict it.
//!
//! Discretising the cavity with lattice constant a, the one-particle
//! correlations between subsystem sites i, j are
//! (M)_{ij} = a² M(a|i−j|), where M(s) is the thermal kernel from
//! [`crate::correlations`].  The matrix is Toeplitz for chains and squares,
//! and its symbol (generating function) C(θ) = Σ_n c_n e^{in·θ} governs
//! determinant and entropy asymptotics: Szegő in one dimension, Doktorsky on
//! the square lattice, Widom in the continuum limit.

use std::f64::consts::PI;
use std::sync::OnceLock;

use log::warn;
use rayon::prelude::*;

use crate::correlations::{thermal_kernel, DEFAULT_MARGIN_WAVELENGTHS};
use crate::error::{Error, Result};
use crate::mathcore::{i0e, integrate, j0, sym_eigen, sym_eigenvalues, QuadratureSpec, SymmetricMatrix};
use crate::thermo::{binary_entropy, occupation, CavityModel, ThermalState};

/// Eigenvalue excursions beyond [0, 1] smaller than this are plain roundoff.
pub const CLAMP_WINDOW: f64 = 1e-12;
/// Excursions beyond this mean the matrix is not a correlation matrix.
pub const INTEGRITY_WINDOW: f64 = 1e-6;
/// Bound on the discarded tail Σ|c_n| of a truncated symbol.
pub const TAIL_TOLERANCE: f64 = 1e-12;
const MAX_TRUNCATION: usize = 4000;

/// Subsystem geometry.  Lengths are physical; sites sit on the lattice aZ².
#[derive(Debug, Clone, PartialEq)]
pub enum MaskShape {
    Chain { len: usize },
    Square { side: usize },
    Disk { radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

/// A set of lattice sites forming subsystem A.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsystemMask {
    pub shape: MaskShape,
    pub lattice_a: f64,
    sites: Vec<[i64; 2]>,
}

impl SubsystemMask {
    fn build(shape: MaskShape, lattice_a: f64, sites: Vec<[i64; 2]>) -> Result<Self> {
        if !(lattice_a > 0.0) || !lattice_a.is_finite() {
            return Err(Error::Domain(format!("lattice constant must be positive, got {lattice_a}")));
        }
        if sites.is_empty() {
            return Err(Error::Domain(format!("{shape:?} contains no lattice site")));
        }
        Ok(Self {
            shape,
            lattice_a,
            sites,
        })
    }

    pub fn chain(len: usize, lattice_a: f64) -> Result<Self> {
        let sites = (0..len as i64).map(|i| [i, 0]).collect();
        Self::build(MaskShape::Chain { len }, lattice_a, sites)
    }

    pub fn square(side: usize, lattice_a: f64) -> Result<Self> {
        let s = side as i64;
        let sites = (0..s).flat_map(|y| (0..s).map(move |x| [x, y])).collect();
        Self::build(MaskShape::Square { side }, lattice_a, sites)
    }

    /// Sites within distance `radius` of the origin.
    pub fn disk(radius: f64, lattice_a: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("disk radius must be ≥ 0, got {radius}")));
        }
        let r = (radius / lattice_a).floor() as i64;
        let r2 = (radius / lattice_a).powi(2);
        let mut sites = Vec::new();
        for y in -r..=r {
            for x in -r..=r {
                if ((x * x + y * y) as f64) <= r2 {
                    sites.push([x, y]);
                }
            }
        }
        Self::build(MaskShape::Disk { radius }, lattice_a, sites)
    }

    /// Sites inside a simple polygon (even–odd rule, boundary points
    /// included).
    pub fn polygon(vertices: Vec<[f64; 2]>, lattice_a: f64) -> Result<Self> {
        if vertices.len() < 3 || vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::Domain("polygon needs at least three finite vertices".into()));
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in &vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let mut sites = Vec::new();
        let (y0, y1) = ((lo[1] / lattice_a).ceil() as i64, (hi[1] / lattice_a).floor() as i64);
        let (x0, x1) = ((lo[0] / lattice_a).ceil() as i64, (hi[0] / lattice_a).floor() as i64);
        for y in y0..=y1 {
            for x in x0..=x1 {
                if inside_polygon(&vertices, [x as f64 * lattice_a, y as f64 * lattice_a]) {
                    sites.push([x, y]);
                }
            }
        }
        Self::build(MaskShape::Polygon { vertices }, lattice_a, sites)
    }

    /// The same shape shifted by whole lattice steps.
    pub fn translated(&self, dx: i64, dy: i64) -> Self {
        let mut out = self.clone();
        for s in &mut out.sites {
            s[0] += dx;
            s[1] += dy;
        }
        out
    }

    pub fn sites(&self) -> &[[i64; 2]] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Physical width of the bounding box along the wider axis.
    pub fn extent(&self) -> f64 {
        let mut w: i64 = 0;
        for k in 0..2 {
            let lo = self.sites.iter().map(|s| s[k]).min().unwrap_or(0);
            let hi = self.sites.iter().map(|s| s[k]).max().unwrap_or(0);
            w = w.max(hi - lo);
        }
        w as f64 * self.lattice_a
    }
}

fn inside_polygon(vertices: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        // On an edge counts as inside.
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let within = p[0] >= a[0].min(b[0]) - 1e-12
            && p[0] <= a[0].max(b[0]) + 1e-12
            && p[1] >= a[1].min(b[1]) - 1e-12
            && p[1] <= a[1].max(b[1]) + 1e-12;
        if cross.abs() <= 1e-12 * (1.0 + (b[0] - a[0]).abs() + (b[1] - a[1]).abs()) && within {
            return true;
        }
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Correlation matrix of a subsystem with a lazily computed spectrum.
#[derive(Debug)]
pub struct CorrelationMatrix {
    pub matrix: SymmetricMatrix,
    /// N_A a²/V; the bulk kernel is only trusted when this is small.
    pub volume_fraction: f64,
    eigenvalues: OnceLock<Vec<f64>>,
}

impl Clone for CorrelationMatrix {
    fn clone(&self) -> Self {
        let eigenvalues = OnceLock::new();
        if let Some(v) = self.eigenvalues.get() {
            let _ = eigenvalues.set(v.clone());
        }
        Self {
            matrix: self.matrix.clone(),
            volume_fraction: self.volume_fraction,
            eigenvalues,
        }
    }
}

impl CorrelationMatrix {
    /// Wrap an arbitrary symmetric matrix.
    pub fn new(matrix: SymmetricMatrix) -> Result<Self> {
        if !matrix.is_finite() || matrix.dim() == 0 {
            return Err(Error::Domain("correlation matrix must be finite and non-empty".into()));
        }
        Ok(Self {
            matrix,
            volume_fraction: 0.0,
            eigenvalues: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Ascending eigenvalues, computed once.
    pub fn eigenvalues(&self) -> Result<&[f64]> {
        if let Some(v) = self.eigenvalues.get() {
            return Ok(v);
        }
        let v = sym_eigenvalues(&self.matrix)?;
        let _ = self.eigenvalues.set(v);
        Ok(self.eigenvalues.get().expect("just set"))
    }
}

/// c(|n|²) = a² M(a|n|) for each squared lattice norm.
pub fn lattice_coefficients(norms: &[u64], lattice_a: f64, ts: &ThermalState, cavity: &CavityModel) -> Result<Vec<f64>> {
    norms
        .par_iter()
        .map(|&n2| Ok(lattice_a * lattice_a * thermal_kernel(lattice_a * (n2 as f64).sqrt(), ts, cavity)?))
        .collect()
}

fn check_lattice(lattice_a: f64, ts: &ThermalState, cavity: &CavityModel) -> Result<()> {
    ts.validate()?;
    cavity.validate()?;
    if cavity.lattice_a > 0.0 && (cavity.lattice_a - lattice_a).abs() > 1e-12 * lattice_a {
        return Err(Error::Domain(format!(
            "mask lattice constant {lattice_a} differs from the cavity's {}",
            cavity.lattice_a
        )));
    }
    let limit = cavity.max_lattice_spacing(ts);
    if lattice_a >= limit {
        return Err(Error::Precondition(format!(
            "lattice constant {lattice_a} does not resolve the occupied wavelengths; need a < {limit}"
        )));
    }
    Ok(())
}

/// Assemble (M)_{ij} = a² M(a|r_i − r_j|) over the mask sites.
pub fn build_corr_matrix(mask: &SubsystemMask, ts: &ThermalState, cavity: &CavityModel) -> Result<CorrelationMatrix> {
    let a = mask.lattice_a;
    check_lattice(a, ts, cavity)?;
    let extent = mask.extent();
    if extent > cavity.linear_size {
        return Err(Error::Precondition(format!(
            "subsystem of width {extent} does not fit in a cavity of size {}",
            cavity.linear_size
        )));
    }
    let margin = DEFAULT_MARGIN_WAVELENGTHS * cavity.thermal_wavelength(ts.temperature);
    if extent + 2.0 * margin > cavity.linear_size {
        warn!("subsystem of width {extent} comes within {margin} of the cavity boundary");
    }

    let sites = mask.sites();
    let n = sites.len();
    let norm = |i: usize, j: usize| -> u64 {
        let dx = sites[i][0] - sites[j][0];
        let dy = sites[i][1] - sites[j][1];
        (dx * dx + dy * dy) as u64
    };
    let mut seen = Vec::new();
    for i in 0..n {
        for j in 0..=i {
            let k = norm(i, j) as usize;
            if k >= seen.len() {
                seen.resize(k + 1, false);
            }
            seen[k] = true;
        }
    }
    let norms: Vec<u64> = (0..seen.len() as u64).filter(|&k| seen[k as usize]).collect();
    let values = lattice_coefficients(&norms, a, ts, cavity)?;
    let mut table = vec![0.0; seen.len()];
    for (&k, &v) in norms.iter().zip(&values) {
        table[k as usize] = v;
    }
    let matrix = SymmetricMatrix::from_fn(n, |i, j| table[norm(i, j) as usize]);
    Ok(CorrelationMatrix {
        matrix,
        volume_fraction: n as f64 * a * a / cavity.volume,
        eigenvalues: OnceLock::new(),
    })
}

/// Clamp a correlation spectrum to [0, 1].  Excursions beyond
/// [`INTEGRITY_WINDOW`] are an error, beyond [`CLAMP_WINDOW`] a warning.
pub fn clamp_spectrum(values: &[f64]) -> Result<Vec<f64>> {
    let worst = values
        .iter()
        .map(|&l| (-l).max(l - 1.0).max(0.0))
        .fold(0.0, f64::max);
    if worst > INTEGRITY_WINDOW || values.iter().any(|l| !l.is_finite()) {
        return Err(Error::Integrity(format!(
            "correlation eigenvalue outside [0, 1] by {worst:e}"
        )));
    }
    if worst > CLAMP_WINDOW {
        warn!("clamping correlation eigenvalues that leave [0, 1] by {worst:e}");
    }
    Ok(values.iter().map(|l| l.clamp(0.0, 1.0)).collect())
}

/// e(1, v) = −((1+v)/2) ln((1+v)/2) − ((1−v)/2) ln((1−v)/2), the entropy of
/// a mode with correlation eigenvalue (1+v)/2.
pub fn mode_entropy(v: f64) -> f64 {
    binary_entropy(0.5 * (1.0 + v.abs()))
}

/// S = Σ_i e(λ_i) over the (clamped) correlation spectrum.
pub fn entanglement_entropy(m: &CorrelationMatrix) -> Result<f64> {
    let spectrum = clamp_spectrum(m.eigenvalues()?)?;
    Ok(spectrum.iter().map(|&l| binary_entropy(l)).sum())
}

/// −Tr[M ln M + (1−M) ln(1−M)] as a trace of a matrix function: the diagonal
/// of Q e(Λ) Qᵀ summed over sites.
pub fn gaussian_entropy(m: &SymmetricMatrix) -> Result<f64> {
    let eig = sym_eigen(m)?;
    let spectrum = clamp_spectrum(&eig.values)?;
    let e: Vec<f64> = spectrum.iter().map(|&l| binary_entropy(l)).collect();
    let n = eig.dim;
    let mut trace = 0.0;
    for i in 0..n {
        for (k, ek) in e.iter().enumerate() {
            let q = eig.vector_component(i, k);
            trace += q * q * ek;
        }
    }
    Ok(trace)
}

/// Ĥ = ln(M⁻¹ − 1), with the spectrum clipped to [ε, 1−ε], ε = 1e-12.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub h: SymmetricMatrix,
    /// Number of eigenvalues that had to be clipped.
    pub clipped: usize,
}

pub fn effective_hamiltonian(m: &CorrelationMatrix) -> Result<EffectiveHamiltonian> {
    let eig = sym_eigen(&m.matrix)?;
    clamp_spectrum(&eig.values)?;
    let mut clipped = 0;
    for &l in &eig.values {
        if !(CLAMP_WINDOW..=1.0 - CLAMP_WINDOW).contains(&l) {
            clipped += 1;
        }
    }
    if clipped > 0 {
        warn!("{clipped} correlation eigenvalues at 0 or 1; effective Hamiltonian is clipped");
    }
    let h = SymmetricMatrix::map_spectrum(&eig, |l| {
        let l = l.clamp(CLAMP_WINDOW, 1.0 - CLAMP_WINDOW);
        ((1.0 - l) / l).ln()
    });
    Ok(EffectiveHamiltonian { h, clipped })
}

/// M = 1/(e^Ĥ + 1) in the matrix-function sense.
pub fn correlation_from_hamiltonian(h: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let eig = sym_eigen(h)?;
    Ok(SymmetricMatrix::map_spectrum(&eig, |x| occupation(x, 1.0, 0.0)))
}

/// Symbol C(θ) of the lattice correlation operator in one or two dimensions,
/// stored as its Fourier coefficients c(|n|²) for |n| ≤ n_max.
#[derive(Debug, Clone)]
pub struct GeneratingFunction {
    pub dim: usize,
    pub lattice_a: f64,
    pub n_max: usize,
    /// c indexed by squared norm; only lattice-representable norms are set.
    coeffs: Vec<f64>,
    thermal: ThermalState,
    cavity: CavityModel,
}

fn lattice_a_of(cavity: &CavityModel) -> Result<f64> {
    if cavity.lattice_a > 0.0 {
        Ok(cavity.lattice_a)
    } else {
        Err(Error::Domain("the cavity has no lattice constant (lattice_a = 0)".into()))
    }
}

/// Gaussian tail of the coefficients in the Maxwell–Boltzmann regime:
/// c_n ≈ (a²ρT/V) e^{μ/T} e^{−(ma²T/2ħ²)|n|²}.
pub fn gaussian_tail_coefficient(n2: f64, ts: &ThermalState, cavity: &CavityModel) -> f64 {
    let a = cavity.lattice_a;
    let (m, hbar, t) = (cavity.mass, cavity.hbar, ts.temperature);
    let prefactor = a * a * m * t / (2.0 * PI * hbar * hbar) * (ts.chemical_potential / t).exp();
    prefactor * (-(m * a * a * t / (2.0 * hbar * hbar)) * n2).exp()
}

/// Truncation radius: the Gaussian bound first, then extended until the
/// actual coefficients are small, since away from the Maxwell–Boltzmann
/// regime they decay exponentially rather than as a Gaussian.
fn truncation(dim: usize, ts: &ThermalState, cavity: &CavityModel) -> Result<usize> {
    let a = cavity.lattice_a;
    let kappa = cavity.mass * a * a * ts.temperature / (2.0 * cavity.hbar * cavity.hbar);
    let amp = gaussian_tail_coefficient(0.0, ts, cavity);
    let tail_bound = |n: usize| -> f64 {
        let r = n.saturating_sub(1) as f64;
        match dim {
            1 => 2.0 * amp * (-kappa * (n * n) as f64).exp() / (1.0 - (-kappa).exp()),
            _ => amp * (PI / kappa) * (1.0 + 2.0 * r * kappa.sqrt()) * (-kappa * r * r).exp(),
        }
    };
    let mut n = 1;
    while tail_bound(n) > TAIL_TOLERANCE {
        n += 1;
        if n > MAX_TRUNCATION {
            return Err(Error::numeric("symbol truncation exceeds the size limit", f64::NAN, tail_bound(n)));
        }
    }
    let weight = |r: usize| if dim == 1 { 2.0 } else { 2.0 * PI * r as f64 };
    loop {
        let probe: Vec<u64> = (n + 1..=n + 5).map(|r| (r * r) as u64).collect();
        let c = lattice_coefficients(&probe, a, ts, cavity)?;
        let worst = (n + 1..=n + 5)
            .zip(&c)
            .map(|(r, v)| weight(r) * v.abs())
            .fold(0.0, f64::max);
        if worst < TAIL_TOLERANCE {
            return Ok(n);
        }
        n += (n / 8).max(1);
        if n > MAX_TRUNCATION {
            return Err(Error::numeric(
                "symbol coefficients do not decay within the size limit",
                f64::NAN,
                worst,
            ));
        }
    }
}

fn generating_function(dim: usize, ts: &ThermalState, cavity: &CavityModel) -> Result<GeneratingFunction> {
    let a = lattice_a_of(cavity)?;
    if !(ts.temperature > 0.0) {
        return Err(Error::Unsupported(
            "zero temperature: the symbol coefficients are not summable".into(),
        ));
    }
    check_lattice(a, ts, cavity)?;
    let n_max = truncation(dim, ts, cavity)?;
    let top = n_max * n_max;
    let mut representable = vec![false; top + 1];
    for x in 0..=n_max {
        if dim == 1 {
            representable[x * x] = true;
            continue;
        }
        for y in 0..=x {
            let k = x * x + y * y;
            if k <= top {
                representable[k] = true;
            }
        }
    }
    let norms: Vec<u64> = (0..=top as u64).filter(|&k| representable[k as usize]).collect();
    let values = lattice_coefficients(&norms, a, ts, cavity)?;
    let mut coeffs = vec![0.0; top + 1];
    for (&k, &v) in norms.iter().zip(&values) {
        coeffs[k as usize] = v;
    }
    Ok(GeneratingFunction {
        dim,
        lattice_a: a,
        n_max,
        coeffs,
        thermal: *ts,
        cavity: *cavity,
    })
}

/// Symbol of a lattice chain.  [`GeneratingFunction::eval`] uses the
/// closed form C(θ) = (a/π) Σ_k ∫₀^∞ dk_y n_FD(ħ²((θ−2πk)²/a² + k_y²)/2m).
pub fn generating_function_1d(ts: &ThermalState, cavity: &CavityModel) -> Result<GeneratingFunction> {
    generating_function(1, ts, cavity)
}

/// Symbol of the square lattice: the truncated sum Σ_{|n|≤n_max} c_n e^{in·θ}.
pub fn generating_function_2d(ts: &ThermalState, cavity: &CavityModel) -> Result<GeneratingFunction> {
    generating_function(2, ts, cavity)
}

fn cos_table(n_max: usize, theta: f64) -> Vec<f64> {
    (0..=n_max).map(|n| (n as f64 * theta).cos()).collect()
}

impl GeneratingFunction {
    /// c_n for |n|² = `norm2` (zero beyond the truncation).
    pub fn coefficient(&self, norm2: u64) -> f64 {
        self.coeffs.get(norm2 as usize).copied().unwrap_or(0.0)
    }

    /// Truncated Fourier sum Σ c_n cos(n·θ).
    pub fn fourier_sum(&self, theta: &[f64]) -> f64 {
        let n = self.n_max;
        match self.dim {
            1 => {
                let c = cos_table(n, theta[0]);
                self.coeffs[0] + 2.0 * (1..=n).map(|k| self.coeffs[k * k] * c[k]).sum::<f64>()
            }
            _ => {
                let cx = cos_table(n, theta[0]);
                let cy = cos_table(n, theta[1]);
                let mut s = 0.0;
                for x in 0..=n {
                    let wx = if x == 0 { 1.0 } else { 2.0 };
                    let mut row = 0.0;
                    for y in 0..=n {
                        let k = x * x + y * y;
                        if k > n * n {
                            break;
                        }
                        let wy = if y == 0 { 1.0 } else { 2.0 };
                        row += wy * self.coeffs[k] * cy[y];
                    }
                    s += wx * row * cx[x];
                }
                s
            }
        }
    }

    /// C(θ): the image-sum closed form in one dimension, the lattice sum in
    /// two.
    pub fn eval(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.dim {
            return Err(Error::Domain(format!("expected {} angle(s), got {}", self.dim, theta.len())));
        }
        match self.dim {
            1 => self.closed_form_1d(theta[0]),
            _ => Ok(self.fourier_sum(theta)),
        }
    }

    fn closed_form_1d(&self, theta: f64) -> Result<f64> {
        let (hbar, m) = (self.cavity.hbar, self.cavity.mass);
        let (t, mu) = (self.thermal.temperature, self.thermal.chemical_potential);
        let a = self.lattice_a;
        let theta = theta.abs().rem_euclid(2.0 * PI);
        // C is even: fold onto [0, π] so C(θ) and C(−θ) agree bit for bit.
        let theta = if theta > PI { 2.0 * PI - theta } else { theta };
        let spec = QuadratureSpec::new(1e-300, 1e-13, 4000)?;
        let dispersion = hbar * hbar / (2.0 * m);
        let image = |k: i64| -> Result<f64> {
            let q = (theta - 2.0 * PI * k as f64) / a;
            let base = dispersion * q * q;
            let y_top = ((mu - base).max(0.0) / dispersion).sqrt();
            let y_end = ((mu.max(base) - base + 60.0 * t) / dispersion).sqrt();
            let f = |y: f64| occupation(base + dispersion * y * y, t, mu);
            let mut v = 0.0;
            if y_top > 0.0 {
                v += integrate(f, 0.0, y_top, spec)?;
            }
            v += integrate(f, y_top, y_end, spec)?;
            Ok(v)
        };
        let mut total = image(0)?;
        for k in 1.. {
            let term = image(k)? + image(-k)?;
            total += term;
            if term <= 1e-17 * total || k > 10_000 {
                break;
            }
        }
        Ok(a / PI * total)
    }

    /// Values on the periodic grid θ_j = 2πj/g (g points per axis,
    /// row-major in two dimensions).
    pub fn grid_values(&self, g: usize) -> Vec<f64> {
        let n = self.n_max;
        let thetas: Vec<f64> = (0..g).map(|j| 2.0 * PI * j as f64 / g as f64).collect();
        let cos: Vec<Vec<f64>> = thetas.iter().map(|&t| cos_table(n, t)).collect();
        match self.dim {
            1 => (0..g)
                .map(|j| self.coeffs[0] + 2.0 * (1..=n).map(|k| self.coeffs[k * k] * cos[j][k]).sum::<f64>())
                .collect(),
            _ => {
                // Separable evaluation: rows[j2][x] = Σ_y w_y c(x²+y²) cos(y θ_j2).
                let rows: Vec<Vec<f64>> = (0..g)
                    .map(|j2| {
                        (0..=n)
                            .map(|x| {
                                let mut r = 0.0;
                                for y in 0..=n {
                                    let k = x * x + y * y;
                                    if k > n * n {
                                        break;
                                    }
                                    let wy = if y == 0 { 1.0 } else { 2.0 };
                                    r += wy * self.coeffs[k] * cos[j2][y];
                                }
                                r
                            })
                            .collect()
                    })
                    .collect();
                let mut out = vec![0.0; g * g];
                for j1 in 0..g {
                    for j2 in 0..g {
                        let mut s = rows[j2][0];
                        for x in 1..=n {
                            s += 2.0 * rows[j2][x] * cos[j1][x];
                        }
                        out[j1 * g + j2] = s;
                    }
                }
                out
            }
        }
    }

    /// ∫ dθ/(2π)^d f(C(θ)) by the periodic trapezoid rule, refined until two
    /// successive grids agree to 1e-11 relative (the summation roundoff over
    /// millions of points is ~1e-12).
    pub fn average(&self, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
        let mut g = (2 * self.n_max + 2).next_power_of_two().max(32);
        let cap = if self.dim == 1 { 1 << 16 } else { 2048 };
        let mut prev: Option<f64> = None;
        loop {
            let vals = self.grid_values(g);
            let avg = vals.iter().map(|&c| f(c)).sum::<f64>() / vals.len() as f64;
            if let Some(p) = prev {
                if (avg - p).abs() <= 1e-11 * avg.abs().max(1e-300) {
                    return Ok(avg);
                }
            }
            if g >= cap {
                return Err(Error::numeric(
                    "symbol average did not converge on the finest grid",
                    avg,
                    prev.map_or(f64::INFINITY, |p| (avg - p).abs()),
                ));
            }
            prev = Some(avg);
            g *= 2;
        }
    }

    /// Predicted entropy per site, −∫ dθ/(2π)^d [C ln C + (1−C) ln(1−C)].
    pub fn entropy_per_site(&self) -> Result<f64> {
        self.average(binary_entropy)
    }
}

/// One row of [`szego_check_1d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SzegoPoint {
    pub sites: usize,
    /// ln|D_N(λ)|/N from the eigenvalues.
    pub log_det_per_site: f64,
    /// ∫ dθ/2π ln|λ + 1 − 2C(θ)|.
    pub integral: f64,
    pub deviation: f64,
}

/// ln|D_N(λ)|/N with D_N(λ) = Π(λ + 1 − 2λ_i), taken from the spectrum
/// rather than by factorising the shifted matrix.
pub fn log_det_per_site(m: &CorrelationMatrix, lambda: f64) -> Result<f64> {
    let spectrum = clamp_spectrum(m.eigenvalues()?)?;
    let log_det = spectrum.iter().map(|&l| (lambda + 1.0 - 2.0 * l).abs().ln()).sum::<f64>();
    Ok(log_det / spectrum.len() as f64)
}

/// Compare ln D_N(λ)/N, D_N = Π(λ + 1 − 2λ_i), with the Szegő limit for
/// chains of each size.  Requires |λ| > 1 so that the symbol λ + 1 − 2C never
/// vanishes.
pub fn szego_check_1d(ts: &ThermalState, cavity: &CavityModel, lambda: f64, sizes: &[usize]) -> Result<Vec<SzegoPoint>> {
    if !(lambda.abs() > 1.0) || !lambda.is_finite() {
        return Err(Error::Unsupported(format!(
            "λ = {lambda} makes λ + 1 − 2C(θ) vanish (Fisher–Hartwig regime)"
        )));
    }
    let gf = generating_function_1d(ts, cavity)?;
    let integral = gf.average(|c| (lambda + 1.0 - 2.0 * c).abs().ln())?;
    sizes
        .iter()
        .map(|&n| {
            let mask = SubsystemMask::chain(n, gf.lattice_a)?;
            let m = build_corr_matrix(&mask, ts, cavity)?;
            let per_site = log_det_per_site(&m, lambda)?;
            Ok(SzegoPoint {
                sites: n,
                log_det_per_site: per_site,
                integral,
                deviation: (per_site - integral).abs(),
            })
        })
        .collect()
}

/// Eigenvalue entropy per site against the symbol prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeLawCheck {
    pub sites: usize,
    pub entropy: f64,
    pub entropy_per_site: f64,
    pub formula: f64,
    /// |S/N_A − formula| / formula.
    pub gap: f64,
}

/// Volume-law check on any mask against the symbol's entropy prediction.
pub fn volume_law_check(mask: &SubsystemMask, gf: &GeneratingFunction, ts: &ThermalState, cavity: &CavityModel) -> Result<VolumeLawCheck> {
    let m = build_corr_matrix(mask, ts, cavity)?;
    let entropy = entanglement_entropy(&m)?;
    let formula = gf.entropy_per_site()?;
    let per_site = entropy / mask.len() as f64;
    Ok(VolumeLawCheck {
        sites: mask.len(),
        entropy,
        entropy_per_site: per_site,
        formula,
        gap: (per_site - formula).abs() / formula,
    })
}

/// Square subsystem of the given side against the two-dimensional symbol.
pub fn doktorsky_check_2d(ts: &ThermalState, cavity: &CavityModel, side: usize) -> Result<VolumeLawCheck> {
    let gf = generating_function_2d(ts, cavity)?;
    let mask = SubsystemMask::square(side, gf.lattice_a)?;
    volume_law_check(&mask, &gf, ts, cavity)
}

/// Lattice entanglement-entropy density and its continuum limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EeDensity {
    pub lattice_a: f64,
    /// Entropy per site from the symbol.
    pub per_site: f64,
    /// Entropy per area, S_a/a².
    pub per_area: f64,
    /// Continuum thermal entropy density S₀.
    pub continuum: f64,
    pub rel_gap: f64,
}

pub fn ee_density(ts: &ThermalState, cavity: &CavityModel) -> Result<EeDensity> {
    let gf = generating_function_2d(ts, cavity)?;
    let per_site = gf.entropy_per_site()?;
    let a = gf.lattice_a;
    let continuum = crate::thermo::entropy_density_continuum(ts, cavity)?;
    let per_area = per_site / (a * a);
    Ok(EeDensity {
        lattice_a: a,
        per_site,
        per_area,
        continuum,
        rel_gap: (per_area - continuum).abs() / continuum,
    })
}

/// Two-dimensional Fourier transform of the continuum kernel,
/// ∫ d²r e^{−ip·r} M(r) = 2π ∫ r dr J₀(pr) M(r), which should reproduce
/// n_FD(p²/2m) (with ħ = 1 in the wave-number sense).
pub fn kernel_fourier(p: f64, ts: &ThermalState, cavity: &CavityModel) -> Result<f64> {
    let (hbar, m, t, mu) = (cavity.hbar, cavity.mass, ts.temperature, ts.chemical_potential);
    let k_fermi = (2.0 * m * mu.max(0.0)).sqrt() / hbar;
    // Decay length of M(r): the thermal wavelength or ħv_F/(πT).
    let xi = cavity
        .thermal_wavelength(t)
        .max(hbar * hbar * k_fermi / (m * PI * t));
    let r_max = 45.0 * xi;
    let spec = QuadratureSpec::new(1e-13, 1e-10, 20_000)?;
    let pieces = ((r_max * (p + k_fermi + 1.0)) / (4.0 * PI)).ceil().max(1.0) as usize;
    let w = r_max / pieces as f64;
    let mut total = 0.0;
    for i in 0..pieces {
        let lo = i as f64 * w;
        let mut err = None;
        total += integrate(
            |r| match thermal_kernel(r, ts, cavity) {
                Ok(v) => r * j0(p * r) * v,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            },
            lo,
            lo + w,
            spec,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(2.0 * PI * total)
}

/// Gaussian-regularized Bessel overlap J(γ) = ∫₀^∞ x J₀(ax) J₀(bx) e^{−γ²x²} dx
/// by direct quadrature.  As γ → 0 it tends to a⁻¹δ(a − b), which is what
/// turns the kernel's Fourier transform into the occupation function.
pub fn regularized_bessel_integral(a: f64, b: f64, gamma: f64) -> Result<f64> {
    check_bessel_args(a, b, gamma)?;
    // e^{−γ²x²} < 1e-20 beyond x_max.
    let x_max = 46f64.sqrt() / gamma;
    let pieces = (x_max * (a + b) / (4.0 * PI)).ceil().max(1.0) as usize;
    let w = x_max / pieces as f64;
    let spec = QuadratureSpec::new(1e-12, 1e-12, 2_000)?;
    let g2 = gamma * gamma;
    let mut total = 0.0;
    for i in 0..pieces {
        let lo = i as f64 * w;
        total += integrate(|x| x * j0(a * x) * j0(b * x) * (-g2 * x * x).exp(), lo, lo + w, spec)?;
    }
    Ok(total)
}

/// Closed form of [`regularized_bessel_integral`]:
/// (1/2γ²) e^{−(a²+b²)/4γ²} I₀(ab/2γ²), evaluated with the scaled I₀ so the
/// exponentials never overflow.
pub fn regularized_bessel_closed_form(a: f64, b: f64, gamma: f64) -> Result<f64> {
    check_bessel_args(a, b, gamma)?;
    let g2 = gamma * gamma;
    Ok((-(a - b).powi(2) / (4.0 * g2)).exp() * i0e(a * b / (2.0 * g2)) / (2.0 * g2))
}

fn check_bessel_args(a: f64, b: f64, gamma: f64) -> Result<()> {
    for (name, v) in [("a", a), ("b", b), ("γ", gamma)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(())
}

/// Per-moment comparison of the correlation spectrum with the symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentGap {
    pub moment: u32,
    /// N_A⁻¹ Σ λ_iˢ.
    pub spectral: f64,
    /// ∫ dθ/(2π)^d C(θ)ˢ.
    pub symbol: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
}

pub fn spectral_distribution_check(m: &CorrelationMatrix, gf: &GeneratingFunction, moments: &[u32]) -> Result<Vec<MomentGap>> {
    let spectrum = clamp_spectrum(m.eigenvalues()?)?;
    let n = spectrum.len() as f64;
    moments
        .iter()
        .map(|&s| {
            if s == 0 {
                return Err(Error::Domain("moments start at 1".into()));
            }
            let spectral = spectrum.iter().map(|l| l.powi(s as i32)).sum::<f64>() / n;
            let symbol = gf.average(|c| c.powi(s as i32))?;
            let abs_gap = (spectral - symbol).abs();
            Ok(MomentGap {
                moment: s,
                spectral,
                symbol,
                abs_gap,
                rel_gap: abs_gap / symbol.abs(),
            })
        })
        .collect()
}
