//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets the tolerance.  A semi-infinite range `[a, +inf)` is mapped
//! onto `[0, 1)` by `x = a + t/(1−t)`.  The error heuristic is the usual
//! QUADPACK one.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) || self.max_subdivisions < 1 {
            return Err(Error::Domain(format!(
                "quadrature spec needs positive tolerances and at least one subdivision, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Result of a successful integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Piece {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        // Near a singular endpoint the abscissas of a tiny interval can round
        // onto the endpoint itself; keep them strictly inside.
        let f1 = f((centre - dx).max(a.next_up()));
        let f2 = f((centre + dx).min(b.next_down()));
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    let roundoff = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && roundoff > error {
        error = roundoff;
    }
    if !value.is_finite() || !error.is_finite() {
        error = f64::INFINITY;
    }
    Piece { a, b, value, error }
}

/// Integrate `f` over `[a, b]`; `b = f64::INFINITY` selects the semi-infinite
/// mapping and requires `f` to decay.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, spec: QuadratureSpec) -> Result<f64> {
    integrate_estimate(f, a, b, spec).map(|e| e.value)
}

/// Like [`integrate`] but also returns the error estimate.
pub fn integrate_estimate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    if !a.is_finite() || b.is_nan() || b == f64::NEG_INFINITY {
        return Err(Error::Domain(format!("integrate: bad range [{a}, {b}]")));
    }
    if b.is_infinite() {
        let mut g = |t: f64| {
            let s = 1.0 - t;
            let v = f(a + t / s);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        };
        return adapt(&mut g, 0.0, 1.0, spec);
    }
    match a.partial_cmp(&b) {
        Some(Ordering::Less) => adapt(&mut f, a, b, spec),
        Some(Ordering::Equal) => Ok(Estimate {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        }),
        _ => Err(Error::Domain(format!("integrate: need a < b, got [{a}, {b}]"))),
    }
}

fn adapt<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, spec: QuadratureSpec) -> Result<Estimate> {
    let first = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    let mut total = first.value;
    let mut total_err = first.error;
    heap.push(first);
    // Pieces too narrow to split further; they keep their error forever.
    let mut frozen_err = 0.0;
    let mut intervals = 1;
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            return Ok(Estimate {
                value: total,
                error: total_err,
                intervals,
            });
        }
        if intervals >= spec.max_subdivisions || heap.is_empty() {
            return Err(Error::numeric(
                format!(
                    "quadrature on [{a}, {b}] missed tolerance {tol:e} after {intervals} intervals ({frozen_err:e} of the error is below resolution)"
                ),
                total,
                total_err,
            ));
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 8.0 * f64::EPSILON * mid.abs() {
            frozen_err += worst.error;
            // Keep the frozen piece out of the heap but still in the totals.
            if heap.is_empty() {
                return Err(Error::numeric(
                    format!("quadrature on [{a}, {b}] hit the resolution limit of the range"),
                    total,
                    total_err,
                ));
            }
            continue;
        }
        let left = gk15(f, worst.a, mid);
        let right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        intervals += 1;
    }
}
