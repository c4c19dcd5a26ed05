// Oracle values keep every digit of their source.
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use approx::{assert_abs_diff_eq, assert_relative_eq};
use fermi_cavity::mathcore::*;
use fermi_cavity::Error;
use proptest::prelude::*;
use rand::Rng;

// Reference values from 40-digit mpmath evaluations.
const BESSEL_J: [(f64, f64, f64); 16] = [
    (0.5, 0.938_469_807_240_812_904_23, 0.242_268_457_674_873_886_38),
    (1.0, 0.765_197_686_557_966_551_45, 0.440_050_585_744_933_515_96),
    (2.5, -0.048_383_776_468_197_996_327, 0.497_094_102_464_274_038_01),
    (5.0, -0.177_596_771_314_338_304_35, -0.327_579_137_591_465_222_04),
    (8.0, 0.171_650_807_137_553_906_09, 0.234_636_346_853_914_624_38),
    (11.5, -0.067_653_948_111_665_228_432, -0.228_378_620_665_323_474_61),
    (11.999, 0.047_465_830_573_456_671_239, -0.223_513_306_194_832_036_52),
    (12.0, 0.047_689_310_796_833_536_624, -0.223_447_104_490_627_612_37),
    (12.001, 0.047_912_724_710_314_494_455, -0.223_380_686_416_877_039_93),
    (13.0, 0.206_926_102_377_067_811, -0.070_318_052_121_778_371_157),
    (17.3, -0.133_700_647_075_764_194_45, -0.141_423_335_492_013_986_08),
    (25.0, 0.096_266_783_275_958_116_174, -0.125_350_249_580_289_904_65),
    (50.0, 0.055_812_327_669_251_815_005, -0.097_511_828_125_175_137_661),
    (100.0, 0.019_985_850_304_223_122_424, -0.077_145_352_014_112_158_033),
    (257.5, 0.031_044_726_694_670_758_705, -0.038_779_592_620_993_667_328),
    (499.0, -0.009_593_099_634_978_921_257_3, 0.034_396_260_940_337_637_501),
];

const BESSEL_I0: [(f64, f64, f64); 9] = [
    (0.1, 1.002_501_562_934_095_601_7, 0.907_100_925_782_301_091_65),
    (1.0, 1.266_065_877_752_008_335_6, 0.465_759_607_593_640_436_5),
    (5.0, 27.239_871_823_604_446_895, 0.183_540_812_609_328_353_07),
    (10.0, 2_815.716_628_466_254_471_5, 0.127_833_337_163_428_607_32),
    (29.9, 708_478_330_489.014_526_07, 0.073_269_219_046_001_907_707),
    (30.1, 862_432_920_031.779_212_49, 0.073_023_294_131_060_941_854),
    (45.0, 2.083_414_075_177_314_816_2e18, 0.059_638_115_011_731_949_075),
    (100.0, 1.073_751_707_131_073_823_5e42, 0.039_944_379_299_096_682_648),
    (667.0, 7.300_423_072_030_220_759_8e287, 0.015_450_004_117_072_392_204),
];

const GAMMA: [(f64, f64); 11] = [
    (0.1, 9.513_507_698_668_731_285_8),
    (0.5, 1.772_453_850_905_516_027_3),
    (1.5, 0.886_226_925_452_758_013_65),
    (2.5, 1.329_340_388_179_137_020_5),
    (3.7, 4.170_651_783_796_604_030_1),
    (7.25, 1_155.381_013_919_989_687_2),
    (10.0, 362_880.0),
    (17.5, 85_634_974_475_162.063_871),
    (-0.5, -3.544_907_701_811_032_054_6),
    (-1.5, 2.363_271_801_207_354_703_1),
    (-2.7, -0.931_082_784_838_963_965_46),
];

const LN_GAMMA: [(f64, f64); 4] = [
    (50.5, 146.519_255_490_720_627_221_891_3),
    (150.0, 600.009_470_555_327_428_107_958_7),
    (1000.5, 5_908.674_175_848_677_488_683_875),
    (100000.0, 1_051_287.708_973_656_894_900_858),
];

/// (a, b, γ, ∫₀^∞ x J0(ax) J0(bx) e^{−γ²x²} dx) from the I0 closed form.
const BESSEL_GAUSS: [(f64, f64, f64, f64); 5] = [
    (1.0, 1.2, 0.3, 0.783_993_298_385_223_903_17),
    (1.0, 1.2, 0.1, 0.949_341_393_399_000_180_58),
    (1.0, 1.2, 0.03, 0.000_128_312_934_769_361_314_44),
    (1.0, 1.0, 0.1, 2.828_081_332_372_709_426_6),
    (0.7, 2.0, 0.5, 0.093_295_113_482_810_772_215),
];

fn tight() -> QuadratureSpec {
    QuadratureSpec::new(1e-13, 1e-12, 5000).unwrap()
}

#[test]
fn bessel_j_matches_reference_values() {
    for &(x, r0, r1) in &BESSEL_J {
        assert_abs_diff_eq!(bessel_j0(x).unwrap(), r0, epsilon = 1e-12);
        assert_abs_diff_eq!(bessel_j1(x).unwrap(), r1, epsilon = 1e-12);
        assert_eq!(bessel_j0(-x).unwrap(), bessel_j0(x).unwrap());
        assert_eq!(bessel_j1(-x).unwrap(), -bessel_j1(x).unwrap());
    }
    assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
}

#[test]
fn bessel_rejects_non_finite() {
    assert!(matches!(bessel_j0(f64::NAN), Err(Error::Domain(_))));
    assert!(matches!(bessel_j1(f64::INFINITY), Err(Error::Domain(_))));
    assert!(matches!(bessel_i0(f64::NEG_INFINITY), Err(Error::Domain(_))));
}

#[test]
fn first_zero_of_j0_by_bisection() {
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if j0(lo) * j0(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert_abs_diff_eq!(0.5 * (lo + hi), 2.404_826, epsilon = 1e-6);
    assert_abs_diff_eq!(j0(2.404_826), 0.0, epsilon = 1e-6);
}

#[test]
fn j0_at_fifty_matches_independent_asymptotic_form() {
    // Hand-coded Hankel coefficients through 1/x⁵.
    let x: f64 = 50.0;
    let p = 1.0 - 9.0 / (128.0 * x.powi(2)) + 3675.0 / (32768.0 * x.powi(4));
    let q = -1.0 / (8.0 * x) + 75.0 / (1024.0 * x.powi(3)) - 59535.0 / (262_144.0 * x.powi(5));
    let chi = x - PI / 4.0;
    let oracle = (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin());
    assert_abs_diff_eq!(j0(x), oracle, epsilon = 1e-8);
}

#[test]
fn bessel_seam_cross_check() {
    // Dense scan across the series/asymptotic hand-over: the derivative
    // identity J0' = −J1 must hold through the seam.
    let mut x = 11.9;
    while x < 12.1 {
        let d0 = (j0(x + 1e-4) - j0(x - 1e-4)) / 2e-4;
        assert_abs_diff_eq!(d0, -j1(x), epsilon = 1e-8);
        x += 0.003;
    }
}

#[test]
fn wronskian_consistency() {
    // J0 J1' − J0' J1 with J0' = −J1 and J1' = J0 − J1/x.
    for &x in &[0.3, 1.7, 4.2, 9.9, 12.5, 33.3, 120.0] {
        let h = 1e-5;
        let d0 = (j0(x + h) - j0(x - h)) / (2.0 * h);
        let d1 = (j1(x + h) - j1(x - h)) / (2.0 * h);
        let numeric = j0(x) * d1 - d0 * j1(x);
        let analytic = j0(x) * j0(x) - j0(x) * j1(x) / x + j1(x) * j1(x);
        assert_abs_diff_eq!(numeric, analytic, epsilon = 1e-8);
    }
}

#[test]
fn modified_bessel_reference_values() {
    for &(x, i0, scaled) in &BESSEL_I0 {
        assert_relative_eq!(bessel_i0(x).unwrap(), i0, max_relative = 1e-13);
        assert_abs_diff_eq!(bessel_i0e(x).unwrap(), scaled, epsilon = 1e-14);
        assert_relative_eq!(bessel_i0e(x).unwrap(), scaled, max_relative = 1e-12);
    }
    assert_eq!(bessel_i0(0.0).unwrap(), 1.0);
}

#[test]
fn gamma_reference_values() {
    assert_abs_diff_eq!(gamma_fn(1.0).unwrap(), 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(gamma_fn(0.5).unwrap(), PI.sqrt(), epsilon = 1e-14);
    for &(x, g) in &GAMMA {
        assert_relative_eq!(gamma_fn(x).unwrap(), g, max_relative = 1e-13);
    }
    for &(x, lg) in &LN_GAMMA {
        assert_relative_eq!(ln_gamma(x).unwrap(), lg, max_relative = 1e-14);
    }
}

#[test]
fn gamma_poles_are_domain_errors() {
    for &x in &[0.0, -1.0, -7.0] {
        assert!(matches!(gamma_fn(x), Err(Error::Domain(_))));
        assert!(matches!(ln_gamma(x), Err(Error::Domain(_))));
    }
}

#[test]
fn eigen_two_by_two_closed_form() {
    let m = SymmetricMatrix::from_dense(2, &[0.5, 0.1, 0.1, 0.5]).unwrap();
    let e = sym_eigen(&m).unwrap();
    assert_abs_diff_eq!(e.values[0], 0.4, epsilon = 1e-15);
    assert_abs_diff_eq!(e.values[1], 0.6, epsilon = 1e-15);
    assert!(e.reconstruction_residual(&m) < 1e-15);
}

#[test]
fn eigen_identity() {
    let e = sym_eigen(&SymmetricMatrix::identity(5)).unwrap();
    assert!(e.values.iter().all(|&v| v == 1.0));
}

fn random_symmetric(n: usize, seed: u64) -> SymmetricMatrix {
    let mut r = rng(seed);
    SymmetricMatrix::from_fn(n, |_, _| r.gen_range(-1.0..1.0))
}

#[test]
fn eigen_random_fifty_is_orthonormal_and_reconstructs() {
    let m = random_symmetric(50, 11);
    let e = sym_eigen(&m).unwrap();
    let n = 50;
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let dot: f64 = (0..n).map(|i| e.vector_component(i, a) * e.vector_component(i, b)).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - want).abs());
        }
    }
    assert!(worst < 1e-10, "QᵀQ − I = {worst:e}");
    assert!(e.reconstruction_residual(&m) <= 1e-10 * m.frobenius_norm());
    assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn eigenvalues_only_agree_with_full_decomposition() {
    let m = random_symmetric(37, 5);
    let full = sym_eigen(&m).unwrap().values;
    let only = sym_eigenvalues(&m).unwrap();
    for (a, b) in full.iter().zip(&only) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-13);
    }
}

#[test]
fn eigen_rejects_empty_and_non_finite() {
    assert!(sym_eigen(&SymmetricMatrix::zeros(0)).is_err());
    let mut m = SymmetricMatrix::identity(3);
    m.set(2, 0, f64::NAN);
    assert!(sym_eigen(&m).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigen_preserves_trace_and_frobenius(n in 1usize..24, seed in any::<u64>()) {
        let m = random_symmetric(n, seed);
        let ev = sym_eigenvalues(&m).unwrap();
        let sum: f64 = ev.iter().sum();
        let fro = ev.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = m.frobenius_norm().max(1.0);
        prop_assert!((sum - m.trace()).abs() <= 1e-10 * scale);
        prop_assert!((fro - m.frobenius_norm()).abs() <= 1e-10 * scale);
    }

    #[test]
    fn integrate_is_linear(c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, w in 0.5f64..8.0) {
        let spec = tight();
        let f = |x: f64| (w * x).sin() * (-x).exp();
        let g = |x: f64| x.powi(3) / (1.0 + x * x);
        let lhs = integrate(|x| c1 * f(x) + c2 * g(x), 0.0, 3.0, spec).unwrap();
        let rhs = c1 * integrate(f, 0.0, 3.0, spec).unwrap() + c2 * integrate(g, 0.0, 3.0, spec).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + lhs.abs()));
    }
}

#[test]
fn integrate_exponential_to_infinity() {
    let v = integrate(|x| (-x).exp(), 0.0, f64::INFINITY, tight()).unwrap();
    assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
}

#[test]
fn integrate_endpoint_singularity() {
    // Within one ulp of x = 1 the integrand still carries ~√(2·1e-16) of
    // mass, so 1e-8 is about the best any x-parameterised rule can certify.
    let spec = QuadratureSpec::new(5e-8, 1e-12, 5000).unwrap();
    let e = integrate_estimate(|x| 1.0 / (1.0 - x * x).sqrt(), 0.0, 1.0, spec).unwrap();
    assert_abs_diff_eq!(e.value, PI / 2.0, epsilon = 5e-8);
    assert!(e.error <= 5e-8);
}

fn bessel_gauss_quadrature(a: f64, b: f64, g: f64) -> f64 {
    // The Gaussian factor is below 1e-30 past x = 8.4/γ.
    integrate(
        |x| x * j0(a * x) * j0(b * x) * (-g * g * x * x).exp(),
        0.0,
        8.4 / g,
        QuadratureSpec::new(1e-13, 1e-12, 20_000).unwrap(),
    )
    .unwrap()
}

#[test]
fn integrate_bessel_gaussian_identity() {
    for &(a, b, g, want) in &BESSEL_GAUSS {
        let closed = (-(a - b) * (a - b) / (4.0 * g * g)).exp() * i0e(a * b / (2.0 * g * g)) / (2.0 * g * g);
        assert_relative_eq!(closed, want, max_relative = 1e-11);
        assert_abs_diff_eq!(bessel_gauss_quadrature(a, b, g), want, epsilon = 1e-8);
    }
}

#[test]
fn newton_linear_system() {
    let r = newton2d(|v| [v[0] - 1.0, v[1] + 2.0], [0.0, 0.0], 1e-12).unwrap();
    assert_abs_diff_eq!(r[0], 1.0, epsilon = 1e-10);
    assert_abs_diff_eq!(r[1], -2.0, epsilon = 1e-10);
}

#[test]
fn newton_reports_divergence() {
    // No real root: x² + 1 = 0.
    assert!(newton2d(|v| [v[0] * v[0] + 1.0, v[1]], [0.3, 0.0], 1e-12).is_err());
}

#[test]
fn neldermead_quadratic_bowl() {
    let x = neldermead(|v| (v[0] - 3.0).powi(2) + (v[1] - 4.0).powi(2), &[0.0, 0.0], 1e-10).unwrap();
    assert_abs_diff_eq!(x[0], 3.0, epsilon = 1e-8);
    assert_abs_diff_eq!(x[1], 4.0, epsilon = 1e-8);
}

#[test]
fn neldermead_rosenbrock() {
    let f = |v: &[f64]| (1.0 - v[0]).powi(2) + 100.0 * (v[1] - v[0] * v[0]).powi(2);
    let x = neldermead(f, &[-1.2, 1.0], 1e-12).unwrap();
    assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-6);
    // Gradient stationarity at the returned point.
    let gx = -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]);
    let gy = 200.0 * (x[1] - x[0] * x[0]);
    assert!(gx.abs() < 1e-4 && gy.abs() < 1e-4);
}

#[test]
fn rng_same_seed_same_stream() {
    let mut a = rng(42);
    let mut b = rng(42);
    for _ in 0..1_000_000 {
        assert_eq!(a.gen::<u64>(), b.gen::<u64>());
    }
}

fn kolmogorov_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut p = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = 2.0 * (-2.0 * kf * kf * lambda * lambda).exp();
        p += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

#[test]
fn rng_passes_kolmogorov_smirnov() {
    for seed in [1u64, 2024] {
        let mut r = rng(seed);
        let n = 100_000;
        let mut xs: Vec<f64> = (0..n).map(|_| r.gen::<f64>()).collect();
        xs.sort_by(f64::total_cmp);
        let mut d: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            d = d.max(((i + 1) as f64 / n as f64 - x).abs()).max((x - i as f64 / n as f64).abs());
        }
        let p = kolmogorov_p_value(d, n);
        assert!(p > 0.01, "seed {seed}: D = {d}, p = {p}");
    }
}

#[test]
fn rng_mean_is_one_half() {
    let mut r = rng(9);
    let n = 1_000_000;
    let mean = (0..n).map(|_| r.gen::<f64>()).sum::<f64>() / n as f64;
    assert_abs_diff_eq!(mean, 0.5, epsilon = 0.002);
}

#[test]
fn derived_seeds_are_distinct() {
    let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
    assert_eq!(seeds.len(), 1000);
}

#[test]
fn small_determinants_agree() {
    let mut r = rng(3);
    for n in 1..7 {
        let data: Vec<f64> = (0..n * n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let lu = determinant(n, &data).unwrap();
        let lb = leibniz_determinant(n, &data).unwrap();
        assert_abs_diff_eq!(lu, lb, epsilon = 1e-13);
    }
}
