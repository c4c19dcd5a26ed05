use std::f64::consts::{LN_2, PI};

use approx::{assert_abs_diff_eq, assert_relative_eq};
use fermi_cavity::entanglement::*;
use fermi_cavity::mathcore::{rng, sym_eigen, SeededRng, SymmetricMatrix};
use fermi_cavity::thermo::{binary_entropy, occupation, CavityModel, SpectrumModel, ThermalState};
use fermi_cavity::Error;
use rand::Rng;

fn setup(a: f64, t: f64, mu: f64) -> (CavityModel, ThermalState) {
    let cavity = CavityModel::square(1000.0).unwrap().with_lattice(a).unwrap();
    let ts = ThermalState::at(&SpectrumModel::continuous(&cavity), t, mu).unwrap();
    (cavity, ts)
}

/// Σ_K n_FD(ħ²|2πK − θ|²/(2ma²)): the lattice symbol by Poisson summation.
fn poisson_symbol(theta: [f64; 2], a: f64, ts: &ThermalState) -> f64 {
    let mut s = 0.0;
    for kx in -6i32..=6 {
        for ky in -6i32..=6 {
            let qx = (2.0 * PI * kx as f64 - theta[0]) / a;
            let qy = (2.0 * PI * ky as f64 - theta[1]) / a;
            s += occupation(0.5 * (qx * qx + qy * qy), ts.temperature, ts.chemical_potential);
        }
    }
    s
}

fn random_correlation(g: &mut SeededRng, n: usize) -> SymmetricMatrix {
    let a = SymmetricMatrix::from_fn(n, |_, _| g.gen_range(-1.0..1.0));
    let eig = sym_eigen(&a).unwrap();
    let values: Vec<f64> = (0..n).map(|_| g.gen_range(0.01..0.99)).collect();
    let mut k = 0;
    let shaped = fermi_cavity::mathcore::Eigen {
        dim: n,
        values: eig.values.iter().map(|_| {
            k += 1;
            values[k - 1]
        }).collect(),
        vectors: eig.vectors,
    };
    SymmetricMatrix::map_spectrum(&shaped, |l| l)
}

#[test]
fn diagonal_is_lattice_density() {
    let (cavity, ts) = setup(1.0, 1.0, 0.5);
    let m = build_corr_matrix(&SubsystemMask::square(4, 1.0).unwrap(), &ts, &cavity).unwrap();
    let want = ts.particles / cavity.volume;
    for i in 0..16 {
        assert_relative_eq!(m.matrix.get(i, i), want, max_relative = 1e-11);
    }
    assert_eq!(m.volume_fraction, 16.0 / cavity.volume);
}

#[test]
fn two_site_chain_spectrum() {
    let (cavity, ts) = setup(1.0, 1.0, 0.5);
    let m = build_corr_matrix(&SubsystemMask::chain(2, 1.0).unwrap(), &ts, &cavity).unwrap();
    let (c0, c1) = (m.matrix.get(0, 0), m.matrix.get(1, 0));
    let ev = m.eigenvalues().unwrap();
    assert_abs_diff_eq!(ev[0], c0 - c1.abs(), epsilon = 1e-15);
    assert_abs_diff_eq!(ev[1], c0 + c1.abs(), epsilon = 1e-15);
}

#[test]
fn entropy_of_simple_spectra() {
    let pure = CorrelationMatrix::new(SymmetricMatrix::from_fn(3, |i, j| if i == j && i != 1 { 1.0 } else { 0.0 })).unwrap();
    assert_eq!(entanglement_entropy(&pure).unwrap(), 0.0);
    let half = CorrelationMatrix::new(SymmetricMatrix::from_dense(1, &[0.5]).unwrap()).unwrap();
    assert_abs_diff_eq!(entanglement_entropy(&half).unwrap(), LN_2, epsilon = 1e-15);
    let toeplitz = CorrelationMatrix::new(SymmetricMatrix::from_dense(2, &[0.5, 0.1, 0.1, 0.5]).unwrap()).unwrap();
    assert_abs_diff_eq!(entanglement_entropy(&toeplitz).unwrap(), 1.346_023_5, epsilon = 1e-6);
}

#[test]
fn out_of_range_spectrum_is_integrity_error() {
    let bad = CorrelationMatrix::new(SymmetricMatrix::from_dense(1, &[1.001]).unwrap()).unwrap();
    assert!(matches!(entanglement_entropy(&bad), Err(Error::Integrity(_))));
    // Tiny excursions are clamped.
    let ok = CorrelationMatrix::new(SymmetricMatrix::from_dense(1, &[1.0 + 1e-9]).unwrap()).unwrap();
    assert_eq!(entanglement_entropy(&ok).unwrap(), 0.0);
}

#[test]
fn mode_entropy_is_particle_hole_symmetric() {
    for k in 0..=20 {
        let v = -1.0 + 0.1 * k as f64;
        assert_abs_diff_eq!(mode_entropy(v), mode_entropy(-v), epsilon = 1e-16);
    }
    assert_eq!(mode_entropy(0.0), LN_2);
}

#[test]
fn toeplitz_entries_depend_on_offset_only() {
    let (cavity, ts) = setup(1.2, 1.0, 1.0);
    let mask = SubsystemMask::square(5, 1.2).unwrap();
    let m = build_corr_matrix(&mask, &ts, &cavity).unwrap();
    let sites = mask.sites();
    for i in 0..sites.len() {
        for j in 0..sites.len() {
            for k in 0..sites.len() {
                for l in 0..sites.len() {
                    let d1 = [sites[i][0] - sites[j][0], sites[i][1] - sites[j][1]];
                    let d2 = [sites[k][0] - sites[l][0], sites[k][1] - sites[l][1]];
                    if d1 == d2 {
                        assert_eq!(m.matrix.get(i, j), m.matrix.get(k, l));
                    }
                }
            }
        }
    }
}

#[test]
fn entropy_bounds_and_translation_invariance() {
    let (cavity, ts) = setup(1.0, 0.8, 1.0);
    let mask = SubsystemMask::disk(4.0, 1.0).unwrap();
    let s = entanglement_entropy(&build_corr_matrix(&mask, &ts, &cavity).unwrap()).unwrap();
    assert!(s > 0.0 && s <= mask.len() as f64 * LN_2);
    let moved = mask.translated(37, -12);
    let s2 = entanglement_entropy(&build_corr_matrix(&moved, &ts, &cavity).unwrap()).unwrap();
    assert_relative_eq!(s, s2, max_relative = 1e-12);
}

#[test]
fn coarse_lattice_is_rejected() {
    let (cavity, ts) = setup(3.0, 1.0, 0.0);
    let mask = SubsystemMask::square(3, 3.0).unwrap();
    assert!(matches!(build_corr_matrix(&mask, &ts, &cavity), Err(Error::Precondition(_))));
    assert!(matches!(generating_function_2d(&ts, &cavity), Err(Error::Precondition(_))));
    // Mismatched lattice constants are a domain error.
    let (cavity, ts) = setup(1.0, 1.0, 0.0);
    assert!(matches!(
        build_corr_matrix(&SubsystemMask::square(3, 0.5).unwrap(), &ts, &cavity),
        Err(Error::Domain(_))
    ));
}

#[test]
fn one_dimensional_symbol_closed_form_matches_fourier_sum() {
    let (cavity, ts) = setup(1.5, 1.0, 0.0);
    let gf = generating_function_1d(&ts, &cavity).unwrap();
    for &theta in &[0.0, 0.7, 1.9, 3.0, -2.2] {
        let closed = gf.eval(&[theta]).unwrap();
        let sum = gf.fourier_sum(&[theta]);
        assert!((closed - sum).abs() < 1e-8, "θ={theta}: {closed} vs {sum}");
        assert!(closed >= 0.0);
        assert_eq!(closed, gf.eval(&[-theta]).unwrap());
    }
    let mean = gf.average(|c| c).unwrap();
    assert_relative_eq!(mean, ts.particles / cavity.volume * 1.5 * 1.5, max_relative = 1e-11);
}

#[test]
fn two_dimensional_symbol_matches_poisson_sum() {
    let (cavity, ts) = setup(1.5, 1.0, 0.0);
    let gf = generating_function_2d(&ts, &cavity).unwrap();
    let g = 101;
    let grid: Vec<f64> = (0..g).map(|j| -PI + 2.0 * PI * j as f64 / (g - 1) as f64).collect();
    let c00 = gf.eval(&[0.0, 0.0]).unwrap();
    for &t1 in grid.iter().step_by(5) {
        for &t2 in grid.iter().step_by(5) {
            let c = gf.eval(&[t1, t2]).unwrap();
            assert!((-1e-9..=1.0 + 1e-9).contains(&c));
            assert!(c <= c00);
            let oracle = poisson_symbol([t1, t2], 1.5, &ts);
            assert!((c - oracle).abs() < 1e-10, "({t1}, {t2}): {c} vs {oracle}");
        }
    }
    // Full 101×101 bound check through the fast grid path.
    let vals = gf.grid_values(g);
    assert!(vals.iter().all(|c| (-1e-9..=1.0 + 1e-9).contains(c)));
    assert!(vals.iter().all(|&c| c <= c00 + 1e-15));
}

#[test]
fn coefficients_follow_gaussian_lemma_in_classical_regime() {
    // μ/T = −8: Maxwell–Boltzmann; 2ħ²/(ma²T) = 2, test |n|² well above it
    // but below ~4|μ|/T where the next fugacity term takes over.
    let (cavity, ts) = setup(1.0, 1.0, -8.0);
    let norms = [8u64, 9, 10, 13, 16, 18];
    let c = lattice_coefficients(&norms, 1.0, &ts, &cavity).unwrap();
    for (&n2, &v) in norms.iter().zip(&c) {
        let lemma = gaussian_tail_coefficient(n2 as f64, &ts, &cavity);
        assert_relative_eq!(v, lemma, max_relative = 0.1);
    }
}

#[test]
fn truncation_leaves_negligible_tail() {
    for &(a, mu) in &[(1.5, 0.0), (0.5, 2.0)] {
        let (cavity, ts) = setup(a, 1.0, mu);
        let gf = generating_function_2d(&ts, &cavity).unwrap();
        let n = gf.n_max as u64;
        let beyond: Vec<u64> = (n + 1..n + 8).map(|r| r * r).collect();
        let c = lattice_coefficients(&beyond, a, &ts, &cavity).unwrap();
        for (r, v) in (n + 1..).zip(&c) {
            assert!(2.0 * PI * r as f64 * v.abs() < TAIL_TOLERANCE, "a={a}: r={r} c={v}");
        }
    }
}

#[test]
fn szego_constant_symbol_is_exact() {
    let c = 0.3;
    let m = CorrelationMatrix::new(SymmetricMatrix::from_fn(7, |i, j| if i == j { c } else { 0.0 })).unwrap();
    assert_abs_diff_eq!(log_det_per_site(&m, 3.0).unwrap(), (4.0f64 - 2.0 * c).ln(), epsilon = 1e-15);
}

#[test]
fn szego_deviation_shrinks_with_size() {
    let (cavity, ts) = setup(1.5, 1.0, 0.0);
    let rows = szego_check_1d(&ts, &cavity, 3.0, &[64, 256]).unwrap();
    assert!(rows[1].deviation <= 0.5 * rows[0].deviation, "{rows:?}");
    assert!(matches!(szego_check_1d(&ts, &cavity, 0.5, &[8]), Err(Error::Unsupported(_))));
}

#[test]
fn chain_entropy_follows_symbol() {
    let (cavity, ts) = setup(1.5, 1.0, 0.0);
    let gf = generating_function_1d(&ts, &cavity).unwrap();
    let mask = SubsystemMask::chain(400, 1.5).unwrap();
    let check = volume_law_check(&mask, &gf, &ts, &cavity).unwrap();
    assert!(check.gap < 0.02, "{check:?}");
}

#[test]
fn square_and_disk_volume_law() {
    let (cavity, ts) = setup(1.5, 1.0, 0.0);
    let side20 = doktorsky_check_2d(&ts, &cavity, 20).unwrap();
    assert!(side20.gap < 0.05, "{side20:?}");
    let side12 = doktorsky_check_2d(&ts, &cavity, 12).unwrap();
    assert!(side20.gap < side12.gap);
    // Disk of the same area as the side-12 square.
    let gf = generating_function_2d(&ts, &cavity).unwrap();
    let disk = SubsystemMask::disk(1.5 * 12.0 / PI.sqrt(), 1.5).unwrap();
    let d = volume_law_check(&disk, &gf, &ts, &cavity).unwrap();
    assert_relative_eq!(d.entropy_per_site, side12.entropy_per_site, max_relative = 0.05);
}

#[test]
fn moments_match_symbol() {
    let (cavity, ts) = setup(1.5, 1.0, 0.0);
    let gf = generating_function_2d(&ts, &cavity).unwrap();
    let mut last = [f64::INFINITY; 3];
    for side in [8, 14] {
        let m = build_corr_matrix(&SubsystemMask::square(side, 1.5).unwrap(), &ts, &cavity).unwrap();
        let gaps = spectral_distribution_check(&m, &gf, &[1, 2, 3]).unwrap();
        assert!(gaps[0].rel_gap < 1e-12);
        for k in 1..3 {
            assert!(gaps[k].rel_gap < last[k], "side {side}: {:?}", gaps[k]);
            last[k] = gaps[k].rel_gap;
        }
    }
}

#[test]
fn continuum_limit_of_entropy_density() {
    let (cavity, ts) = setup(1.0, 1.0, 0.0);
    let lam = cavity.thermal_wavelength(1.0);
    let mut last = f64::INFINITY;
    for a in [1.5, 1.0, 0.5, lam / 10.0] {
        let d = ee_density(&ts, &cavity.with_lattice(a).unwrap()).unwrap();
        assert!(d.rel_gap < last, "a={a}: {d:?}");
        last = d.rel_gap;
    }
    assert!(last < 0.01);
}

#[test]
fn kernel_fourier_transform_is_occupation() {
    let (cavity, ts) = setup(1.0, 1.0, 1.0);
    for &p in &[0.0, 0.6, 1.4, 2.0] {
        let ft = kernel_fourier(p, &ts, &cavity).unwrap();
        let want = occupation(0.5 * p * p, 1.0, 1.0);
        assert!((ft - want).abs() < 1e-6, "p={p}: {ft} vs {want}");
    }
}

#[test]
fn effective_hamiltonian_cases() {
    let half = CorrelationMatrix::new(SymmetricMatrix::from_fn(3, |i, j| if i == j { 0.5 } else { 0.0 })).unwrap();
    let h = effective_hamiltonian(&half).unwrap();
    assert!(h.h.frobenius_norm() < 1e-15);
    let diag = CorrelationMatrix::new(SymmetricMatrix::from_dense(2, &[0.25, 0.0, 0.0, 0.75]).unwrap()).unwrap();
    let h = effective_hamiltonian(&diag).unwrap();
    assert_abs_diff_eq!(h.h.get(0, 0), 3f64.ln(), epsilon = 1e-14);
    assert_abs_diff_eq!(h.h.get(1, 1), -(3f64.ln()), epsilon = 1e-14);
    assert_eq!(h.clipped, 0);
}

#[test]
fn effective_hamiltonian_round_trip() {
    let mut g = rng(13);
    for _ in 0..5 {
        let m = random_correlation(&mut g, 20);
        let h = effective_hamiltonian(&CorrelationMatrix::new(m.clone()).unwrap()).unwrap();
        let back = correlation_from_hamiltonian(&h.h).unwrap();
        let mut r = 0.0;
        for i in 0..20 {
            for j in 0..20 {
                r += (back.get(i, j) - m.get(i, j)).powi(2);
            }
        }
        assert!(r.sqrt() < 1e-10, "{}", r.sqrt());
    }
}

#[test]
fn gaussian_entropy_equals_spectral_entropy() {
    let mut g = rng(17);
    for _ in 0..50 {
        let n = g.gen_range(1..12);
        let m = random_correlation(&mut g, n);
        let a = gaussian_entropy(&m).unwrap();
        let b = entanglement_entropy(&CorrelationMatrix::new(m).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    let half = SymmetricMatrix::from_fn(6, |i, j| if i == j { 0.5 } else { 0.0 });
    assert_abs_diff_eq!(gaussian_entropy(&half).unwrap(), 6.0 * LN_2, epsilon = 1e-14);
}

#[test]
fn scaled_thermal_matrix_entropy_is_continuous() {
    let (cavity, ts) = setup(1.0, 1.0, 0.5);
    let m = build_corr_matrix(&SubsystemMask::square(5, 1.0).unwrap(), &ts, &cavity).unwrap();
    let scaled = |s: f64| {
        let data: Vec<f64> = m.matrix.packed_entries().iter().map(|v| s * v).collect();
        gaussian_entropy(&SymmetricMatrix::from_packed(25, data).unwrap()).unwrap()
    };
    let mut prev = scaled(1.0);
    for k in 1..=40 {
        let s = 1.0 - k as f64 / 40.0;
        let cur = scaled(s);
        assert!((cur - prev).abs() < 0.25 * 25.0 * LN_2, "jump at s={s}");
        prev = cur;
    }
    assert_eq!(prev, 0.0);
    assert!(scaled(1e-8) < 1e-5);
    // Sanity: entropy of the unscaled matrix is positive and sub-maximal.
    assert!(binary_entropy(0.5) * 25.0 > scaled(1.0));
}

#[test]
fn regularized_bessel_overlap_matches_closed_form() {
    for gamma in [0.3, 0.1, 0.03] {
        for (a, b) in [(1.0, 1.0), (1.0, 1.2), (2.0, 0.7), (0.4, 0.45)] {
            let quad = regularized_bessel_integral(a, b, gamma).unwrap();
            let closed = regularized_bessel_closed_form(a, b, gamma).unwrap();
            assert!(
                (quad - closed).abs() <= 1e-8 * closed.abs().max(1.0),
                "γ={gamma} a={a} b={b}: {quad} vs {closed}"
            );
        }
    }
    assert!(regularized_bessel_closed_form(1.0, 1.0, 0.0).is_err());
}

#[test]
fn regularized_bessel_overlap_becomes_a_delta() {
    // ∫ db J(γ) → 1/a, with the weight piling up at b = a as γ shrinks.
    let a = 1.3;
    let mut last_fraction = 0.0;
    let mut last_peak = 0.0;
    for gamma in [0.3, 0.1, 0.03, 0.01] {
        let db = gamma / 200.0;
        let (mut mass, mut near) = (0.0, 0.0);
        let mut b = 0.5 * db;
        while b < a + 40.0 * gamma + 2.0 {
            let j = regularized_bessel_closed_form(a, b, gamma).unwrap() * db;
            mass += j;
            if (b - a).abs() < 0.1 {
                near += j;
            }
            b += db;
        }
        let peak = regularized_bessel_closed_form(a, a, gamma).unwrap();
        assert!(near / mass > last_fraction && peak > last_peak);
        last_fraction = near / mass;
        last_peak = peak;
        if gamma <= 0.03 {
            assert_relative_eq!(mass, 1.0 / a, max_relative = 1e-3);
        }
    }
    assert!(last_fraction > 0.999);
}
