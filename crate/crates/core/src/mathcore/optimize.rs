//! Root finding and derivative-free minimisation.

use crate::error::{Error, Result};

const NEWTON_MAX_ITER: usize = 100;

/// Solve `g(x) = 0` in two dimensions by Newton's method with a central
/// finite-difference Jacobian and a backtracking line search on `‖g‖`.
///
/// Succeeds once `‖g‖ < tol`.
pub fn newton2d<G>(mut g: G, x0: [f64; 2], tol: f64) -> Result<[f64; 2]>
where
    G: FnMut([f64; 2]) -> [f64; 2],
{
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("newton2d: tolerance must be positive, got {tol}")));
    }
    let norm = |v: [f64; 2]| v[0].hypot(v[1]);
    let mut x = x0;
    let mut gx = g(x);
    for _ in 0..NEWTON_MAX_ITER {
        let r = norm(gx);
        if !r.is_finite() {
            break;
        }
        if r < tol {
            return Ok(x);
        }
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let h = 1e-7 * x[k].abs().max(1.0);
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let gp = g(xp);
            let gm = g(xm);
            for i in 0..2 {
                jac[i][k] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::numeric("newton2d: singular Jacobian", r, r));
        }
        let dx = [
            -(jac[1][1] * gx[0] - jac[0][1] * gx[1]) / det,
            -(-jac[1][0] * gx[0] + jac[0][0] * gx[1]) / det,
        ];
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = [x[0] + step * dx[0], x[1] + step * dx[1]];
            let gt = g(trial);
            if norm(gt) < r {
                x = trial;
                gx = gt;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::numeric("newton2d: line search stalled", r, r));
        }
    }
    let r = norm(gx);
    if r < tol {
        Ok(x)
    } else {
        Err(Error::numeric("newton2d: no convergence", r, r))
    }
}

/// Minimise `f` with the Nelder–Mead simplex method until the simplex
/// diameter drops below `tol`.
pub fn neldermead<F>(mut f: F, x0: &[f64], tol: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 || !(tol > 0.0) {
        return Err(Error::Domain("neldermead: need a non-empty start and tol > 0".into()));
    }
    let max_iter = 5000 * (n + 1);
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if v[i] != 0.0 { 0.05 * v[i] } else { 2.5e-4 };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let diameter = |s: &[Vec<f64>]| {
        let mut d: f64 = 0.0;
        for v in &s[1..] {
            let dist = v.iter().zip(&s[0]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            d = d.max(dist);
        }
        d
    };

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if diameter(&simplex) < tol {
            return Ok(simplex.swap_remove(0));
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (contracted, fc) = if fr < values[n] {
                let c = along(-0.5);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = along(0.5);
                let fc = f(&c);
                (c, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    for (x, b) in simplex[i].iter_mut().zip(&best) {
                        *x = b + 0.5 * (*x - b);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let d = diameter(&simplex);
    Err(Error::numeric("neldermead: iteration limit reached", values[0], d))
}

/// Brent's method for a bracketed root of a scalar function.
pub fn brent<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::numeric(
            format!("brent: [{lo}, {hi}] does not bracket a root (f = {fa:e}, {fb:e})"),
            f64::NAN,
            f64::INFINITY,
        ));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::numeric("brent: iteration limit reached", b, (c - b).abs()))
}
