//! Euclidean projections onto ℓp balls `{z : ‖z‖_p ≤ t}`.

/// ℓ1 ball: the sort-based simplex projection applied to magnitudes, signs restored.
pub fn project_l1_ball(y: &[f64], t: f64) -> Vec<f64> {
    let l1: f64 = y.iter().map(|v| v.abs()).sum();
    if l1 <= t {
        return y.to_vec();
    }
    let mut mags: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &m) in mags.iter().enumerate() {
        cumsum += m;
        let candidate = (cumsum - t) / (k + 1) as f64;
        if m - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    y.iter()
        .map(|&v| v.signum() * (v.abs() - theta).max(0.0))
        .collect()
}

/// ℓ2 ball: radial scaling.
pub fn project_l2_ball(y: &[f64], t: f64) -> Vec<f64> {
    let n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n <= t {
        return y.to_vec();
    }
    y.iter().map(|v| v * t / n).collect()
}

fn lp_norm(y: &[f64], p: f64) -> f64 {
    let top = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if top == 0.0 {
        return 0.0;
    }
    top * y
        .iter()
        .map(|v| (v.abs() / top).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Root of `ζ + ν p ζ^{p−1} = a` in `[0, a]` by Newton's method safeguarded with bisection.
fn shrink(a: f64, nu: f64, p: f64, start: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, a);
    let mut z = if start > 0.0 && start < a {
        start
    } else {
        0.5 * a
    };
    for _ in 0..200 {
        let zp = z.powf(p - 2.0);
        let f = z + nu * p * zp * z - a;
        if f > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let df = 1.0 + nu * p * (p - 1.0) * zp;
        let mut next = z - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - z).abs() <= 1e-16 * a || hi - lo <= 1e-16 * a {
            return next;
        }
        z = next;
    }
    z
}

/// General `p > 1`: the KKT conditions give `z_f = sign(y_f)·ζ_f` with
/// `ζ_f + ν p ζ_f^{p−1} = |y_f|`; the multiplier `ν` is found by a
/// safeguarded Newton search on `ln ν` so that `Σ ζ_f^p = t^p`.
pub fn project_lp_ball(y: &[f64], t: f64, p: f64) -> Vec<f64> {
    if p == 1.0 {
        return project_l1_ball(y, t);
    }
    if p == 2.0 {
        return project_l2_ball(y, t);
    }
    if lp_norm(y, p) <= t {
        return y.to_vec();
    }
    let a: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    let target = t.powf(p);
    let mut zeta = a.clone();
    // S(x) − t^p and its derivative in x = ln ν.
    let eval = |x: f64, zeta: &mut Vec<f64>| -> (f64, f64) {
        let nu = x.exp();
        let mut s = 0.0;
        let mut ds = 0.0;
        for (z, &af) in zeta.iter_mut().zip(&a) {
            *z = shrink(af, nu, p, *z);
            if *z > 0.0 {
                let zp1 = z.powf(p - 1.0);
                s += zp1 * *z;
                let dz_dnu = -p * zp1 / (1.0 + nu * p * (p - 1.0) * z.powf(p - 2.0));
                ds += p * zp1 * dz_dnu * nu;
            }
        }
        (s - target, ds)
    };
    let a_max = a.iter().copied().fold(0.0, f64::max);
    // ν ~ a^{2-p} balances the two terms of the shrink equation.
    let mut x = (2.0 - p) * a_max.ln();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..200 {
        let (f, df) = eval(x, &mut zeta);
        if f.abs() <= 1e-15 * target {
            break;
        }
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = if df < 0.0 { x - f / df } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => x + 2.0,
                (false, true) => x - 2.0,
                (false, false) => unreachable!("one side is always set"),
            };
        }
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            x = next;
            break;
        }
        x = next;
    }
    eval(x, &mut zeta);
    // Absorb the last bit of root-finding error so the result is in the ball.
    let n = lp_norm(&zeta, p);
    let fix = if n > t { t / n } else { 1.0 };
    y.iter()
        .zip(&zeta)
        .map(|(v, z)| v.signum() * z * fix)
        .collect()
}
