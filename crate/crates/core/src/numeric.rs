//! Scalar root finding and least-squares fits.

use crate::error::{Error, Result};

/// Bisection for an increasing sign change f(lo) < 0 < f(hi), to full double precision.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Ordinary least squares y = a + b·x; returns (slope, intercept).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return Err(Error::Domain(format!("linear fit needs >= 2 paired points, got {n}")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("linear fit with degenerate abscissa".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Exponential decay rate of |profile| to the right of `center`.
///
/// Fits ln|p_n| over offsets `start..` up to `max_offset`, stopping before the values drop
/// below `floor` times the peak, where double-precision roundoff takes over.
pub fn tail_decay_rate(profile: &[f64], center: usize, start: usize, max_offset: usize, floor: f64) -> Result<f64> {
    let peak = profile.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for d in start..=max_offset {
        let Some(v) = profile.get(center + d) else { break };
        if v.abs() <= floor * peak {
            break;
        }
        xs.push(d as f64);
        ys.push(v.abs().ln());
    }
    if xs.len() < 3 {
        return Err(Error::Domain(format!(
            "tail too short to fit: {} usable points above {floor:e} of peak",
            xs.len()
        )));
    }
    Ok(-linear_fit(&xs, &ys)?.0)
}

/// Decay rates of a two-term exponential tail a·e^{−κ₁n} + b·e^{−κ₂n} by Prony's method.
///
/// Uses signed values at offsets `start..=max_offset` right of `center`, stopping at the same
/// floor as [`tail_decay_rate`]. Rows of the linear-prediction system are scaled by the value
/// they predict so small tail points carry equal weight. Returns the rates ascending.
pub fn prony_two_rates(profile: &[f64], center: usize, start: usize, max_offset: usize, floor: f64) -> Result<[f64; 2]> {
    let peak = profile.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ys: Vec<f64> = (start..=max_offset)
        .map_while(|d| profile.get(center + d).copied())
        .take_while(|v| v.abs() > floor * peak)
        .collect();
    if ys.len() < 5 {
        return Err(Error::Domain(format!("tail too short for a two-term fit: {} points", ys.len())));
    }
    // y[n+2] = p·y[n+1] + q·y[n]
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for w in ys.windows(3) {
        let s = 1.0 / w[2].abs();
        let (u, v, t) = (w[1] * s, w[0] * s, w[2] * s);
        a11 += u * u;
        a12 += u * v;
        a22 += v * v;
        b1 += u * t;
        b2 += v * t;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() <= f64::EPSILON * a11 * a22 {
        return Err(Error::Domain("two-term fit is degenerate: tail is a single exponential".into()));
    }
    let p = (b1 * a22 - b2 * a12) / det;
    let q = (a11 * b2 - a12 * b1) / det;
    let disc = p * p + 4.0 * q;
    if disc < 0.0 {
        return Err(Error::Domain("two-term fit gave oscillating roots".into()));
    }
    let r1 = 0.5 * (p + disc.sqrt());
    let r2 = 0.5 * (p - disc.sqrt());
    if !(r1 > 0.0 && r2 > 0.0 && r1 < 1.0) {
        return Err(Error::Domain(format!("two-term fit roots {r1}, {r2} are not decaying")));
    }
    Ok([-r1.ln(), -r2.ln()])
}
