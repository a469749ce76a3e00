//! Closed-form Dirichlet spectra: disk (Bessel zeros), equilateral triangle
//! and rectangle.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest supported Bessel order.
pub const MAX_ORDER: u32 = 60;
/// Largest supported Bessel argument.
pub const MAX_ARGUMENT: f64 = 500.0;

const SERIES_LIMIT: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactLevel {
    pub k: f64,
    pub quantum_numbers: (u32, u32),
    pub multiplicity: u8,
}

fn check_window(m: u32, x: f64) -> Result<()> {
    if m > MAX_ORDER || !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::OutOfValidityWindow(format!(
            "J_{m}({x}) outside order <= {MAX_ORDER}, 0 <= x <= {MAX_ARGUMENT}"
        )));
    }
    Ok(())
}

/// Bessel function of the first kind `J_m(x)`.
pub fn bessel_j(m: u32, x: f64) -> Result<f64> {
    check_window(m, x)?;
    Ok(if x <= SERIES_LIMIT { series(m, x) } else { miller(m, x) })
}

fn series(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for j in 1..=m {
        term *= half / j as f64;
    }
    let mut sum = term;
    let q = half * half;
    for k in 1..200 {
        term *= -q / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Backward recurrence normalized by `J_0 + 2 sum J_2k = 1`.
fn miller(m: u32, x: f64) -> f64 {
    let start = (x.max(m as f64) + 30.0 + 10.0 * x.sqrt()) as u32;
    let start = start + (start & 1);
    let mut jp1 = 0.0;
    let mut j = 1e-300;
    let mut norm = 0.0;
    let mut want = 0.0;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        // `j` now holds J_{k-1}.
        let idx = k - 1;
        if idx == m {
            want = j;
        }
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e200 {
            j *= 1e-200;
            jp1 *= 1e-200;
            norm *= 1e-200;
            want *= 1e-200;
        }
    }
    norm += j;
    want / norm
}

/// Derivative `J_m'(x) = (J_{m-1} - J_{m+1}) / 2`, with `J_0' = -J_1`.
fn bessel_j_prime(m: u32, x: f64) -> f64 {
    let up = if x <= SERIES_LIMIT { series(m + 1, x) } else { miller(m + 1, x) };
    if m == 0 {
        return -up;
    }
    let down = if x <= SERIES_LIMIT { series(m - 1, x) } else { miller(m - 1, x) };
    0.5 * (down - up)
}

fn j_unchecked(m: u32, x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        series(m, x)
    } else {
        miller(m, x)
    }
}

/// McMahon's large-zero expansion of the `s`-th zero of `J_m`.
pub fn mcmahon_zero(m: u32, s: u32) -> f64 {
    let mu = 4.0 * (m as f64).powi(2);
    let beta = (s as f64 + 0.5 * m as f64 - 0.25) * PI;
    let e = 8.0 * beta;
    beta - (mu - 1.0) / e
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e.powi(3))
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * e.powi(5))
}

/// Refines a bracketed sign change of `J_m` on `[a, b]` to ~1e-14.
fn polish(m: u32, mut a: f64, mut b: f64) -> f64 {
    let mut fa = j_unchecked(m, a);
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = j_unchecked(m, x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == (fa < 0.0) {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        // Newton step, kept only when it stays inside the bracket.
        let d = bessel_j_prime(m, x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        if (next - x).abs() < 1e-15 * x || b - a < 1e-15 * x {
            return next;
        }
        x = next;
    }
    x
}

/// The `s`-th positive zero `j_{m,s}` of `J_m`.
pub fn bessel_zero(m: u32, s: u32) -> Result<f64> {
    if s == 0 {
        return Err(Error::InvalidParams("zero index starts at 1".into()));
    }
    check_window(m, 0.0)?;
    // Zeros are separated by more than 2.5 and the first lies above m.
    let step = 0.25;
    let mut x = (m as f64).max(step);
    let mut fx = j_unchecked(m, x);
    let mut found = 0;
    while x + step <= MAX_ARGUMENT {
        let y = x + step;
        let fy = j_unchecked(m, y);
        if (fx < 0.0) != (fy < 0.0) {
            found += 1;
            if found == s {
                return Ok(polish(m, x, y));
            }
        }
        x = y;
        fx = fy;
    }
    Err(Error::OutOfValidityWindow(format!("zero j_({m},{s}) exceeds {MAX_ARGUMENT}")))
}

/// All zeros of `J_m` up to `bound` in one scan.
fn zeros_below(m: u32, bound: f64) -> Vec<f64> {
    let step = 0.25;
    let mut out = Vec::new();
    let mut x = (m as f64).max(step);
    let mut fx = j_unchecked(m, x);
    while x < bound.min(MAX_ARGUMENT) {
        let y = x + step;
        let fy = j_unchecked(m, y);
        if (fx < 0.0) != (fy < 0.0) {
            let z = polish(m, x, y);
            if z <= bound {
                out.push(z);
            }
        }
        x = y;
        fx = fy;
    }
    out
}

fn finish(mut levels: Vec<ExactLevel>, count: usize) -> Vec<ExactLevel> {
    levels.sort_by(|a, b| a.k.total_cmp(&b.k).then(a.quantum_numbers.cmp(&b.quantum_numbers)));
    levels.truncate(count);
    levels
}

/// Disk of radius `radius`: `k = j_{m,s} / R`, ascending. Levels with `m >= 1`
/// are doubly degenerate and appear twice.
pub fn circle_spectrum(radius: f64, count: usize) -> Result<Vec<ExactLevel>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParams(format!("radius must be positive, got {radius}")));
    }
    // Weyl estimate of the count-th zero, then widen until enough are found.
    let mut bound = 2.0 * (count as f64).sqrt() + 4.0;
    loop {
        let mut levels = Vec::new();
        for m in 0..=MAX_ORDER {
            if m as f64 > bound {
                break;
            }
            for (s, z) in zeros_below(m, bound).into_iter().enumerate() {
                let mult = if m == 0 { 1 } else { 2 };
                let lvl = ExactLevel { k: z / radius, quantum_numbers: (m, s as u32 + 1), multiplicity: mult };
                levels.extend(std::iter::repeat_n(lvl, mult as usize));
            }
        }
        if levels.len() >= count {
            return Ok(finish(levels, count));
        }
        if bound >= MAX_ORDER as f64 {
            return Err(Error::OutOfValidityWindow(format!("{count} disk levels exceed order {MAX_ORDER}")));
        }
        bound = (bound * 1.2).min(MAX_ORDER as f64);
    }
}

/// Equilateral triangle of side `side`: `k = 4 pi / (3 a) sqrt(p^2 + p q + q^2)`,
/// `1 <= p <= q`; levels with `p != q` appear twice.
pub fn triangle_spectrum(side: f64, count: usize) -> Result<Vec<ExactLevel>> {
    if !(side > 0.0) {
        return Err(Error::InvalidParams(format!("side must be positive, got {side}")));
    }
    let scale = 4.0 * PI / (3.0 * side);
    let mut bound = 2.0;
    loop {
        let mut levels = Vec::new();
        for p in 1..=bound as u32 {
            for q in p..=bound as u32 {
                let r2 = (p * p + p * q + q * q) as f64;
                if r2 > bound * bound {
                    break;
                }
                let mult = if p == q { 1 } else { 2 };
                let lvl = ExactLevel { k: scale * r2.sqrt(), quantum_numbers: (p, q), multiplicity: mult };
                levels.extend(std::iter::repeat_n(lvl, mult as usize));
            }
        }
        if levels.len() >= count {
            return Ok(finish(levels, count));
        }
        bound *= 1.2;
    }
}

/// Rectangle `[0, lx] x [0, ly]`: `k = pi sqrt((p/lx)^2 + (q/ly)^2)`, `p, q >= 1`.
/// For a square, `(p, q)` and `(q, p)` are listed separately with multiplicity 2.
pub fn rectangle_spectrum(lx: f64, ly: f64, count: usize) -> Result<Vec<ExactLevel>> {
    if !(lx > 0.0 && ly > 0.0) {
        return Err(Error::InvalidParams(format!("side lengths must be positive, got {lx} x {ly}")));
    }
    let square = lx == ly;
    let mut bound = 4.0 * PI / lx.min(ly);
    loop {
        let mut levels = Vec::new();
        let pmax = (bound * lx / PI) as u32;
        let qmax = (bound * ly / PI) as u32;
        for p in 1..=pmax {
            for q in 1..=qmax {
                let k = PI * ((p as f64 / lx).powi(2) + (q as f64 / ly).powi(2)).sqrt();
                if k <= bound {
                    let mult = if square && p != q { 2 } else { 1 };
                    levels.push(ExactLevel { k, quantum_numbers: (p, q), multiplicity: mult });
                }
            }
        }
        if levels.len() >= count {
            return Ok(finish(levels, count));
        }
        bound *= 1.2;
    }
}
