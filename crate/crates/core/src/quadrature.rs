//! Quadrature rules on the reference triangle `{(xi, eta): xi, eta >= 0, xi + eta <= 1}`.
//! Weights sum to the reference area 1/2.

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Total polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    /// Three interior points, exact for quadratics.
    pub fn degree2() -> Self {
        let (a, b) = (1.0 / 6.0, 2.0 / 3.0);
        Self { points: vec![[a, a], [b, a], [a, b]], weights: vec![1.0 / 6.0; 3], degree: 2 }
    }

    /// Six-point symmetric rule, exact for quartics.
    pub fn degree4() -> Self {
        let a = 0.445_948_490_915_964_886_32;
        let wa = 0.223_381_589_678_011_465_7 / 2.0;
        let b = 0.091_576_213_509_770_743_46;
        let wb = 0.109_951_743_655_321_867_6 / 2.0;
        Self {
            points: vec![[a, a], [1.0 - 2.0 * a, a], [a, 1.0 - 2.0 * a], [b, b], [1.0 - 2.0 * b, b], [b, 1.0 - 2.0 * b]],
            weights: vec![wa, wa, wa, wb, wb, wb],
            degree: 4,
        }
    }

    /// Collapsed (Duffy) tensor Gauss rule with `n` points per direction,
    /// exact for total degree `2n - 2`.
    pub fn collapsed_gauss(n: usize) -> Self {
        let (x, w) = gauss_legendre_unit(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let u = x[i];
                let v = x[j];
                points.push([u, v * (1.0 - u)]);
                weights.push(w[i] * w[j] * (1.0 - u));
            }
        }
        Self { points, weights, degree: 2 * n - 2 }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
