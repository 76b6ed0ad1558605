//! Gauss-Legendre quadrature.
//!
//! Serves as the independent integration route when matrix assembly is
//! checked against direct quadrature of `(q v_beta, v_gamma)`. Nothing here
//! touches the product-expansion path used by assembly itself.

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence; accurate to machine
/// precision for the moderate orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess for the i-th positive root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_with_derivative(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates `f` over the box `[0,a] x [0,b]` with an `n`-point rule per axis.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let mut total = 0.0;
    for (ti, wi) in nodes.iter().zip(&weights) {
        let x = 0.5 * a * (ti + 1.0);
        let mut row = 0.0;
        for (tj, wj) in nodes.iter().zip(&weights) {
            let y = 0.5 * b * (tj + 1.0);
            row += wj * f(x, y);
        }
        total += wi * row;
    }
    total * 0.25 * a * b
}
