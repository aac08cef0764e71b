//! One-dimensional quadrature: Gauss-Legendre rules, composite integration,
//! and power substitutions for integrable endpoint singularities.

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre recurrence; accurate to a
    /// few ulps for the orders used here (n <= 64).
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }
}

/// Composite Gauss-Legendre over a list of cell edges.
pub fn integrate_cells(gl: &GaussLegendre, edges: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut s = 0.0;
    for w in edges.windows(2) {
        s += gl.integrate(w[0], w[1], &mut f);
    }
    s
}

/// Uniform cell edges on `[a, b]`.
pub fn uniform_edges(a: f64, b: f64, cells: usize) -> Vec<f64> {
    (0..=cells)
        .map(|i| a + (b - a) * i as f64 / cells as f64)
        .collect()
}

/// `int_0^c f(s) ds` where `f(s) ~ s^{p}` with `p > -1` near 0: substitute
/// `s = u^q`, which turns the endpoint behavior into `u^{q(p+1)-1}`. With
/// `q = 1/(p+1)` the transformed integrand is bounded at 0.
pub fn integrate_power_substituted(
    gl: &GaussLegendre,
    c: f64,
    q: f64,
    cells: usize,
    mut f: impl FnMut(f64) -> f64,
) -> f64 {
    debug_assert!(c >= 0.0 && q >= 1.0);
    if c == 0.0 {
        return 0.0;
    }
    let top = c.powf(1.0 / q);
    let edges = uniform_edges(0.0, top, cells);
    integrate_cells(gl, &edges, |u| {
        let s = u.powf(q);
        f(s) * q * u.powf(q - 1.0)
    })
}
