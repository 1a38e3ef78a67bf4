//! One-dimensional Gauss rules on `[-1, 1]`.

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P_n' from the standard identity; at x = +-1 use the closed form.
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// A rule `sum w_i f(x_i)` with nodes sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `n`-point Gauss-Legendre rule (exact to degree `2n - 1`).
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    symmetrize(Rule { nodes, weights })
}

/// `n`-point Gauss-Lobatto rule including both end points (exact to degree `2n - 3`).
pub fn gauss_lobatto(n: usize) -> Rule {
    assert!(n >= 2);
    let m = n - 1;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mf = m as f64;
    for i in 0..n {
        let mut x = -(std::f64::consts::PI * i as f64 / mf).cos();
        if i != 0 && i != m {
            // Interior nodes are the roots of P_m'.
            for _ in 0..100 {
                let (p, dp) = legendre(m, x);
                // P_m'' from the Legendre equation.
                let d2p = (2.0 * x * dp - mf * (mf + 1.0) * p) / (1.0 - x * x);
                let dx = dp / d2p;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
        }
        let (p, _) = legendre(m, x);
        nodes[i] = x;
        weights[i] = 2.0 / (mf * (mf + 1.0) * p * p);
    }
    symmetrize(Rule { nodes, weights })
}

/// Enforces exact symmetry about zero, which the Newton iterates only have to rounding.
fn symmetrize(mut r: Rule) -> Rule {
    let n = r.nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (r.nodes[j] - r.nodes[i]);
        let w = 0.5 * (r.weights[i] + r.weights[j]);
        r.nodes[i] = -x;
        r.nodes[j] = x;
        r.weights[i] = w;
        r.weights[j] = w;
    }
    if n % 2 == 1 {
        r.nodes[n / 2] = 0.0;
    }
    r
}
