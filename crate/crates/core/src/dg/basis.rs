//! Polynomial bases on the reference cell `[-1, 1]^d`.
//!
//! Inner products are normalized by the cell measure, so the modal bases are
//! orthonormal in the mean `2^{-d} \int`, and the first modal coefficient is
//! the cell average.

use serde::{Deserialize, Serialize};

use super::quadrature::{gauss_legendre, gauss_lobatto, legendre, Rule};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    /// Orthonormal Legendre polynomials of total degree at most `k`.
    ModalP(usize),
    /// Tensor Lagrange polynomials on `k + 1` Gauss-Lobatto points per direction.
    NodalGaussLobatto(usize),
}

/// Reference-cell faces in the order `x-`, `x+`, `y-`, `y+`.
pub const FACE_NORMALS: [[f64; 2]; 4] = [[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]];

/// Point values of every basis function at a list of reference points,
/// stored point-major.
#[derive(Clone, Debug)]
pub struct EvalTable {
    pub n_points: usize,
    pub n_basis: usize,
    pub values: Vec<f64>,
}

impl EvalTable {
    #[inline]
    pub fn row(&self, p: usize) -> &[f64] {
        &self.values[p * self.n_basis..(p + 1) * self.n_basis]
    }

    /// `sum_j coeffs[j] phi_j(x_p)`.
    #[inline]
    pub fn eval(&self, p: usize, coeffs: &[f64]) -> f64 {
        self.row(p).iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }
}

/// A quadrature rule on the reference cell or one of its faces; points are
/// full reference coordinates (`dim` entries each).
#[derive(Clone, Debug)]
pub struct CellRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Basis {
    kind: BasisKind,
    dim: usize,
    /// Modal: degree pairs; nodal: node index pairs.
    index: Vec<(usize, usize)>,
    /// Gauss-Lobatto nodes for nodal bases.
    gll: Option<Rule>,
}

impl Basis {
    pub fn new(kind: BasisKind, dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument(format!("dimension must be 1 or 2, got {dim}")));
        }
        let (index, gll) = match kind {
            BasisKind::ModalP(k) => {
                let mut idx = Vec::new();
                for total in 0..=k {
                    if dim == 1 {
                        idx.push((total, 0));
                    } else {
                        for j in 0..=total {
                            idx.push((total - j, j));
                        }
                    }
                }
                (idx, None)
            }
            BasisKind::NodalGaussLobatto(k) => {
                if k == 0 {
                    return Err(Error::InvalidArgument("nodal basis needs degree >= 1".into()));
                }
                let n = k + 1;
                let idx = if dim == 1 {
                    (0..n).map(|a| (a, 0)).collect()
                } else {
                    (0..n * n).map(|p| (p % n, p / n)).collect()
                };
                (idx, Some(gauss_lobatto(n)))
            }
        };
        Ok(Self { kind, dim, index, gll })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        match self.kind {
            BasisKind::ModalP(k) | BasisKind::NodalGaussLobatto(k) => k,
        }
    }

    pub fn n_basis(&self) -> usize {
        self.index.len()
    }

    pub fn is_modal(&self) -> bool {
        matches!(self.kind, BasisKind::ModalP(_))
    }

    fn lagrange(&self, a: usize, x: f64) -> (f64, f64) {
        let nodes = &self.gll.as_ref().expect("nodal basis").nodes;
        let mut val = 1.0;
        let mut der = 0.0;
        for (m, &xm) in nodes.iter().enumerate() {
            if m == a {
                continue;
            }
            let d = nodes[a] - xm;
            der = der * (x - xm) / d + val / d;
            val *= (x - xm) / d;
        }
        (val, der)
    }

    fn factor(&self, i: usize, x: f64) -> (f64, f64) {
        match self.kind {
            BasisKind::ModalP(_) => {
                let s = (2.0 * i as f64 + 1.0).sqrt();
                let (p, dp) = legendre(i, x);
                (s * p, s * dp)
            }
            BasisKind::NodalGaussLobatto(_) => self.lagrange(i, x),
        }
    }

    /// Values of all basis functions at a reference point.
    pub fn eval(&self, x: [f64; 2]) -> Vec<f64> {
        self.index
            .iter()
            .map(|&(i, j)| {
                let a = self.factor(i, x[0]).0;
                if self.dim == 1 {
                    a
                } else {
                    a * self.factor(j, x[1]).0
                }
            })
            .collect()
    }

    /// Reference gradients of all basis functions at a point.
    pub fn eval_grad(&self, x: [f64; 2]) -> Vec<[f64; 2]> {
        self.index
            .iter()
            .map(|&(i, j)| {
                let (a, da) = self.factor(i, x[0]);
                if self.dim == 1 {
                    [da, 0.0]
                } else {
                    let (b, db) = self.factor(j, x[1]);
                    [da * b, a * db]
                }
            })
            .collect()
    }

    pub fn table(&self, points: &[[f64; 2]]) -> EvalTable {
        let n_basis = self.n_basis();
        let mut values = Vec::with_capacity(points.len() * n_basis);
        for p in points {
            values.extend(self.eval(*p));
        }
        EvalTable { n_points: points.len(), n_basis, values }
    }

    /// Gradient table, stored point-major with `dim` entries per basis function.
    pub fn grad_table(&self, points: &[[f64; 2]]) -> Vec<[f64; 2]> {
        points.iter().flat_map(|p| self.eval_grad(*p)).collect()
    }

    /// Diagonal of the normalized mass matrix `2^{-d} (phi_i, phi_j)`: ones for
    /// modal bases, scaled Gauss-Lobatto weights (lumped) for nodal ones.
    pub fn mass_diag(&self) -> Vec<f64> {
        match &self.gll {
            None => vec![1.0; self.n_basis()],
            Some(r) => self
                .index
                .iter()
                .map(|&(a, b)| {
                    if self.dim == 1 {
                        r.weights[a] / 2.0
                    } else {
                        r.weights[a] * r.weights[b] / 4.0
                    }
                })
                .collect(),
        }
    }

    /// Weights `a_j` with cell average `sum_j a_j c_j`.
    pub fn average_weights(&self) -> Vec<f64> {
        match &self.gll {
            None => {
                let mut w = vec![0.0; self.n_basis()];
                w[0] = 1.0;
                w
            }
            Some(_) => self.mass_diag(),
        }
    }

    /// Coefficients of the constant function 1.
    pub fn constant_coeffs(&self) -> Vec<f64> {
        match &self.gll {
            None => {
                let mut c = vec![0.0; self.n_basis()];
                c[0] = 1.0;
                c
            }
            Some(_) => vec![1.0; self.n_basis()],
        }
    }

    fn line_rule(&self) -> Rule {
        match &self.gll {
            None => gauss_legendre(self.degree() + 1),
            Some(r) => r.clone(),
        }
    }

    /// Volume rule used by the scheme: `(k+1)^d` Gauss points for modal bases,
    /// the Gauss-Lobatto nodes for nodal ones. Weights sum to `2^d`.
    pub fn volume_rule(&self) -> CellRule {
        tensor_rule(&self.line_rule(), self.dim)
    }

    /// Rule on face `f` (see [`FACE_NORMALS`]). Weights sum to `2^{d-1}`.
    pub fn face_rule(&self, f: usize) -> CellRule {
        let fixed = if f % 2 == 0 { -1.0 } else { 1.0 };
        if self.dim == 1 {
            return CellRule { points: vec![[fixed, 0.0]], weights: vec![1.0] };
        }
        let r = self.line_rule();
        let points = r
            .nodes
            .iter()
            .map(|&s| if f < 2 { [fixed, s] } else { [s, fixed] })
            .collect();
        CellRule { points, weights: r.weights }
    }

    /// Points where admissibility of point values is enforced: the volume
    /// points plus all face points for modal bases, the nodes for nodal ones.
    pub fn check_points(&self) -> Vec<[f64; 2]> {
        let mut pts = self.volume_rule().points;
        if self.is_modal() {
            for f in 0..2 * self.dim {
                pts.extend(self.face_rule(f).points);
            }
        }
        pts
    }

    /// Coefficients of the projection (modal) or interpolant (nodal) of `f`
    /// given on reference coordinates, one value per component.
    pub fn project_function(&self, n_comp: usize, f: impl Fn([f64; 2]) -> Vec<f64>) -> Vec<f64> {
        let nb = self.n_basis();
        let mut out = vec![0.0; n_comp * nb];
        match &self.gll {
            Some(r) => {
                for (j, &(a, b)) in self.index.iter().enumerate() {
                    let x = [r.nodes[a], if self.dim == 2 { r.nodes[b] } else { 0.0 }];
                    for (c, v) in f(x).into_iter().enumerate() {
                        out[c * nb + j] = v;
                    }
                }
            }
            None => {
                let rule = tensor_rule(&gauss_legendre(self.degree() + 4), self.dim);
                let scale = 1.0 / (1u32 << self.dim) as f64;
                for (p, w) in rule.points.iter().zip(&rule.weights) {
                    let vals = f(*p);
                    let phi = self.eval(*p);
                    for (c, v) in vals.iter().enumerate() {
                        for j in 0..nb {
                            out[c * nb + j] += scale * w * v * phi[j];
                        }
                    }
                }
            }
        }
        out
    }
}

/// Tensor product of a line rule with itself in `dim` directions, `x` fastest.
pub fn tensor_rule(r: &Rule, dim: usize) -> CellRule {
    if dim == 1 {
        return CellRule { points: r.nodes.iter().map(|&x| [x, 0.0]).collect(), weights: r.weights.clone() };
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (y, wy) in r.nodes.iter().zip(&r.weights) {
        for (x, wx) in r.nodes.iter().zip(&r.weights) {
            points.push([*x, *y]);
            weights.push(wx * wy);
        }
    }
    CellRule { points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram(b: &Basis) -> Vec<f64> {
        let rule = tensor_rule(&gauss_legendre(b.degree() + 2), b.dim());
        let n = b.n_basis();
        let mut g = vec![0.0; n * n];
        let scale = 1.0 / (1u32 << b.dim()) as f64;
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let phi = b.eval(*p);
            for i in 0..n {
                for j in 0..n {
                    g[i * n + j] += scale * w * phi[i] * phi[j];
                }
            }
        }
        g
    }

    #[test]
    fn modal_bases_are_orthonormal() {
        for dim in [1, 2] {
            for k in 0..=3 {
                let b = Basis::new(BasisKind::ModalP(k), dim).unwrap();
                let n = b.n_basis();
                assert_eq!(n, if dim == 1 { k + 1 } else { (k + 1) * (k + 2) / 2 });
                let g = gram(&b);
                for i in 0..n {
                    for j in 0..n {
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((g[i * n + j] - want).abs() < 1e-12, "dim {dim} k {k} ({i},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn nodal_basis_is_cardinal() {
        let b = Basis::new(BasisKind::NodalGaussLobatto(3), 2).unwrap();
        let pts = b.volume_rule().points;
        for (p, x) in pts.iter().enumerate() {
            let v = b.eval(*x);
            for (j, val) in v.iter().enumerate() {
                assert!((val - if j == p { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        let total: f64 = b.average_weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_finite_differences() {
        for kind in [BasisKind::ModalP(3), BasisKind::NodalGaussLobatto(3)] {
            let b = Basis::new(kind, 2).unwrap();
            let x = [0.3, -0.45];
            let g = b.eval_grad(x);
            let d = 1e-6;
            let px = b.eval([x[0] + d, x[1]]);
            let mx = b.eval([x[0] - d, x[1]]);
            let py = b.eval([x[0], x[1] + d]);
            let my = b.eval([x[0], x[1] - d]);
            for j in 0..b.n_basis() {
                assert!((g[j][0] - (px[j] - mx[j]) / (2.0 * d)).abs() < 1e-7);
                assert!((g[j][1] - (py[j] - my[j]) / (2.0 * d)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn projection_reproduces_polynomials() {
        let b = Basis::new(BasisKind::ModalP(2), 2).unwrap();
        let f = |x: [f64; 2]| vec![1.0 + x[0] - 2.0 * x[0] * x[1] + 0.5 * x[1] * x[1]];
        let c = b.project_function(1, f);
        assert!((c[0] - (1.0 + 0.5 / 3.0)).abs() < 1e-14);
        for p in [[0.1, 0.2], [-0.7, 0.9]] {
            let v: f64 = b.eval(p).iter().zip(&c).map(|(a, b)| a * b).sum();
            assert!((v - f(p)[0]).abs() < 1e-13);
        }
    }
}
