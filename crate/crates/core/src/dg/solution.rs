//! Piecewise-polynomial solutions on uniform meshes.

use serde::{Deserialize, Serialize};

use super::basis::{tensor_rule, Basis};
use super::quadrature::gauss_legendre;
use crate::error::{Error, Result};
use crate::field::CellAverageField;

/// Uniform mesh of `nx` (by `ny`) square cells. Cells are numbered row-major,
/// `iy * nx + ix`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub dim: usize,
    pub nx: usize,
    pub ny: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Mesh {
    pub fn new_1d(nx: usize, lo: f64, hi: f64) -> Result<Self> {
        let m = Self { dim: 1, nx, ny: 1, lo: [lo, 0.0], hi: [hi, 0.0] };
        m.validate()?;
        Ok(m)
    }

    /// 2D mesh; the cells must be square.
    pub fn new_2d(nx: usize, ny: usize, lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        let m = Self { dim: 2, nx, ny, lo, hi };
        m.validate()?;
        let (hx, hy) = ((hi[0] - lo[0]) / nx as f64, (hi[1] - lo[1]) / ny as f64);
        if ((hx - hy) / hx).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("cells must be square, got {hx} x {hy}")));
        }
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidArgument("mesh needs at least one cell".into()));
        }
        for d in 0..self.dim {
            if !(self.hi[d] > self.lo[d]) {
                return Err(Error::InvalidArgument(format!("empty interval [{}, {}]", self.lo[d], self.hi[d])));
            }
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn h(&self) -> f64 {
        (self.hi[0] - self.lo[0]) / self.nx as f64
    }

    pub fn cell_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn cell_coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.nx, cell / self.nx)
    }

    pub fn center(&self, cell: usize) -> [f64; 2] {
        let (ix, iy) = self.cell_coords(cell);
        let h = self.h();
        let y = if self.dim == 2 { self.lo[1] + (iy as f64 + 0.5) * h } else { 0.0 };
        [self.lo[0] + (ix as f64 + 0.5) * h, y]
    }

    /// Physical point of a reference point in `cell`.
    pub fn map(&self, cell: usize, xi: [f64; 2]) -> [f64; 2] {
        let c = self.center(cell);
        let h2 = 0.5 * self.h();
        [c[0] + h2 * xi[0], if self.dim == 2 { c[1] + h2 * xi[1] } else { 0.0 }]
    }

    pub fn domain_box(&self) -> Vec<f64> {
        (0..self.dim).flat_map(|d| [self.lo[d], self.hi[d]]).collect()
    }
}

/// Coefficients of an `n_comp`-component DG solution, stored as
/// `coeffs[(cell * n_comp + comp) * n_basis + j]`.
#[derive(Clone, Debug)]
pub struct DgSolution {
    pub mesh: Mesh,
    pub basis: Basis,
    pub n_comp: usize,
    pub coeffs: Vec<f64>,
}

impl DgSolution {
    pub fn zeros(mesh: Mesh, basis: Basis, n_comp: usize) -> Result<Self> {
        if basis.dim() != mesh.dim {
            return Err(Error::DimensionMismatch { expected: mesh.dim, found: basis.dim() });
        }
        let len = mesh.n_cells() * n_comp * basis.n_basis();
        Ok(Self { mesh, basis, n_comp, coeffs: vec![0.0; len] })
    }

    /// Projection (modal) or interpolation (nodal) of `f(x)`.
    pub fn from_function(mesh: Mesh, basis: Basis, n_comp: usize, f: impl Fn([f64; 2]) -> Vec<f64>) -> Result<Self> {
        let mut sol = Self::zeros(mesh, basis, n_comp)?;
        let block = n_comp * sol.basis.n_basis();
        for cell in 0..sol.mesh.n_cells() {
            let c = sol.basis.project_function(n_comp, |xi| f(sol.mesh.map(cell, xi)));
            sol.coeffs[cell * block..(cell + 1) * block].copy_from_slice(&c);
        }
        Ok(sol)
    }

    pub fn n_basis(&self) -> usize {
        self.basis.n_basis()
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }

    /// All coefficients of one cell, component-major.
    pub fn cell(&self, cell: usize) -> &[f64] {
        let b = self.n_comp * self.n_basis();
        &self.coeffs[cell * b..(cell + 1) * b]
    }

    pub fn cell_mut(&mut self, cell: usize) -> &mut [f64] {
        let b = self.n_comp * self.n_basis();
        &mut self.coeffs[cell * b..(cell + 1) * b]
    }

    pub fn component(&self, cell: usize, comp: usize) -> &[f64] {
        let nb = self.n_basis();
        &self.cell(cell)[comp * nb..(comp + 1) * nb]
    }

    /// Row-major `N x n_comp` cell averages.
    pub fn averages(&self) -> Vec<f64> {
        let w = self.basis.average_weights();
        let nb = self.n_basis();
        self.coeffs.chunks_exact(nb).map(|c| c.iter().zip(&w).map(|(a, b)| a * b).sum()).collect()
    }

    /// Averages as an Euler field (requires `n_comp = 2 + d`).
    pub fn average_field(&self) -> Result<CellAverageField> {
        if self.n_comp != 2 + self.mesh.dim {
            return Err(Error::DimensionMismatch { expected: 2 + self.mesh.dim, found: self.n_comp });
        }
        CellAverageField::new(self.mesh.dim, self.mesh.h(), self.mesh.domain_box(), self.averages())
    }

    /// Replaces every cell average by the matching entry of `averages` while
    /// keeping the higher moments: sets the constant mode (modal) or shifts all
    /// nodal values by the difference (nodal).
    pub fn set_averages(&mut self, averages: &[f64]) -> Result<()> {
        let n = self.n_cells() * self.n_comp;
        if averages.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: averages.len() });
        }
        let w = self.basis.average_weights();
        let modal = self.basis.is_modal();
        let nb = self.n_basis();
        for (c, &target) in self.coeffs.chunks_exact_mut(nb).zip(averages) {
            if modal {
                c[0] = target;
            } else {
                let cur: f64 = c.iter().zip(&w).map(|(a, b)| a * b).sum();
                let shift = target - cur;
                c.iter_mut().for_each(|v| *v += shift);
            }
        }
        Ok(())
    }

    /// Value of every component at reference point `xi` of `cell`.
    pub fn eval_ref(&self, cell: usize, xi: [f64; 2]) -> Vec<f64> {
        let phi = self.basis.eval(xi);
        (0..self.n_comp)
            .map(|k| self.component(cell, k).iter().zip(&phi).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `(L1, L2, Linf)` errors of component `comp` against `exact(x)`, using
    /// `(k + 3)^d` Gauss points per cell; norms include the cell measure.
    pub fn errors(&self, comp: usize, exact: impl Fn([f64; 2]) -> f64) -> (f64, f64, f64) {
        let rule = tensor_rule(&gauss_legendre(self.basis.degree() + 3), self.mesh.dim);
        let table = self.basis.table(&rule.points);
        let jac = (0.5 * self.mesh.h()).powi(self.mesh.dim as i32);
        let (mut l1, mut l2, mut linf) = (0.0, 0.0, 0.0f64);
        for cell in 0..self.n_cells() {
            let c = self.component(cell, comp);
            for (p, (xi, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                let e = (table.eval(p, c) - exact(self.mesh.map(cell, *xi))).abs();
                l1 += w * jac * e;
                l2 += w * jac * e * e;
                linf = linf.max(e);
            }
        }
        (l1, l2.sqrt(), linf)
    }
}
