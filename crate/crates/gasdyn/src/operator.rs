//! DG spatial operator on uniform Cartesian meshes.

use idplim_core::dg::{Basis, DgSolution, EvalTable, Mesh};
use rayon::prelude::*;

use crate::boundary::{Boundaries, Boundary};
use crate::error::{Result, SimError};
use crate::physics::{llf_flux, Physics};

/// Source term `S(x, t)` added to the right-hand side, one value per component.
pub type SourceFn = Box<dyn Fn([f64; 2], f64, &mut [f64]) + Send + Sync>;

struct FaceTables {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
    own: EvalTable,
    /// Basis values of the neighbour across this face at the same points.
    neighbour: EvalTable,
}

/// Weak-form DG residual with a local Lax-Friedrichs flux:
///
/// ```text
/// dc_i/dt = 1/(2^d m_i) (2/h) [ sum_q W_q F(U_q) . grad phi_i(q)
///                               - sum_faces sum_f w_f Fhat . n phi_i(f) ]
///           + 1/(2^d m_i) sum_q W_q S(x_q, t) phi_i(q)
/// ```
///
/// with reference-cell quadrature and normalized mass `m_i`.
pub struct DgOperator<P: Physics> {
    pub physics: P,
    pub mesh: Mesh,
    pub basis: Basis,
    pub boundaries: Boundaries,
    source: Option<SourceFn>,
    vol_points: Vec<[f64; 2]>,
    vol_weights: Vec<f64>,
    vol_phi: EvalTable,
    vol_grad: Vec<[f64; 2]>,
    faces: Vec<FaceTables>,
    inv_mass: Vec<f64>,
    speed_table: EvalTable,
}

impl<P: Physics> DgOperator<P> {
    pub fn new(physics: P, mesh: Mesh, basis: Basis, boundaries: Boundaries) -> Result<Self> {
        if basis.dim() != mesh.dim {
            return Err(SimError::Config("basis and mesh dimensions differ".into()));
        }
        if !boundaries.is_consistent(mesh.dim) {
            return Err(SimError::Config("periodic boundaries must be paired".into()));
        }
        let vol = basis.volume_rule();
        let vol_phi = basis.table(&vol.points);
        let vol_grad = basis.grad_table(&vol.points);
        let faces = (0..2 * mesh.dim)
            .map(|f| {
                let rule = basis.face_rule(f);
                let other = basis.face_rule(f ^ 1);
                FaceTables {
                    own: basis.table(&rule.points),
                    neighbour: basis.table(&other.points),
                    points: rule.points,
                    weights: rule.weights,
                }
            })
            .collect();
        let scale = (1u32 << mesh.dim) as f64;
        let inv_mass = basis.mass_diag().iter().map(|m| 1.0 / (scale * m)).collect();
        let speed_table = basis.table(&basis.check_points());
        Ok(Self {
            physics,
            mesh,
            basis,
            boundaries,
            source: None,
            vol_points: vol.points,
            vol_weights: vol.weights,
            vol_phi,
            vol_grad,
            faces,
            inv_mass,
            speed_table,
        })
    }

    pub fn with_source(mut self, source: SourceFn) -> Self {
        self.source = Some(source);
        self
    }

    pub fn n_comp(&self) -> usize {
        self.physics.n_comp()
    }

    /// Neighbour across face `f`, or `None` on a non-periodic boundary.
    fn neighbour(&self, cell: usize, f: usize) -> Option<usize> {
        let m = &self.mesh;
        let (ix, iy) = m.cell_coords(cell);
        let (n, i) = if f < 2 { (m.nx, ix) } else { (m.ny, iy) };
        let j = if f % 2 == 0 {
            if i == 0 {
                if matches!(self.boundaries.edge(f), Boundary::Periodic) { n - 1 } else { return None }
            } else {
                i - 1
            }
        } else if i + 1 == n {
            if matches!(self.boundaries.edge(f), Boundary::Periodic) { 0 } else { return None }
        } else {
            i + 1
        };
        Some(if f < 2 { m.cell_index(j, iy) } else { m.cell_index(ix, j) })
    }

    /// Writes `dc/dt` for every coefficient of `sol` into `out`.
    pub fn rhs(&self, sol: &DgSolution, t: f64, out: &mut [f64]) -> Result<()> {
        self.rhs_coeffs(&sol.coeffs, t, out)
    }

    /// [`Self::rhs`] on a bare coefficient vector laid out like
    /// [`DgSolution::coeffs`].
    pub fn rhs_coeffs(&self, coeffs: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        let nc = self.n_comp();
        let nb = self.basis.n_basis();
        let block = nc * nb;
        let h = self.mesh.h();
        let dim = self.mesh.dim;
        out.par_chunks_mut(block).enumerate().try_for_each_init(
            || Scratch::new(nc, self.vol_points.len()),
            |s, (cell, res)| -> Result<()> {
                res.fill(0.0);
                let cell_coeffs = |j: usize| &coeffs[j * block..(j + 1) * block];
                let own = cell_coeffs(cell);
                for (q, &w) in self.vol_weights.iter().enumerate() {
                    for k in 0..nc {
                        s.u[k] = self.vol_phi.eval(q, &own[k * nb..(k + 1) * nb]);
                    }
                    check(&s.u, cell, t)?;
                    for axis in 0..dim {
                        self.physics.flux(&s.u, axis, &mut s.fa);
                        for i in 0..nb {
                            let g = w * self.vol_grad[q * nb + i][axis] * 2.0 / h;
                            for k in 0..nc {
                                res[k * nb + i] += g * s.fa[k];
                            }
                        }
                    }
                    if let Some(src) = &self.source {
                        src(self.mesh.map(cell, self.vol_points[q]), t, &mut s.src);
                        for i in 0..nb {
                            let g = w * self.vol_phi.row(q)[i];
                            for k in 0..nc {
                                res[k * nb + i] += g * s.src[k];
                            }
                        }
                    }
                }
                for (f, face) in self.faces.iter().enumerate() {
                    let axis = f / 2;
                    let upper = f % 2 == 1;
                    let nbr = self.neighbour(cell, f);
                    for (p, &w) in face.weights.iter().enumerate() {
                        for k in 0..nc {
                            s.own[k] = face.own.eval(p, &own[k * nb..(k + 1) * nb]);
                        }
                        match nbr {
                            Some(j) => {
                                let cj = cell_coeffs(j);
                                for k in 0..nc {
                                    s.ext[k] = face.neighbour.eval(p, &cj[k * nb..(k + 1) * nb]);
                                }
                            }
                            None => self.ghost(cell, f, face.points[p], t, &s.own, &mut s.ext),
                        }
                        check(&s.ext, cell, t)?;
                        let (lo, hi) = if upper { (&s.own, &s.ext) } else { (&s.ext, &s.own) };
                        let lambda = llf_flux(&self.physics, lo, hi, axis, &mut s.fa, &mut s.fb, &mut s.flux);
                        if !lambda.is_finite() {
                            return Err(SimError::NonFinite { cell, time: t, state: s.own.clone() });
                        }
                        let sign = if upper { 1.0 } else { -1.0 };
                        for i in 0..nb {
                            let g = sign * w * face.own.row(p)[i] * 2.0 / h;
                            for k in 0..nc {
                                res[k * nb + i] -= g * s.flux[k];
                            }
                        }
                    }
                }
                for k in 0..nc {
                    for i in 0..nb {
                        res[k * nb + i] *= self.inv_mass[i];
                    }
                }
                Ok(())
            },
        )
    }

    /// Exterior state on a non-periodic boundary face.
    fn ghost(&self, cell: usize, f: usize, xi: [f64; 2], t: f64, own: &[f64], ext: &mut [f64]) {
        match self.boundaries.edge(f) {
            Boundary::Reflective => self.physics.reflect(own, f / 2, ext),
            Boundary::Outflow => ext.copy_from_slice(own),
            Boundary::Dirichlet(g) => ext.copy_from_slice(&g(self.mesh.map(cell, xi), t)),
            Boundary::Periodic => unreachable!("periodic faces have neighbours"),
        }
    }

    /// Net outward flux through the domain boundary, scaled so that the
    /// column sums of the cell averages evolve as `d/dt sum = -B` (plus any
    /// source). Zero on periodic meshes.
    pub fn boundary_flux(&self, coeffs: &[f64], t: f64) -> Result<Vec<f64>> {
        let nc = self.n_comp();
        let nb = self.basis.n_basis();
        let dim = self.mesh.dim;
        let scale = 2.0 / ((1u32 << dim) as f64 * self.mesh.h());
        let mut s = Scratch::new(nc, 0);
        let mut total = vec![0.0; nc];
        for cell in 0..self.mesh.n_cells() {
            let own = &coeffs[cell * nc * nb..(cell + 1) * nc * nb];
            for (f, face) in self.faces.iter().enumerate() {
                if self.neighbour(cell, f).is_some() {
                    continue;
                }
                let (axis, upper) = (f / 2, f % 2 == 1);
                for (p, &w) in face.weights.iter().enumerate() {
                    for k in 0..nc {
                        s.own[k] = face.own.eval(p, &own[k * nb..(k + 1) * nb]);
                    }
                    self.ghost(cell, f, face.points[p], t, &s.own, &mut s.ext);
                    check(&s.ext, cell, t)?;
                    let (lo, hi) = if upper { (&s.own, &s.ext) } else { (&s.ext, &s.own) };
                    llf_flux(&self.physics, lo, hi, axis, &mut s.fa, &mut s.fb, &mut s.flux);
                    let sign = if upper { scale } else { -scale };
                    for k in 0..nc {
                        total[k] += sign * w * s.flux[k];
                    }
                }
            }
        }
        Ok(total)
    }

    /// Largest `|u| + c` over the checked points of all cells and over the
    /// exterior states of boundary faces at time `t` (an inflow can be far
    /// faster than the interior gas).
    pub fn max_speed(&self, sol: &DgSolution, t: f64) -> f64 {
        let nc = self.n_comp();
        let nb = sol.n_basis();
        let mut ghost = vec![0.0; nc];
        let mut own = vec![0.0; nc];
        let mut boundary = 0.0f64;
        for cell in 0..sol.n_cells() {
            for (f, face) in self.faces.iter().enumerate() {
                if self.neighbour(cell, f).is_some() {
                    continue;
                }
                let c = sol.cell(cell);
                for p in 0..face.weights.len() {
                    for k in 0..nc {
                        own[k] = face.own.eval(p, &c[k * nb..(k + 1) * nb]);
                    }
                    self.ghost(cell, f, face.points[p], t, &own, &mut ghost);
                    boundary = boundary.max(self.physics.max_speed(&ghost));
                }
            }
        }
        let interior = (0..sol.n_cells())
            .into_par_iter()
            .map(|cell| {
                let c = sol.cell(cell);
                let mut u = vec![0.0; nc];
                let mut best = 0.0f64;
                for p in 0..self.speed_table.n_points {
                    for k in 0..nc {
                        u[k] = self.speed_table.eval(p, &c[k * nb..(k + 1) * nb]);
                    }
                    best = best.max(self.physics.max_speed(&u));
                }
                best
            })
            .reduce(|| 0.0, f64::max);
        interior.max(boundary)
    }
}

struct Scratch {
    u: Vec<f64>,
    own: Vec<f64>,
    ext: Vec<f64>,
    fa: Vec<f64>,
    fb: Vec<f64>,
    flux: Vec<f64>,
    src: Vec<f64>,
}

impl Scratch {
    fn new(nc: usize, _nq: usize) -> Self {
        let v = || vec![0.0; nc];
        Self { u: v(), own: v(), ext: v(), fa: v(), fb: v(), flux: v(), src: v() }
    }
}

fn check(u: &[f64], cell: usize, time: f64) -> Result<()> {
    if u.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SimError::NonFinite { cell, time, state: u.to_vec() })
    }
}
