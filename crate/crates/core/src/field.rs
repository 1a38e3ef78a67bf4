//! Fields of cell averages on a uniform mesh and their conservation targets.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::pairwise_sum_strided;
use crate::state::{AdmissibleSet, ConservedState};

/// `N x (2 + d)` cell averages stored row-major, columns `[rho, m_1, .., m_d, E]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellAverageField {
    dim: usize,
    h: f64,
    domain_box: Vec<f64>,
    data: Vec<f64>,
}

/// Metadata written next to a field's CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMetadata {
    pub n_cells: usize,
    pub dim: usize,
    pub h: f64,
    pub domain_box: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl CellAverageField {
    /// Wraps row-major data. `domain_box` holds `[lo_1, hi_1, .., lo_d, hi_d]`.
    pub fn new(dim: usize, h: f64, domain_box: Vec<f64>, data: Vec<f64>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidArgument(format!("mesh spacing must be positive, got {h}")));
        }
        if domain_box.len() != 2 * dim {
            return Err(Error::DimensionMismatch { expected: 2 * dim, found: domain_box.len() });
        }
        let nc = 2 + dim;
        if data.is_empty() || data.len() % nc != 0 {
            return Err(Error::InvalidArgument(format!(
                "data length {} is not a positive multiple of {nc}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("cell {} component {}", bad / nc, bad % nc)));
        }
        Ok(Self { dim, h, domain_box, data })
    }

    /// Field on `[0, N h]^d`-style boxes built from states.
    pub fn from_states(states: &[ConservedState], h: f64, domain_box: Vec<f64>) -> Result<Self> {
        let dim = states.first().map(|s| s.dim()).ok_or_else(|| {
            Error::InvalidArgument("a field needs at least one cell".into())
        })?;
        let mut data = Vec::with_capacity(states.len() * (2 + dim));
        for s in states {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: s.dim() });
            }
            data.extend(s.components());
        }
        Self::new(dim, h, domain_box, data)
    }

    pub fn n_cells(&self) -> usize {
        self.data.len() / self.n_components()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_components(&self) -> usize {
        2 + self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn domain_box(&self) -> &[f64] {
        &self.domain_box
    }

    /// Measure of one cell, `h^d`.
    pub fn cell_measure(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Same mesh metadata, new data.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(self.dim, self.h, self.domain_box.clone(), data)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let nc = self.n_components();
        &self.data[i * nc..(i + 1) * nc]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let nc = self.n_components();
        &mut self.data[i * nc..(i + 1) * nc]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.n_components())
    }

    pub fn state(&self, i: usize) -> ConservedState {
        ConservedState::from_components_unchecked(self.row(i)).expect("row width matches dimension")
    }

    pub fn set_state(&mut self, i: usize, s: &ConservedState) {
        debug_assert_eq!(s.dim(), self.dim);
        s.write_components(self.row_mut(i));
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        let nc = self.n_components();
        for (row, v) in self.data.chunks_exact_mut(nc).zip(values) {
            row[j] = *v;
        }
    }

    /// Column sums, computed with pairwise summation.
    pub fn column_sums(&self) -> Vec<f64> {
        let nc = self.n_components();
        (0..nc).map(|j| pairwise_sum_strided(&self.data, j, nc)).collect()
    }

    /// Rows at `indices`, in order, as a new field with the same mesh metadata.
    pub fn subfield(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.n_components());
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        self.with_data(data)
    }

    /// Writes the rows of `sub` back to `indices`.
    pub fn scatter_rows(&mut self, indices: &[usize], sub: &Self) {
        debug_assert_eq!(indices.len(), sub.n_cells());
        for (k, &i) in indices.iter().enumerate() {
            self.row_mut(i).copy_from_slice(sub.row(k));
        }
    }

    pub fn metadata(&self, epsilon: Option<f64>) -> FieldMetadata {
        FieldMetadata {
            n_cells: self.n_cells(),
            dim: self.dim,
            h: self.h,
            domain_box: self.domain_box.clone(),
            epsilon,
        }
    }

    /// CSV header for this field's dimension.
    pub fn csv_header(dim: usize) -> Vec<&'static str> {
        if dim == 1 {
            vec!["rho", "m1", "E"]
        } else {
            vec!["rho", "m1", "m2", "E"]
        }
    }

    /// Writes the cell averages as CSV, one row per cell.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(Self::csv_header(self.dim))?;
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads cell averages from CSV. The header decides the dimension.
    pub fn read_csv<R: Read>(reader: R, meta: &FieldMetadata) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
        let dim = match header.len() {
            3 => 1,
            4 => 2,
            n => return Err(Error::Parse(format!("expected 3 or 4 CSV columns, found {n}"))),
        };
        let expected = Self::csv_header(dim);
        if header.iter().map(String::as_str).ne(expected.iter().copied()) {
            return Err(Error::Parse(format!("unexpected CSV header {header:?}, want {expected:?}")));
        }
        if dim != meta.dim {
            return Err(Error::DimensionMismatch { expected: meta.dim, found: dim });
        }
        let mut data = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            for field in rec.iter() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad number {field:?}: {e}")))?;
                data.push(v);
            }
        }
        let field = Self::new(dim, meta.h, meta.domain_box.clone(), data)?;
        if field.n_cells() != meta.n_cells {
            return Err(Error::Parse(format!(
                "metadata says {} cells, CSV has {}",
                meta.n_cells,
                field.n_cells()
            )));
        }
        Ok(field)
    }

    /// Writes `path` (CSV) and `path.json` (metadata sidecar).
    pub fn save(&self, path: &Path, epsilon: Option<f64>) -> Result<()> {
        self.write_csv(BufWriter::new(File::create(path)?))?;
        let meta = self.metadata(epsilon);
        serde_json::to_writer_pretty(BufWriter::new(File::create(sidecar_path(path))?), &meta)?;
        Ok(())
    }

    /// Loads a field saved by [`CellAverageField::save`].
    pub fn load(path: &Path) -> Result<(Self, FieldMetadata)> {
        let meta: FieldMetadata = serde_json::from_reader(BufReader::new(File::open(sidecar_path(path))?))?;
        let field = Self::read_csv(BufReader::new(File::open(path)?), &meta)?;
        Ok((field, meta))
    }

    /// Indices of rows outside `set`.
    pub fn violating_rows(&self, set: &AdmissibleSet) -> Vec<usize> {
        self.rows()
            .enumerate()
            .filter(|(_, r)| !set.contains_row(r))
            .map(|(i, _)| i)
            .collect()
    }
}

/// `field.csv` -> `field.csv.json`.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Column totals `b` that the limited field must reproduce.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationTarget {
    totals: Vec<f64>,
}

impl ConservationTarget {
    pub fn new(totals: Vec<f64>) -> Self {
        Self { totals }
    }

    /// Column sums of the unlimited field.
    pub fn from_field(field: &CellAverageField) -> Self {
        Self { totals: field.column_sums() }
    }

    pub fn totals(&self) -> &[f64] {
        &self.totals
    }

    pub fn len(&self) -> usize {
        self.totals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.totals.is_empty()
    }

    /// Per-column `|sum(field) - b|`.
    pub fn residuals(&self, field: &CellAverageField) -> Vec<f64> {
        field.column_sums().iter().zip(&self.totals).map(|(s, b)| (s - b).abs()).collect()
    }
}
