//! Coupled-cavity-array geometry and the tight-binding Hamiltonian.
//!
//! Cavities sit on an `rows × cols` grid. Nearest neighbours couple through
//! one of three classes: the strong 60° diagonal (`t`), vertical stacking
//! (`j1`) and horizontal neighbours (`j2`). Everything further apart is
//! treated as uncoupled.
//!
//! All frequencies are ordinary frequencies in THz (the `g/2π` values), so
//! eigenvalue differences compare directly with measured mode separations.

use crate::error::{CcaError, Result};

/// One cavity of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CavitySite {
    pub row: usize,
    pub col: usize,
    pub flat_index: usize,
}

impl CavitySite {
    pub fn new(row: usize, col: usize, cols: usize) -> Self {
        CavitySite {
            row,
            col,
            flat_index: row * cols + col,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CouplingClass {
    /// Cavities offset by one row and one column (strongest coupling, `t`).
    Diagonal60,
    /// Same column, adjacent rows (`j1`).
    Vertical,
    /// Same row, adjacent columns (`j2`).
    Horizontal,
    None,
}

/// Classifies the coupling between two distinct sites.
///
/// Only the `(r, c)–(r+1, c+1)` diagonal counts as [`CouplingClass::Diagonal60`]
/// unless `both_diagonals` is set, in which case `(r, c)–(r+1, c−1)` does too.
pub fn classify_pair(a: CavitySite, b: CavitySite, both_diagonals: bool) -> Result<CouplingClass> {
    if a.row == b.row && a.col == b.col {
        return Err(CcaError::invalid("site", "cannot classify a site paired with itself"));
    }
    let (upper, lower) = if a.row <= b.row { (a, b) } else { (b, a) };
    let drow = lower.row - upper.row;
    let dcol = lower.col as i64 - upper.col as i64;
    let class = match (drow, dcol) {
        (0, 1) | (0, -1) => CouplingClass::Horizontal,
        (1, 0) => CouplingClass::Vertical,
        (1, 1) => CouplingClass::Diagonal60,
        (1, -1) if both_diagonals => CouplingClass::Diagonal60,
        _ => CouplingClass::None,
    };
    Ok(class)
}

/// The three coupling strengths, in THz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSet {
    pub t: f64,
    pub j1: f64,
    pub j2: f64,
}

impl CouplingSet {
    pub fn new(t: f64, j1: f64, j2: f64) -> Result<Self> {
        for (field, v) in [("t", t), ("j1", j1), ("j2", j2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(CcaError::invalid(field, format!("coupling must be finite and >= 0, got {v}")));
            }
        }
        Ok(CouplingSet { t, j1, j2 })
    }

    /// Values used for the simulations of the fabricated arrays: `t = 1.2`,
    /// `j1 = 0.8`, `j2 = 0` THz.
    pub fn fdtd_default() -> Self {
        CouplingSet {
            t: 1.2,
            j1: 0.8,
            j2: 0.0,
        }
    }

    pub fn zero() -> Self {
        CouplingSet {
            t: 0.0,
            j1: 0.0,
            j2: 0.0,
        }
    }

    pub fn strength(&self, class: CouplingClass) -> f64 {
        match class {
            CouplingClass::Diagonal60 => self.t,
            CouplingClass::Vertical => self.j1,
            CouplingClass::Horizontal => self.j2,
            CouplingClass::None => 0.0,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CouplingSet {
            t: self.t * factor,
            j1: self.j1 * factor,
            j2: self.j2 * factor,
        }
    }
}

/// A coupled pair of sites, stored with `a < b` (flat indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub class: CouplingClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingGraph {
    rows: usize,
    cols: usize,
    both_diagonals: bool,
    edges: Vec<Edge>,
}

impl CouplingGraph {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn both_diagonals(&self) -> bool {
        self.both_diagonals
    }

    pub fn num_sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn site(&self, row: usize, col: usize) -> CavitySite {
        CavitySite::new(row, col, self.cols)
    }

    pub fn sites(&self) -> impl Iterator<Item = CavitySite> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| self.site(r, c)))
    }

    pub fn count_class(&self, class: CouplingClass) -> usize {
        self.edges.iter().filter(|e| e.class == class).count()
    }
}

/// Builds the nearest-neighbour coupling graph of an `rows × cols` array.
pub fn build_grid_geometry(rows: usize, cols: usize, both_diagonals: bool) -> Result<CouplingGraph> {
    if rows == 0 {
        return Err(CcaError::invalid("rows", "must be at least 1"));
    }
    if cols == 0 {
        return Err(CcaError::invalid("cols", "must be at least 1"));
    }
    let mut edges = Vec::new();
    let mut push = |a: CavitySite, b: CavitySite, class| {
        let (a, b) = (a.flat_index.min(b.flat_index), a.flat_index.max(b.flat_index));
        edges.push(Edge { a, b, class });
    };
    for r in 0..rows {
        for c in 0..cols {
            let here = CavitySite::new(r, c, cols);
            if c + 1 < cols {
                push(here, CavitySite::new(r, c + 1, cols), CouplingClass::Horizontal);
            }
            if r + 1 < rows {
                push(here, CavitySite::new(r + 1, c, cols), CouplingClass::Vertical);
                if c + 1 < cols {
                    push(here, CavitySite::new(r + 1, c + 1, cols), CouplingClass::Diagonal60);
                }
                if both_diagonals && c >= 1 {
                    push(here, CavitySite::new(r + 1, c - 1, cols), CouplingClass::Diagonal60);
                }
            }
        }
    }
    edges.sort_by_key(|e| (e.a, e.b));
    Ok(CouplingGraph {
        rows,
        cols,
        both_diagonals,
        edges,
    })
}

/// Dense real symmetric matrix, row-major. Symmetry is maintained by
/// construction: every off-diagonal write goes to both triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * m.n + i] = d;
        }
        m
    }

    /// Builds a matrix from rows, rejecting input that is not square or not
    /// exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(CcaError::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if rows[j][i] != v {
                    return Err(CcaError::invalid("matrix", format!("entry ({i},{j}) differs from ({j},{i})")));
                }
                m.entries[i * n + j] = v;
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn set_diagonal(&mut self, i: usize, value: f64) {
        self.entries[i * self.n + i] = value;
    }

    pub fn set_symmetric(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.n + j] = value;
        self.entries[j * self.n + i] = value;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    /// Returns `P M Pᵀ` for the relabelling `new index = perm[old index]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(CcaError::DimensionMismatch {
                expected: self.n,
                actual: perm.len(),
            });
        }
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.entries[perm[i] * self.n + perm[j]] = self.get(i, j);
            }
        }
        Ok(out)
    }
}

/// Single-excitation Hamiltonian: detunings on the diagonal, class couplings
/// on the linked off-diagonal pairs, zero elsewhere.
pub fn build_hamiltonian(graph: &CouplingGraph, couplings: &CouplingSet, detunings: &[f64]) -> Result<SymmetricMatrix> {
    let n = graph.num_sites();
    if detunings.len() != n {
        return Err(CcaError::DimensionMismatch {
            expected: n,
            actual: detunings.len(),
        });
    }
    let mut h = SymmetricMatrix::from_diagonal(detunings);
    for e in graph.edges() {
        h.set_symmetric(e.a, e.b, couplings.strength(e.class));
    }
    Ok(h)
}
