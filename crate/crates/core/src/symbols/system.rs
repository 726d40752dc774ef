use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::MonomialPoly;
use super::spec::SymbolSpec;
use crate::error::{Error, Result};

/// Largest matrix handled by the minor-expansion determinant.
pub const MAX_SYSTEM_SIZE: usize = 15;

/// Square matrix symbol `A(xi)` whose entries are polynomials of degree at most
/// one in `xi` (the constant part included).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemMatrix {
    dimension: usize,
    entries: Vec<Vec<MonomialPoly>>,
}

impl SystemMatrix {
    pub fn new(dimension: usize, entries: Vec<Vec<MonomialPoly>>) -> Result<Self> {
        let m = entries.len();
        if m == 0 {
            return Err(Error::InvalidArgument("empty system matrix".into()));
        }
        for row in &entries {
            if row.len() != m {
                return Err(Error::InvalidArgument(format!(
                    "system matrix is not square: row of length {} in a {m}-row matrix",
                    row.len()
                )));
            }
            for e in row {
                if e.dimension() != dimension {
                    return Err(Error::DimensionMismatch {
                        expected: dimension,
                        got: e.dimension(),
                    });
                }
                if e.total_degree().unwrap_or(0) > 1 {
                    return Err(Error::InvalidArgument(
                        "system entries must have degree at most 1 in xi (degree overflow)".into(),
                    ));
                }
            }
        }
        if m > MAX_SYSTEM_SIZE {
            return Err(Error::InvalidArgument(format!(
                "system of size {m} exceeds the supported maximum {MAX_SYSTEM_SIZE}"
            )));
        }
        Ok(Self {
            dimension,
            entries,
        })
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entry(&self, i: usize, j: usize) -> &MonomialPoly {
        &self.entries[i][j]
    }

    /// Numeric value `A(xi)`.
    pub fn evaluate(&self, xi: &[f64]) -> nalgebra::DMatrix<Complex64> {
        let m = self.size();
        nalgebra::DMatrix::from_fn(m, m, |i, j| self.entries[i][j].eval_real(xi))
    }
}

/// Characteristic symbol `det(tau I - A(xi))` of the first-order system
/// `D_t U = A(D_x) U`, expanded exactly over the polynomial ring and split into
/// principal and lower-order parts.
pub fn system_dispersion(a: &SystemMatrix) -> Result<SymbolSpec> {
    let m = a.size();
    let vars = a.dimension + 1;
    let tau = MonomialPoly::variable(vars, 0);
    let mat: Vec<Vec<MonomialPoly>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let lifted = a.entries[i][j].with_leading_variable();
                    if i == j {
                        &tau - &lifted
                    } else {
                        -&lifted
                    }
                })
                .collect()
        })
        .collect();
    let det = determinant(&mat, vars);
    SymbolSpec::from_tau_xi_poly(&det)
}

/// Determinant by row-wise minor expansion memoised on the used-column set.
fn determinant(mat: &[Vec<MonomialPoly>], vars: usize) -> MonomialPoly {
    let m = mat.len();
    let mut layer: HashMap<u32, MonomialPoly> = HashMap::new();
    layer.insert(0, MonomialPoly::constant(vars, Complex64::new(1.0, 0.0)));
    for row in mat.iter() {
        let mut next: HashMap<u32, MonomialPoly> = HashMap::new();
        // Deterministic iteration order keeps floating sums reproducible.
        let mut keys: Vec<u32> = layer.keys().copied().collect();
        keys.sort_unstable();
        for mask in keys {
            let partial = &layer[&mask];
            if partial.is_zero() {
                continue;
            }
            for (col, entry) in row.iter().enumerate() {
                if mask & (1 << col) != 0 || entry.is_zero() {
                    continue;
                }
                let above = (mask >> (col + 1)).count_ones();
                let mut term = partial * entry;
                if above % 2 == 1 {
                    term = -&term;
                }
                let slot = next
                    .entry(mask | (1 << col))
                    .or_insert_with(|| MonomialPoly::zero(vars));
                *slot = &*slot + &term;
            }
        }
        layer = next;
    }
    layer
        .remove(&((1u32 << m) - 1))
        .unwrap_or_else(|| MonomialPoly::zero(vars))
}
