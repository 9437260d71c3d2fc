//! Category weight matrices: construction lifecycle (raw -> normalized ->
//! signed), sparsification, and the metric strategies that produce them.

pub mod metric;

use std::io::Write;

use ndarray::{Array2, ArrayView2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Lifecycle state of a weight matrix.
///
/// `Raw` separation weights are nonnegative. `Signed` columns carry direction
/// but their absolute values still sum to 1. `Centers` is the terminal state
/// of the category-mean metric and never goes through normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightState {
    Raw,
    Normalized,
    Signed,
    Centers,
}

/// A D x K matrix of per-dimension category weights, with the sign of each
/// dimension's encoding direction kept alongside.
#[derive(Debug, Clone)]
pub struct CategoryWeightMatrix {
    values: Array2<f64>,
    signs: Array2<i8>,
    state: WeightState,
    category_names: Vec<String>,
    clamp_count: usize,
}

impl CategoryWeightMatrix {
    pub(crate) fn from_parts(
        values: Array2<f64>,
        signs: Array2<i8>,
        state: WeightState,
        category_names: Vec<String>,
        clamp_count: usize,
    ) -> Self {
        debug_assert_eq!(values.dim(), signs.dim());
        debug_assert_eq!(values.ncols(), category_names.len());
        CategoryWeightMatrix {
            values,
            signs,
            state,
            category_names,
            clamp_count,
        }
    }

    /// Builds a matrix directly from values, deriving the sign matrix from
    /// the value signs. State invariants are enforced: raw weights must be
    /// nonnegative; normalized and signed columns must have unit absolute
    /// sum.
    pub fn from_values(
        values: Array2<f64>,
        state: WeightState,
        category_names: Vec<String>,
    ) -> Result<Self> {
        if category_names.len() != values.ncols() {
            return Err(Error::InvalidParameter {
                name: "category_names",
                reason: format!(
                    "{} names for {} columns",
                    category_names.len(),
                    values.ncols()
                ),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "values",
                reason: "non-finite weight".into(),
            });
        }
        match state {
            WeightState::Raw => {
                if values.iter().any(|&v| v < 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "values",
                        reason: "raw weights must be nonnegative".into(),
                    });
                }
            }
            WeightState::Normalized | WeightState::Signed => {
                for (j, name) in category_names.iter().enumerate() {
                    let sum = compensated_sum(values.column(j).iter().map(|v| v.abs()));
                    if (sum - 1.0).abs() > 1e-9 {
                        return Err(Error::InvalidParameter {
                            name: "values",
                            reason: format!("column \"{name}\" absolute sum {sum} != 1"),
                        });
                    }
                }
            }
            WeightState::Centers => {}
        }
        let signs = values.mapv(|v| if v < 0.0 { -1i8 } else { 1i8 });
        Ok(CategoryWeightMatrix {
            values,
            signs,
            state,
            category_names,
            clamp_count: 0,
        })
    }

    /// Number of embedding dimensions (rows).
    pub fn dims(&self) -> usize {
        self.values.nrows()
    }

    /// Number of categories (columns).
    pub fn num_categories(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn signs(&self) -> ArrayView2<'_, i8> {
        self.signs.view()
    }

    pub fn state(&self) -> WeightState {
        self.state
    }

    pub fn category_names(&self) -> &[String] {
        &self.category_names
    }

    /// How many (dimension, category) cells hit the variance floor during
    /// construction.
    pub fn clamp_count(&self) -> usize {
        self.clamp_count
    }

    /// Column sums of absolute values, one per category.
    pub fn column_abs_sums(&self) -> Vec<f64> {
        (0..self.num_categories())
            .map(|j| compensated_sum(self.values.column(j).iter().map(|v| v.abs())))
            .collect()
    }

    /// CSV with a `dim` column followed by one column per category.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "dim")?;
        for name in &self.category_names {
            write!(w, ",{}", crate::report::csv_field(name))?;
        }
        writeln!(w)?;
        for i in 0..self.dims() {
            write!(w, "{i}")?;
            for v in self.values.row(i) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Normalizes each raw column to unit total weight, then restores encoding
/// directions: entries whose mean gap was negative flip sign.
///
/// Magnitudes after the sign step equal the normalized values exactly.
pub fn finalize_weights(w: &CategoryWeightMatrix) -> Result<CategoryWeightMatrix> {
    if w.state != WeightState::Raw {
        return Err(Error::WeightState {
            expected: WeightState::Raw,
            found: w.state,
        });
    }
    let sums = w.column_abs_sums();
    if let Some(j) = sums.iter().position(|&s| s <= 0.0) {
        return Err(Error::AllZeroColumn {
            name: w.category_names[j].clone(),
        });
    }
    let mut values = w.values.clone();
    for (j, &sum) in sums.iter().enumerate() {
        for (v, &sign) in values.column_mut(j).iter_mut().zip(w.signs.column(j)) {
            *v = (*v / sum) * f64::from(sign);
        }
    }
    Ok(CategoryWeightMatrix::from_parts(
        values,
        w.signs.clone(),
        WeightState::Signed,
        w.category_names.clone(),
        w.clamp_count,
    ))
}

/// Per-category sparse weights: the k entries of largest magnitude.
#[derive(Debug, Clone)]
pub struct SparseWeights {
    /// One list per category, `(dimension, weight)` sorted by dimension.
    entries: Vec<Vec<(u32, f64)>>,
    dims: usize,
    k: usize,
    state: WeightState,
    category_names: Vec<String>,
}

impl SparseWeights {
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_categories(&self) -> usize {
        self.entries.len()
    }

    pub fn state(&self) -> WeightState {
        self.state
    }

    pub fn category_names(&self) -> &[String] {
        &self.category_names
    }

    pub fn category_entries(&self, j: usize) -> &[(u32, f64)] {
        &self.entries[j]
    }

    /// Dense D x K matrix with the dropped entries as zeros.
    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.dims, self.entries.len()));
        for (j, entries) in self.entries.iter().enumerate() {
            for &(dim, weight) in entries {
                out[(dim as usize, j)] = weight;
            }
        }
        out
    }
}

/// Keeps, per category, the `k` weights of largest absolute value and drops
/// the rest. Ties at the boundary keep the lower dimension index.
pub fn sparsify(w: &CategoryWeightMatrix, k: usize) -> Result<SparseWeights> {
    let dims = w.dims();
    if k == 0 || k > dims {
        return Err(Error::KOutOfRange { k, max: dims });
    }
    let entries = (0..w.num_categories())
        .map(|j| {
            let mut cells: Vec<(u32, f64)> = w
                .values
                .column(j)
                .iter()
                .enumerate()
                .map(|(dim, &v)| (dim as u32, v))
                .collect();
            cells.sort_by(|a, b| {
                b.1.abs()
                    .partial_cmp(&a.1.abs())
                    .expect("finite weights")
                    .then_with(|| a.0.cmp(&b.0))
            });
            cells.truncate(k);
            cells.sort_by_key(|&(dim, _)| dim);
            cells
        })
        .collect();
    Ok(SparseWeights {
        entries,
        dims,
        k,
        state: w.state,
        category_names: w.category_names.clone(),
    })
}
