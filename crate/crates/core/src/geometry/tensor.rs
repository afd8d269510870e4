use serde_json::Value;

use crate::error::{Error, Result};
use crate::weil::WeilElement;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variance {
    Up,
    Down,
}

/// Dense tensor with Weil-valued entries, all indices of extent `dim`,
/// stored in row-major multi-index order.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorValue {
    dim: usize,
    order: usize,
    variance: Vec<Variance>,
    entries: Vec<WeilElement>,
}

impl TensorValue {
    pub fn from_fn(
        dim: usize,
        order: usize,
        variance: Vec<Variance>,
        mut f: impl FnMut(&[usize]) -> WeilElement,
    ) -> Self {
        let rank = variance.len();
        let count = dim.pow(rank as u32);
        let mut idx = vec![0; rank];
        let mut entries = Vec::with_capacity(count);
        for flat in 0..count {
            let mut rest = flat;
            for slot in idx.iter_mut().rev() {
                *slot = rest % dim;
                rest /= dim;
            }
            let v = f(&idx);
            debug_assert_eq!(v.order(), order);
            entries.push(v);
        }
        TensorValue {
            dim,
            order,
            variance,
            entries,
        }
    }

    pub fn from_entries(
        dim: usize,
        variance: Vec<Variance>,
        entries: Vec<WeilElement>,
    ) -> Result<Self> {
        let expected = dim.pow(variance.len() as u32);
        if entries.len() != expected {
            return Err(Error::Shape(format!(
                "expected {expected} entries, got {}",
                entries.len()
            )));
        }
        let order = entries.first().map_or(0, WeilElement::order);
        if let Some(bad) = entries.iter().find(|e| e.order() != order) {
            return Err(Error::OrderMismatch {
                left: order,
                right: bad.order(),
            });
        }
        Ok(TensorValue {
            dim,
            order,
            variance,
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.dim; self.rank()]
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn entries(&self) -> &[WeilElement] {
        &self.entries
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.rank(), "index rank");
        idx.iter().fold(0, |acc, &i| {
            assert!(i < self.dim, "index out of range");
            acc * self.dim + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &WeilElement {
        &self.entries[self.offset(idx)]
    }

    /// Entrywise real part.
    pub fn project_real(&self) -> RealTensor {
        RealTensor {
            dim: self.dim,
            rank: self.rank(),
            data: self.entries.iter().map(WeilElement::real_part).collect(),
        }
    }

    /// Nested JSON arrays of `{"order", "coeffs"}` objects.
    pub fn to_json(&self) -> Value {
        fn nest(entries: &[WeilElement], dim: usize, rank: usize) -> Value {
            if rank == 0 {
                return serde_json::to_value(&entries[0]).expect("serializable");
            }
            let stride = entries.len() / dim;
            Value::Array(
                entries
                    .chunks(stride)
                    .map(|c| nest(c, dim, rank - 1))
                    .collect(),
            )
        }
        nest(&self.entries, self.dim, self.rank())
    }
}

/// Real-valued counterpart of [`TensorValue`].
#[derive(Clone, Debug, PartialEq)]
pub struct RealTensor {
    pub dim: usize,
    pub rank: usize,
    pub data: Vec<f64>,
}

impl RealTensor {
    pub fn get(&self, idx: &[usize]) -> f64 {
        let off = idx.iter().fold(0, |acc, &i| acc * self.dim + i);
        self.data[off]
    }

    pub fn max_abs_diff(&self, other: &RealTensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
