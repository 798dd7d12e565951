use rayon::prelude::*;

use crate::dyadic::{DyadicRectangle, ShapeVector};
use crate::error::{HyperHaarError, Result};
use crate::scalar::{Cell, IntCell, Scalar};

/// Binary cellwise operation for [`GridFunction::combine`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
}

/// A function on `[0,1)^d` constant on the cells of an anisotropic dyadic grid.
///
/// Cells are stored row-major with the first axis most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    resolution: ShapeVector,
    values: Vec<T>,
}

pub(crate) fn check_capacity<T: Cell>(resolution: &ShapeVector) -> Result<()> {
    let bits = resolution.length();
    if bits > T::MAX_GRID_BITS {
        return Err(HyperHaarError::Capacity { bits, limit: T::MAX_GRID_BITS });
    }
    Ok(())
}

impl<T: Cell> GridFunction<T> {
    pub fn from_values(resolution: ShapeVector, values: Vec<T>) -> Result<Self> {
        check_capacity::<T>(&resolution)?;
        if values.len() != resolution.rect_count() {
            return Err(HyperHaarError::InvalidParams(format!(
                "{} values for resolution {resolution}",
                values.len()
            )));
        }
        Ok(Self { resolution, values })
    }

    pub fn constant(resolution: ShapeVector, value: T) -> Result<Self> {
        check_capacity::<T>(&resolution)?;
        let len = resolution.rect_count();
        Ok(Self { resolution, values: vec![value; len] })
    }

    pub fn zeros(resolution: ShapeVector) -> Result<Self> {
        Self::constant(resolution, T::zero())
    }

    /// Builds a grid from a function of the cell multi-index.
    pub fn from_fn(resolution: ShapeVector, f: impl Fn(&[u64]) -> T + Sync + Send) -> Result<Self> {
        check_capacity::<T>(&resolution)?;
        let len = resolution.rect_count();
        let values = (0..len)
            .into_par_iter()
            .map(|i| f(&cell_multi_index(&resolution, i)))
            .collect();
        Ok(Self { resolution, values })
    }

    pub fn resolution(&self) -> &ShapeVector {
        &self.resolution
    }

    pub fn dim(&self) -> usize {
        self.resolution.dim()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value on the cell containing the dyadic cell `index` of this resolution.
    pub fn at(&self, index: &[u64]) -> &T {
        let mut flat = 0usize;
        for (&j, &m) in index.iter().zip(self.resolution.entries()) {
            flat = (flat << m) | j as usize;
        }
        &self.values[flat]
    }

    /// Same function on a finer grid.
    pub fn refine(&self, target: &ShapeVector) -> Result<Self> {
        if target.dim() != self.dim() {
            return Err(HyperHaarError::DimensionMismatch { expected: self.dim(), got: target.dim() });
        }
        if target == &self.resolution {
            return Ok(self.clone());
        }
        if target.entries().iter().zip(self.resolution.entries()).any(|(t, m)| t < m) {
            return Err(HyperHaarError::InsufficientResolution {
                requested: target.entries().to_vec(),
                what: format!("refinement of a grid at {}", self.resolution),
            });
        }
        check_capacity::<T>(target)?;
        let mut values = self.values.clone();
        let mut current: Vec<u32> = self.resolution.entries().to_vec();
        for axis in 0..self.dim() {
            let extra = target.get(axis) - current[axis];
            if extra == 0 {
                continue;
            }
            let inner: usize = current[axis + 1..].iter().map(|&m| 1usize << m).product();
            let len_axis = 1usize << current[axis];
            let outer = values.len() / (inner * len_axis);
            let mut next = Vec::with_capacity(values.len() << extra);
            for o in 0..outer {
                for j in 0..len_axis << extra {
                    let src = (o * len_axis + (j >> extra)) * inner;
                    next.extend_from_slice(&values[src..src + inner]);
                }
            }
            values = next;
            current[axis] = target.get(axis);
        }
        Ok(Self { resolution: target.clone(), values })
    }

    pub fn map<U: Cell>(&self, f: impl Fn(&T) -> U + Sync + Send) -> GridFunction<U> {
        GridFunction {
            resolution: self.resolution.clone(),
            values: self.values.par_iter().map(f).collect(),
        }
    }

    /// Cellwise `op` on the common refinement.
    pub fn combine(&self, other: &Self, op: Op) -> Result<Self> {
        self.zip_with(other, |a, b| match op {
            Op::Add => a.clone() + b.clone(),
            Op::Sub => a.clone() - b.clone(),
            Op::Mul => a.clone() * b.clone(),
        })
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T + Sync + Send) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(HyperHaarError::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let target = self.resolution.join(&other.resolution);
        let a = self.refine(&target)?;
        let b = other.refine(&target)?;
        let values = a.values.par_iter().zip(b.values.par_iter()).map(|(x, y)| f(x, y)).collect();
        Ok(Self { resolution: target, values })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, Op::Add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, Op::Sub)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.combine(other, Op::Mul)
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    /// Adds `c · other` into `self` in place; `other` must not be finer than `self`.
    pub fn add_scaled_assign(&mut self, other: &Self, c: &T) -> Result<()> {
        let other = other.refine(&self.resolution)?;
        self.values
            .par_iter_mut()
            .zip(other.values.par_iter())
            .for_each(|(a, b)| *a = a.clone() + b.clone() * c.clone());
        Ok(())
    }
}

/// Cellwise `f(a_1[c], …, a_k[c])` over integer grids of one resolution, memoized on
/// the tuple of integer values (exact values repeat heavily).
pub fn cellwise_from_ints<T: Cell, I: IntCell>(
    grids: &[&GridFunction<I>],
    f: impl Fn(&[i64]) -> T,
) -> Result<GridFunction<T>> {
    let first = grids.first().ok_or_else(|| HyperHaarError::InvalidParams("no input grids".into()))?;
    let resolution = first.resolution.clone();
    if grids.iter().any(|g| g.resolution != resolution) {
        return Err(HyperHaarError::InvalidParams("input grids must share a resolution".into()));
    }
    check_capacity::<T>(&resolution)?;
    let mut memo: std::collections::HashMap<Vec<i64>, T> = std::collections::HashMap::new();
    let mut key = vec![0i64; grids.len()];
    let mut values = Vec::with_capacity(first.len());
    for c in 0..first.len() {
        for (k, g) in key.iter_mut().zip(grids) {
            *k = g.values[c].into();
        }
        let v = match memo.get(&key) {
            Some(v) => v.clone(),
            None => {
                let v = f(&key);
                memo.insert(key.clone(), v.clone());
                v
            }
        };
        values.push(v);
    }
    Ok(GridFunction { resolution, values })
}

/// Multi-index of a flat cell index.
pub fn cell_multi_index(resolution: &ShapeVector, mut flat: usize) -> Vec<u64> {
    let mut index = vec![0u64; resolution.dim()];
    for (axis, &m) in resolution.entries().iter().enumerate().rev() {
        index[axis] = (flat & ((1usize << m) - 1)) as u64;
        flat >>= m;
    }
    index
}

impl<T: Scalar> GridFunction<T> {
    /// `h_R` sampled on the grid `m⃗`.
    pub fn from_haar(rect: &DyadicRectangle, resolution: &ShapeVector) -> Result<Self> {
        if rect.dim() != resolution.dim() {
            return Err(HyperHaarError::DimensionMismatch { expected: rect.dim(), got: resolution.dim() });
        }
        if rect.sides().iter().zip(resolution.entries()).any(|(s, &m)| m < s.level() + 1) {
            return Err(HyperHaarError::InsufficientResolution {
                requested: resolution.entries().to_vec(),
                what: format!("haar tensor on {rect}"),
            });
        }
        let tables: Vec<Vec<i8>> = rect
            .sides()
            .iter()
            .zip(resolution.entries())
            .map(|(side, &m)| {
                (0..1u64 << m)
                    .map(|j| {
                        let shift = m - side.level();
                        if j >> shift != side.pos() {
                            0
                        } else if (j >> (shift - 1)) & 1 == 1 {
                            1
                        } else {
                            -1
                        }
                    })
                    .collect()
            })
            .collect();
        Self::from_fn(resolution.clone(), |idx| {
            let v: i8 = idx.iter().zip(&tables).map(|(&j, t)| t[j as usize]).product();
            T::of_int(v as i64)
        })
    }

    pub fn cell_volume(&self) -> T {
        T::pow2(-(self.resolution.length() as i32))
    }

    /// Sum of all cell values in a fixed order.
    pub fn sum(&self) -> T {
        ordered_sum(&self.values)
    }

    pub fn integral(&self) -> T {
        self.sum() * self.cell_volume()
    }

    pub fn inner_product(&self, other: &Self) -> Result<T> {
        Ok(self.mul(other)?.integral())
    }

    /// `‖f‖_p^p`, exact in exact mode.
    pub fn norm_lp_pow(&self, p: u32) -> Result<T> {
        if p == 0 {
            return Err(HyperHaarError::Domain("p must be at least 1".into()));
        }
        let powers: Vec<T> = self.values.par_iter().map(|v| v.abs().powu(p)).collect();
        Ok(ordered_sum(&powers) * self.cell_volume())
    }

    /// `‖f‖_p` with the root taken in floating point.
    pub fn norm_lp(&self, p: u32) -> Result<f64> {
        Ok(self.norm_lp_pow(p)?.to_f64().powf(1.0 / p as f64))
    }

    pub fn norm_inf(&self) -> T {
        self.values
            .iter()
            .map(|v| v.abs())
            .fold(T::zero(), |m, v| if v > m { v } else { m })
    }

    pub fn min_value(&self) -> T {
        let mut it = self.values.iter();
        let first = it.next().cloned().unwrap_or_else(T::zero);
        it.fold(first, |m, v| if *v < m { v.clone() } else { m })
    }

    /// Lebesgue measure of `{f < 0}`.
    pub fn negative_measure(&self) -> T {
        let count = self.values.iter().filter(|v| **v < T::zero()).count();
        T::of_int(count as i64) * self.cell_volume()
    }

    pub fn cast<U: Scalar>(&self) -> GridFunction<U> {
        if U::is_exact() {
            self.map(|v| U::from_rational(&v.to_rational()))
        } else {
            self.map(|v| U::from_f64(v.to_f64()).expect("finite value"))
        }
    }
}

impl<I: IntCell> GridFunction<I> {
    /// Exact embedding of an integer-valued grid into a scalar grid.
    pub fn lift<T: Scalar>(&self) -> Result<GridFunction<T>> {
        check_capacity::<T>(&self.resolution)?;
        Ok(self.map(|&v| T::of_int(v.into())))
    }

    /// `Σ_cells v^p` as an exact integer.
    pub fn power_sum(&self, p: u32) -> i128 {
        self.values
            .par_iter()
            .map(|&v| {
                let v: i64 = v.into();
                (v as i128).pow(p)
            })
            .sum()
    }

    pub fn max_abs(&self) -> i64 {
        self.values.iter().map(|&v| Into::<i64>::into(v).abs()).max().unwrap_or(0)
    }
}

/// Sums in index order (deterministic for floats).
pub(crate) fn ordered_sum<T: Scalar>(values: &[T]) -> T {
    if T::is_exact() {
        values
            .par_chunks(4096)
            .map(|c| c.iter().fold(T::zero(), |a, b| a + b.clone()))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(T::zero(), |a, b| a + b)
    } else {
        values.iter().fold(T::zero(), |a, b| a + b.clone())
    }
}
