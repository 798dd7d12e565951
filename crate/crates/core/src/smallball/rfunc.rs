use rayon::prelude::*;

use crate::dyadic::ShapeVector;
use crate::error::{HyperHaarError, Result};
use crate::field::{check_capacity, GridFunction};
use crate::scalar::{IntCell, Scalar};
use crate::smallball::params::RieszParams;
use crate::smallball::signs::SignSource;

/// Smallest grid resolving every r-function of the given shapes: `max_r (r_t + 1)` per axis.
pub fn shapes_resolution(shapes: &[ShapeVector], d: usize) -> ShapeVector {
    let mut m = vec![0u32; d];
    for r in shapes {
        for (mt, &rt) in m.iter_mut().zip(r.entries()) {
            *mt = (*mt).max(rt + 1);
        }
    }
    ShapeVector::new(m)
}

/// Cell-value evaluator for one r-function on a fixed grid.
pub(crate) struct RTable<'a> {
    signs: &'a [i8],
    /// Per axis: (bit offset of the axis in the flat cell index, grid level, shape level).
    axes: Vec<(u32, u32, u32)>,
}

impl<'a> RTable<'a> {
    pub(crate) fn new(shape: &ShapeVector, signs: &'a [i8], resolution: &ShapeVector) -> Result<Self> {
        if shape.dim() != resolution.dim() {
            return Err(HyperHaarError::DimensionMismatch { expected: resolution.dim(), got: shape.dim() });
        }
        if shape.entries().iter().zip(resolution.entries()).any(|(&r, &m)| m < r + 1) {
            return Err(HyperHaarError::InsufficientResolution {
                requested: resolution.entries().to_vec(),
                what: format!("r-function of shape {shape}"),
            });
        }
        if signs.len() != shape.rect_count() {
            return Err(HyperHaarError::InvalidParams(format!(
                "{} signs for shape {shape}",
                signs.len()
            )));
        }
        let mut offset = resolution.length();
        let axes = shape
            .entries()
            .iter()
            .zip(resolution.entries())
            .map(|(&r, &m)| {
                offset -= m;
                (offset, m, r)
            })
            .collect();
        Ok(Self { signs, axes })
    }

    #[inline]
    pub(crate) fn value(&self, flat: usize) -> i8 {
        let mut rect = 0usize;
        let mut sign = 1i8;
        for &(off, m, r) in &self.axes {
            let j = (flat >> off) & ((1usize << m) - 1);
            let below = m - r;
            rect = (rect << r) | (j >> below);
            if (j >> (below - 1)) & 1 == 0 {
                sign = -sign;
            }
        }
        sign * self.signs[rect]
    }
}

/// `f_{r⃗} = Σ_{R ∈ ℛ_{r⃗}} ε_R h_R` as an integer grid.
pub fn rfunction_int(shape: &ShapeVector, signs: &[i8], resolution: &ShapeVector) -> Result<GridFunction<i8>> {
    check_capacity::<i8>(resolution)?;
    let table = RTable::new(shape, signs, resolution)?;
    let values = (0..resolution.rect_count()).into_par_iter().map(|i| table.value(i)).collect();
    GridFunction::from_values(resolution.clone(), values)
}

/// `grid += f_{r⃗}` without materializing `f_{r⃗}`.
pub fn accumulate_rfunction<I: IntCell>(grid: &mut GridFunction<I>, shape: &ShapeVector, signs: &[i8]) -> Result<()> {
    let resolution = grid.resolution().clone();
    let table = RTable::new(shape, signs, &resolution)?;
    let one = I::one();
    grid.values_mut().par_iter_mut().enumerate().for_each(|(i, v)| {
        if table.value(i) > 0 {
            *v = *v + one;
        } else {
            *v = *v - one;
        }
    });
    Ok(())
}

/// `prefix · f_{r⃗}` cellwise.
pub fn multiply_rfunction(prefix: &GridFunction<i8>, shape: &ShapeVector, signs: &[i8]) -> Result<GridFunction<i8>> {
    let table = RTable::new(shape, signs, prefix.resolution())?;
    let values = prefix.values().par_iter().enumerate().map(|(i, &p)| p * table.value(i)).collect();
    GridFunction::from_values(prefix.resolution().clone(), values)
}

/// `acc += coef · g` for integer grids of equal resolution.
pub fn add_int_into<I: IntCell>(acc: &mut GridFunction<i32>, g: &GridFunction<I>, coef: i32) -> Result<()> {
    if acc.resolution() != g.resolution() {
        return Err(HyperHaarError::InvalidParams("integer grids must share a resolution".into()));
    }
    acc.values_mut().par_iter_mut().zip(g.values().par_iter()).for_each(|(a, &v)| {
        let v: i64 = v.into();
        *a += coef * v as i32;
    });
    Ok(())
}

/// The r-function of `shape` with signs from `source`, on `resolution`.
pub fn rfunction<T: Scalar>(
    shape: &ShapeVector,
    source: &dyn SignSource,
    resolution: &ShapeVector,
) -> Result<GridFunction<T>> {
    check_capacity::<T>(resolution)?;
    let signs = source.shape_signs(shape)?;
    rfunction_int(shape, &signs, resolution)?.lift()
}

/// `F_t = Σ_{r⃗ ∈ 𝔸_t} f_{r⃗}` as an integer grid on `resolution`.
pub fn block_sum_int(
    params: &RieszParams,
    t: usize,
    source: &dyn SignSource,
    resolution: &ShapeVector,
) -> Result<GridFunction<i32>> {
    let mut grid = GridFunction::<i32>::zeros(resolution.clone())?;
    for shape in params.block_shapes(t)? {
        accumulate_rfunction(&mut grid, &shape, &source.shape_signs(&shape)?)?;
    }
    Ok(grid)
}

/// `F_t` on the smallest grid resolving its shapes.
pub fn block_sum<T: Scalar>(params: &RieszParams, t: usize, source: &dyn SignSource) -> Result<GridFunction<T>> {
    let shapes = params.block_shapes(t)?;
    let resolution = shapes_resolution(&shapes, params.d);
    check_capacity::<T>(&resolution)?;
    block_sum_int(params, t, source, &resolution)?.lift()
}
