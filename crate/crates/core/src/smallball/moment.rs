use crate::error::{HyperHaarError, Result};
use crate::field::GridFunction;
use crate::scalar::{IntCell, Scalar};
use crate::smallball::params::{BlockMode, RieszParams};
use crate::smallball::rfunc::{accumulate_rfunction, shapes_resolution};
use crate::smallball::signs::SignSource;

/// `‖ρF‖_p` for one even `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRow {
    pub p: u32,
    pub norm: f64,
    /// `norm / √p`.
    pub ratio: f64,
}

fn check_even(ps: &[u32]) -> Result<()> {
    if let Some(p) = ps.iter().find(|&&p| p == 0 || p % 2 == 1) {
        return Err(HyperHaarError::Domain(format!("moment exponent {p} is not a positive even integer")));
    }
    Ok(())
}

/// Moments of an integer grid from exact power sums; only the final root is floating point.
pub fn moment_profile_int<I: IntCell>(f: &GridFunction<I>, rho: f64, ps: &[u32]) -> Result<Vec<MomentRow>> {
    check_even(ps)?;
    let cells = f.len() as f64;
    Ok(ps
        .iter()
        .map(|&p| {
            let mean_pow = f.power_sum(p) as f64 / cells;
            let norm = rho.abs() * mean_pow.powf(1.0 / p as f64);
            MomentRow { p, norm, ratio: norm / (p as f64).sqrt() }
        })
        .collect())
}

/// Moments of a scalar grid; `‖ρF‖_p^p` is exact in exact mode.
pub fn moment_profile<T: Scalar>(f: &GridFunction<T>, rho: f64, ps: &[u32]) -> Result<Vec<MomentRow>> {
    check_even(ps)?;
    ps.iter()
        .map(|&p| {
            let norm = rho.abs() * f.norm_lp(p)?;
            Ok(MomentRow { p, norm, ratio: norm / (p as f64).sqrt() })
        })
        .collect()
}

/// `F_t` built directly into an `i8` grid when its range allows, which keeps
/// level-10 three-dimensional blocks within memory.
pub fn block_sum_compact(params: &RieszParams, t: usize, source: &dyn SignSource) -> Result<GridFunction<i8>> {
    let shapes = params.block_shapes(t)?;
    if shapes.len() > i8::MAX as usize {
        return Err(HyperHaarError::Capacity { bits: 8, limit: 7 });
    }
    let mut grid = GridFunction::<i8>::zeros(shapes_resolution(&shapes, params.d))?;
    for shape in &shapes {
        accumulate_rfunction(&mut grid, shape, &source.shape_signs(shape)?)?;
    }
    Ok(grid)
}

/// Moment table of `ρF_1` with `q = 2` partition blocks and the true `ρ`.
pub fn block_moment_table(d: usize, n: u32, ps: &[u32], source: &dyn SignSource) -> Result<Vec<MomentRow>> {
    let params = RieszParams::new(n, d, Some(2), BlockMode::Partition)?;
    let f = block_sum_compact(&params, 1, source)?;
    moment_profile_int(&f, params.rho, ps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::ShapeVector;
    use crate::smallball::rfunc::rfunction_int;
    use crate::smallball::signs::{AllPlus, RandomSigns};

    #[test]
    fn rfunction_moments_are_one() {
        let shape = ShapeVector::new(vec![1, 2, 0]);
        let f = rfunction_int(&shape, &AllPlus.shape_signs(&shape).unwrap(), &ShapeVector::new(vec![2, 3, 1])).unwrap();
        for row in moment_profile_int(&f, 1.0, &[2, 4, 6]).unwrap() {
            assert!((row.norm - 1.0).abs() < 1e-15);
        }
        assert!(moment_profile_int(&f, 1.0, &[3]).is_err());
    }

    #[test]
    fn second_moment_counts_shapes() {
        let params = RieszParams::new(6, 3, Some(2), BlockMode::Partition).unwrap();
        let f = block_sum_compact(&params, 1, &RandomSigns { seed: 4 }).unwrap();
        let count = params.block_shapes(1).unwrap().len() as f64;
        let row = moment_profile_int(&f, 1.0, &[2]).unwrap()[0];
        assert!((row.norm - count.sqrt()).abs() < 1e-12);
        let g: GridFunction<f64> = f.lift().unwrap();
        let rows = moment_profile(&g, 1.0, &[2, 4]).unwrap();
        let exact = moment_profile_int(&f, 1.0, &[2, 4]).unwrap();
        for (a, b) in rows.iter().zip(&exact) {
            assert!((a.norm - b.norm).abs() < 1e-9);
        }
    }
}
