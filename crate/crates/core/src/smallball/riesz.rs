use std::collections::BTreeMap;

use crate::dyadic::ShapeVector;
use crate::error::{HyperHaarError, Result};
use crate::field::{cellwise_from_ints, check_capacity, GridFunction};
use crate::scalar::Scalar;
use crate::smallball::params::RieszParams;
use crate::smallball::rfunc::{accumulate_rfunction, add_int_into, multiply_rfunction, shapes_resolution};
use crate::smallball::signs::SignSource;

/// `Ψ = 1 + Σ_k Ψˢᵈ_k + Ψ¬`.
#[derive(Debug, Clone)]
pub struct Decomposition<T> {
    pub psi: GridFunction<T>,
    /// `sd_by_order[k - 1] = Ψˢᵈ_k`.
    pub sd_by_order: Vec<GridFunction<T>>,
    pub neg: GridFunction<T>,
}

impl<T: Scalar> Decomposition<T> {
    /// `Ψˢᵈ = Σ_k Ψˢᵈ_k`.
    pub fn sd(&self) -> Result<GridFunction<T>> {
        let mut acc = GridFunction::zeros(self.psi.resolution().clone())?;
        for g in &self.sd_by_order {
            acc.add_scaled_assign(g, &T::one())?;
        }
        Ok(acc)
    }

    /// Checks `psi = 1 + Σ sd + neg` cellwise.
    pub fn identity_holds(&self) -> Result<bool> {
        let one = GridFunction::constant(self.psi.resolution().clone(), T::one())?;
        let rebuilt = one.add(&self.sd()?)?.add(&self.neg)?;
        Ok(rebuilt == self.psi)
    }
}

/// Integer building blocks of the Riesz product for one parameter set and one sign choice.
///
/// Everything that does not involve `ρ̃` is kept as integer grids; scalar grids are
/// produced on demand for a given scalar type.
pub struct RieszEngine {
    params: RieszParams,
    resolution: ShapeVector,
    block_shapes: Vec<Vec<ShapeVector>>,
    signs: BTreeMap<ShapeVector, Vec<i8>>,
    blocks: Vec<GridFunction<i32>>,
}

impl RieszEngine {
    pub fn new(params: &RieszParams, source: &dyn SignSource) -> Result<Self> {
        let block_shapes: Vec<Vec<ShapeVector>> =
            (1..=params.q).map(|t| params.block_shapes(t)).collect::<Result<_>>()?;
        let all: Vec<ShapeVector> = block_shapes.iter().flatten().cloned().collect();
        let resolution = shapes_resolution(&all, params.d);
        check_capacity::<i32>(&resolution)?;
        let mut signs = BTreeMap::new();
        for shape in &all {
            signs.insert(shape.clone(), source.shape_signs(shape)?);
        }
        let mut blocks = Vec::with_capacity(params.q);
        for shapes in &block_shapes {
            let mut grid = GridFunction::<i32>::zeros(resolution.clone())?;
            for shape in shapes {
                accumulate_rfunction(&mut grid, shape, &signs[shape])?;
            }
            blocks.push(grid);
        }
        Ok(Self { params: params.clone(), resolution, block_shapes, signs, blocks })
    }

    pub fn params(&self) -> &RieszParams {
        &self.params
    }

    pub fn resolution(&self) -> &ShapeVector {
        &self.resolution
    }

    /// `𝔸_t` for `1 ≤ t ≤ q`.
    pub fn block_shapes(&self, t: usize) -> &[ShapeVector] {
        &self.block_shapes[t - 1]
    }

    pub fn signs(&self, shape: &ShapeVector) -> Option<&[i8]> {
        self.signs.get(shape).map(|v| v.as_slice())
    }

    /// `F_t` as an integer grid.
    pub fn block(&self, t: usize) -> Result<&GridFunction<i32>> {
        if t == 0 || t > self.params.q {
            return Err(HyperHaarError::BlockOutOfRange { t, q: self.params.q });
        }
        Ok(&self.blocks[t - 1])
    }

    pub fn blocks(&self) -> &[GridFunction<i32>] {
        &self.blocks
    }

    /// `f_{r⃗}` as an `i8` grid on the engine resolution.
    pub fn rfunction(&self, shape: &ShapeVector) -> Result<GridFunction<i8>> {
        let signs = self.signs(shape).ok_or_else(|| HyperHaarError::MissingSign(format!("shape {shape}")))?;
        let one = GridFunction::constant(self.resolution.clone(), 1i8)?;
        multiply_rfunction(&one, shape, signs)
    }

    /// `prefix · f_{r⃗}`.
    pub fn times_rfunction(&self, prefix: &GridFunction<i8>, shape: &ShapeVector) -> Result<GridFunction<i8>> {
        let signs = self.signs(shape).ok_or_else(|| HyperHaarError::MissingSign(format!("shape {shape}")))?;
        multiply_rfunction(prefix, shape, signs)
    }

    /// `Ψ = Π_t (1 + ρ F_t)`.
    pub fn psi_with<T: Scalar>(&self, rho: &T) -> Result<GridFunction<T>> {
        check_capacity::<T>(&self.resolution)?;
        let grids: Vec<&GridFunction<i32>> = self.blocks.iter().collect();
        if grids.is_empty() {
            return GridFunction::constant(self.resolution.clone(), T::one());
        }
        cellwise_from_ints(&grids, |f| {
            f.iter().fold(T::one(), |acc, &v| acc * (T::one() + rho.clone() * T::of_int(v)))
        })
    }

    pub fn psi<T: Scalar>(&self) -> Result<GridFunction<T>> {
        self.psi_with(&self.params.rho_for::<T>()?)
    }

    /// Integer sums `S_k = Σ_{v_1<…<v_k} Σˢᵈ Π f_{r⃗_t}`, so that `Ψˢᵈ_k = ρ̃^k S_k`.
    ///
    /// Strongly distinct tuples are enumerated depth-first over blocks in increasing
    /// order; the first coordinate is automatically distinct since blocks are disjoint.
    pub fn sd_sums(&self) -> Result<Vec<GridFunction<i32>>> {
        let q = self.params.q;
        let mut sums: Vec<GridFunction<i32>> =
            (0..q).map(|_| GridFunction::zeros(self.resolution.clone())).collect::<Result<_>>()?;
        let one = GridFunction::constant(self.resolution.clone(), 1i8)?;
        let mut chosen: Vec<&ShapeVector> = Vec::with_capacity(q);
        self.sd_dfs(0, &one, &mut chosen, &mut sums)?;
        Ok(sums)
    }

    fn sd_dfs<'a>(
        &'a self,
        from_block: usize,
        prefix: &GridFunction<i8>,
        chosen: &mut Vec<&'a ShapeVector>,
        sums: &mut [GridFunction<i32>],
    ) -> Result<()> {
        for b in from_block..self.params.q {
            for shape in &self.block_shapes[b] {
                let compatible = chosen
                    .iter()
                    .all(|c| (1..self.params.d).all(|axis| c.get(axis) != shape.get(axis)));
                if !compatible {
                    continue;
                }
                let next = self.times_rfunction(prefix, shape)?;
                add_int_into(&mut sums[chosen.len()], &next, 1)?;
                chosen.push(shape);
                self.sd_dfs(b + 1, &next, chosen, sums)?;
                chosen.pop();
            }
        }
        Ok(())
    }

    /// Full decomposition for scalar type `T` with the given `ρ̃`.
    pub fn decompose_with<T: Scalar>(&self, rho: &T) -> Result<Decomposition<T>> {
        let psi = self.psi_with(rho)?;
        let sums = self.sd_sums()?;
        let mut sd_by_order = Vec::with_capacity(sums.len());
        let mut rho_k = T::one();
        for s in &sums {
            rho_k = rho_k * rho.clone();
            let rk = rho_k.clone();
            sd_by_order.push(cellwise_from_ints(&[s], |v| rk.clone() * T::of_int(v[0]))?);
        }
        let mut neg = psi.clone();
        let values = neg.values_mut();
        for v in values.iter_mut() {
            *v = v.clone() - T::one();
        }
        for g in &sd_by_order {
            neg.add_scaled_assign(g, &-T::one())?;
        }
        Ok(Decomposition { psi, sd_by_order, neg })
    }

    pub fn decompose<T: Scalar>(&self) -> Result<Decomposition<T>> {
        self.decompose_with(&self.params.rho_for::<T>()?)
    }
}

/// `Ψ` for the given parameters and signs.
pub fn riesz_product<T: Scalar>(params: &RieszParams, source: &dyn SignSource) -> Result<GridFunction<T>> {
    params.fits::<T>()?;
    RieszEngine::new(params, source)?.psi()
}

/// `Ψ = 1 + Σ_k Ψˢᵈ_k + Ψ¬`.
pub fn decompose<T: Scalar>(params: &RieszParams, source: &dyn SignSource) -> Result<Decomposition<T>> {
    params.fits::<T>()?;
    RieszEngine::new(params, source)?.decompose()
}

/// Summary statistics of `Ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiStats<T> {
    pub mean: T,
    pub l1: T,
    /// `‖Ψ‖₂²`, exact in exact mode.
    pub l2_sq: T,
    pub l2: f64,
    /// Measure of `{Ψ < 0}`.
    pub neg_measure: T,
    pub min: T,
    /// `‖Ψ‖₁ = EΨ − 2 E Ψ 1_{Ψ<0}` recomputed from the negative part agrees with `l1`.
    pub l1_consistent: bool,
}

pub fn psi_stats<T: Scalar>(psi: &GridFunction<T>) -> Result<PsiStats<T>> {
    let mean = psi.integral();
    let l1 = psi.norm_lp_pow(1)?;
    let l2_sq = psi.norm_lp_pow(2)?;
    let negative_part = psi.map(|v| if *v < T::zero() { v.clone() } else { T::zero() }).integral();
    let two = T::of_int(2);
    let recomputed = mean.clone() - two * negative_part;
    let l1_consistent = if T::is_exact() {
        recomputed == l1
    } else {
        (recomputed.to_f64() - l1.to_f64()).abs() <= 1e-9 * l1.to_f64().abs().max(1.0)
    };
    Ok(PsiStats {
        l2: l2_sq.to_f64().sqrt(),
        mean,
        l1,
        l2_sq,
        neg_measure: psi.negative_measure(),
        min: psi.min_value(),
        l1_consistent,
    })
}
