use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::dyadic::{DyadicInterval, DyadicRectangle, ShapeVector};
use crate::error::{HyperHaarError, Result};
use crate::field::{cellwise_from_ints, check_capacity, merge_sorted, GridFunction, PiecewiseLinear, TensorPLFunction};
use crate::scalar::Scalar;
use crate::smallball::coeffs::CoefficientField;
use crate::smallball::params::RieszParams;
use crate::smallball::rfunc::rfunction_int;
use crate::smallball::riesz::RieszEngine;
use crate::smallball::signs::SignSource;

/// Checks the profile assumptions and returns `c_φ = ⟨φ, h_{[-1/2,1/2]}⟩`.
pub fn profile_constant<T: Scalar>(profile: &PiecewiseLinear<T>) -> Result<T> {
    let half = T::one().half();
    let knots = profile.knots();
    if knots[0] < -half.clone() || *knots.last().unwrap() > half {
        return Err(HyperHaarError::InvalidParams("profile must be supported on [-1/2, 1/2]".into()));
    }
    let mean = profile.mean();
    let mean_zero = if T::is_exact() { mean.is_zero() } else { mean.to_f64().abs() < 1e-12 };
    if !mean_zero {
        return Err(HyperHaarError::InvalidParams("profile must have mean zero".into()));
    }
    let c = profile.haar_pairing();
    if c <= T::zero() {
        return Err(HyperHaarError::InvalidParams("profile needs ⟨φ, h⟩ > 0".into()));
    }
    Ok(c)
}

/// Per-axis vertex lists of `φ_I` on a breakpoint grid.
struct AxisTable<'a, T> {
    breakpoints: &'a [T],
    profile: &'a PiecewiseLinear<T>,
    cache: HashMap<DyadicInterval, Vec<(usize, T)>>,
}

impl<'a, T: Scalar> AxisTable<'a, T> {
    fn support(&mut self, side: &DyadicInterval) -> &[(usize, T)] {
        let (b, profile) = (self.breakpoints, self.profile);
        self.cache.entry(*side).or_insert_with(|| {
            let (start, end) = (side.start::<T>(), side.end::<T>());
            let scale = T::pow2(side.level() as i32);
            let center = (start.clone() + end.clone()).half();
            let lo = b.partition_point(|x| *x < start);
            let hi = b.partition_point(|x| *x <= end);
            (lo..hi)
                .map(|i| (i, profile.eval(&((b[i].clone() - center.clone()) * scale.clone()))))
                .filter(|(_, v)| !v.is_zero())
                .collect()
        })
    }
}

/// `Σ α(R) φ_R` with `φ_R = Π_t φ_{R_t}` as a tensor piecewise-linear function.
pub fn smooth_sum<T: Scalar>(
    terms: &[(DyadicRectangle, BigRational)],
    d: usize,
    profile: &PiecewiseLinear<T>,
) -> Result<TensorPLFunction<T>> {
    let unit: Vec<T> = profile.centered_on_unit().knots().to_vec();
    let mut breakpoints: Vec<Vec<T>> = vec![vec![T::zero(), T::one()]; d];
    for axis in 0..d {
        let mut levels: Vec<u32> = terms.iter().map(|(r, _)| r.sides()[axis].level()).collect();
        levels.sort_unstable();
        levels.dedup();
        for k in levels {
            let step = T::pow2(-(k as i32));
            let images: Vec<T> = (0..1u64 << k)
                .flat_map(|j| {
                    let base = T::of_int(j as i64) * step.clone();
                    let step = step.clone();
                    unit.iter().map(move |u| base.clone() + u.clone() * step.clone())
                })
                .collect();
            let mut images = images;
            images.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            breakpoints[axis] = merge_sorted(&breakpoints[axis], &images);
        }
    }
    let lens: Vec<usize> = breakpoints.iter().map(|b| b.len()).collect();
    let total: usize = lens.iter().product();
    check_capacity::<T>(&ShapeVector::new(vec![(total as f64).log2().ceil() as u32]))?;
    let mut values = vec![T::zero(); total];
    let mut tables: Vec<AxisTable<T>> = breakpoints
        .iter()
        .map(|b| AxisTable { breakpoints: b, profile, cache: HashMap::new() })
        .collect();
    let mut strides = vec![1usize; d];
    for axis in (0..d.saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * lens[axis + 1];
    }
    for (rect, a) in terms {
        if a.is_zero() {
            continue;
        }
        let lists: Vec<Vec<(usize, T)>> =
            rect.sides().iter().zip(tables.iter_mut()).map(|(s, t)| t.support(s).to_vec()).collect();
        let a = T::from_rational(a);
        let mut stack: Vec<(usize, usize, T)> = vec![(0, 0, a)];
        while let Some((axis, flat, acc)) = stack.pop() {
            if axis == d {
                values[flat] = values[flat].clone() + acc;
                continue;
            }
            for (i, v) in &lists[axis] {
                stack.push((axis + 1, flat + i * strides[axis], acc.clone() * v.clone()));
            }
        }
    }
    TensorPLFunction::new(breakpoints, values)
}

/// `φ_{r⃗} = Σ_{R ∈ ℛ_{r⃗}} α(R) φ_R`.
pub fn smooth_rfunction<T: Scalar>(
    coeffs: &CoefficientField,
    shape: &ShapeVector,
    profile: &PiecewiseLinear<T>,
) -> Result<TensorPLFunction<T>> {
    let values = coeffs
        .shape_coeffs(shape)
        .ok_or_else(|| HyperHaarError::InvalidParams(format!("shape {shape} is not in the layer")))?;
    let terms: Vec<(DyadicRectangle, BigRational)> =
        values.iter().enumerate().map(|(i, a)| (shape.rect_at(i), a.clone())).collect();
    smooth_sum(&terms, coeffs.d(), profile)
}

/// `⟨φ_{r⃗}, f_{s⃗}⟩` by exact piecewise-polynomial integration, `f_{s⃗}` signed by `sgn α`.
pub fn smooth_pairing<T: Scalar>(
    coeffs: &CoefficientField,
    r: &ShapeVector,
    s: &ShapeVector,
    profile: &PiecewiseLinear<T>,
) -> Result<T> {
    let phi = smooth_rfunction(coeffs, r, profile)?;
    let resolution = ShapeVector::new(s.entries().iter().map(|&k| k + 1).collect());
    let f = rfunction_int(s, &coeffs.shape_signs(s)?, &resolution)?.lift::<T>()?;
    phi.integrate_grid(&f)
}

/// Smooth-variant certificate: `‖Σ α(R) φ_R‖_∞ ≥ ⟨Φ, Ψˢᵈ⟩ / ‖Ψˢᵈ‖₁`.
#[derive(Debug, Clone)]
pub struct SmoothCertificate<T> {
    pub c_phi: T,
    /// `c_φ^d`, the constant of the tensor pairing `⟨φ_R, h_R⟩ = c_φ^d |R|`.
    pub identity_constant: T,
    /// Coefficients were divided by `max |α|` first.
    pub rescaled: bool,
    /// `⟨φ_{r⃗}, f_{r⃗}⟩ = c_φ^d 2^{-n} Σ_{ℛ_{r⃗}} |α|` for every layer shape.
    pub pairings_match: bool,
    pub covered_mass: BigRational,
    pub full_mass: BigRational,
    /// `full_mass ≤ 4 · covered_mass` for the blocks finally used.
    pub coverage_ok: bool,
    /// Blocks actually used (after any re-partition).
    pub blocks: Vec<Vec<u32>>,
    pub pairing: T,
    pub l1: T,
    pub lower_bound: T,
    pub sup: T,
    pub bound_holds: bool,
}

fn coverage(coeffs: &CoefficientField, params: &RieszParams) -> BigRational {
    coeffs.mass_of(&params.covered_shapes())
}

/// Shifts every block by a common offset until `full ≤ 4 · covered`; separations are unchanged.
fn repartition(coeffs: &CoefficientField, params: &RieszParams) -> RieszParams {
    let full = coeffs.layer_mass();
    let four = BigRational::from_integer(4.into());
    if full <= &four * coverage(coeffs, params) {
        return params.clone();
    }
    let n = params.n as i64;
    let mut best = (coverage(coeffs, params), params.clone());
    for o in (1..=n).flat_map(|o| [-o, o]) {
        let blocks: Vec<Vec<u32>> = params
            .blocks
            .iter()
            .map(|b| b.iter().map(|&j| j as i64 + o).filter(|&j| (0..=n).contains(&j)).map(|j| j as u32).collect())
            .collect();
        if blocks.iter().any(|b: &Vec<u32>| b.is_empty()) {
            continue;
        }
        let mut candidate = params.clone();
        candidate.blocks = blocks;
        let covered = coverage(coeffs, &candidate);
        if full <= &four * &covered {
            return candidate;
        }
        if covered > best.0 {
            best = (covered, candidate);
        }
    }
    best.1
}

pub fn smooth_certificate<T: Scalar>(
    coeffs: &CoefficientField,
    params: &RieszParams,
    profile: &PiecewiseLinear<T>,
) -> Result<SmoothCertificate<T>> {
    let c_phi = profile_constant(profile)?;
    let identity_constant = c_phi.powu(params.d as u32);
    let rescaled = coeffs.max_abs() > BigRational::one();
    let coeffs = coeffs.normalized();
    let exact_or_close = |a: &T, b: &T| {
        if T::is_exact() {
            a == b
        } else {
            (a.to_f64() - b.to_f64()).abs() <= 1e-9 * (1.0 + b.to_f64().abs())
        }
    };
    let scale = identity_constant.clone() * T::pow2(-(params.n as i32));
    let mut pairings_match = true;
    for shape in coeffs.layer().keys() {
        let got = smooth_pairing(&coeffs, shape, shape, profile)?;
        let want = scale.clone() * T::from_rational(&coeffs.shape_mass(shape));
        pairings_match &= exact_or_close(&got, &want);
    }
    let params = repartition(&coeffs, params);
    let covered_mass = coverage(&coeffs, &params);
    let full_mass = coeffs.layer_mass();
    let coverage_ok = full_mass <= BigRational::from_integer(4.into()) * &covered_mass;

    let rho = params.rho_for::<T>()?;
    let engine = RieszEngine::new(&params, &coeffs)?;
    let sums = engine.sd_sums()?;
    let refs: Vec<&GridFunction<i32>> = sums.iter().collect();
    let sd = cellwise_from_ints(&refs, |v| {
        let mut acc = T::zero();
        let mut rk = T::one();
        for &x in v {
            rk = rk * rho.clone();
            acc = acc + rk.clone() * T::of_int(x);
        }
        acc
    })?;
    let l1 = sd.norm_lp_pow(1)?;
    if l1.is_zero() {
        return Err(HyperHaarError::CertificateUndefined("‖Ψˢᵈ‖₁ = 0".into()));
    }
    let phi = smooth_sum(&coeffs.nonzero(), coeffs.d(), profile)?;
    let pairing = phi.integrate_grid(&sd)?;
    let sup = phi.sup();
    let lower_bound = pairing.clone() / l1.clone();
    let bound_holds = if T::is_exact() {
        lower_bound <= sup
    } else {
        lower_bound.to_f64() <= sup.to_f64() * (1.0 + 1e-12) + 1e-12
    };
    Ok(SmoothCertificate {
        c_phi,
        identity_constant,
        rescaled,
        pairings_match,
        covered_mass,
        full_mass,
        coverage_ok,
        blocks: params.blocks.clone(),
        pairing,
        l1,
        lower_bound,
        sup,
        bound_holds,
    })
}
