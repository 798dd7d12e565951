use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::dyadic::{enumerate_shapes, ShapeVector};
use crate::error::{HyperHaarError, Result};
use crate::field::{cellwise_from_ints, check_capacity, spectrum_index, synthesize_int, GridFunction, IntHaarSums};
use crate::scalar::Scalar;
use crate::smallball::coeffs::CoefficientField;
use crate::smallball::params::RieszParams;
use crate::smallball::riesz::RieszEngine;

/// `Σ α(R) h_R` as an integer grid `L · F` with the common denominator `L`.
///
/// Haar synthesis from `L∞`-normalized coefficients needs only sums and
/// differences, so integer coefficients give integer cells.
pub fn hyperbolic_sum_int(coeffs: &CoefficientField, include_coarse: bool) -> Result<(GridFunction<i64>, BigInt)> {
    let d = coeffs.d();
    let resolution = ShapeVector::new(vec![coeffs.n() + 1; d]);
    check_capacity::<i64>(&resolution)?;
    let terms: Vec<_> = coeffs
        .nonzero()
        .into_iter()
        .filter(|(r, _)| include_coarse || r.shape().length() == coeffs.n())
        .collect();
    let denom = terms.iter().fold(BigInt::one(), |l, (_, a)| l.lcm(a.denom()));
    let mut data = vec![0i64; resolution.rect_count()];
    for (rect, a) in &terms {
        let scaled = (a * BigRational::from_integer(denom.clone())).to_integer();
        let v = scaled.to_i64().ok_or(HyperHaarError::Capacity { bits: 64, limit: 63 })?;
        data[spectrum_index(&resolution, rect)?] += v;
    }
    synthesize_int(&mut data, &resolution);
    Ok((GridFunction::from_values(resolution, data)?, denom))
}

/// `Σ_{|R| ≥ 2^{-n}} α(R) h_R` (or only the layer `H_n`) on the grid of level `n + 1` per axis.
pub fn hyperbolic_sum<T: Scalar>(coeffs: &CoefficientField, include_coarse: bool) -> Result<GridFunction<T>> {
    let (grid, denom) = hyperbolic_sum_int(coeffs, include_coarse)?;
    check_capacity::<T>(grid.resolution())?;
    let l = T::from_rational(&BigRational::from_integer(denom));
    cellwise_from_ints(&[&grid], |v| T::of_int(v[0]) / l.clone())
}

/// Exact `‖Σ α(R) h_R‖_∞`.
pub fn hyperbolic_sup(coeffs: &CoefficientField, include_coarse: bool) -> Result<BigRational> {
    let (grid, denom) = hyperbolic_sum_int(coeffs, include_coarse)?;
    Ok(BigRational::new(BigInt::from(grid.max_abs()), denom))
}

/// `⟨Σ α(R) h_R, g⟩` for an integer grid `g`, exactly.
pub fn pairing_with_int<I: crate::scalar::IntCell>(
    coeffs: &CoefficientField,
    g: &GridFunction<I>,
    include_coarse: bool,
) -> Result<BigRational> {
    let sums = IntHaarSums::new(g);
    let mut acc = BigRational::zero();
    for (rect, a) in coeffs.nonzero() {
        if !include_coarse && rect.shape().length() != coeffs.n() {
            continue;
        }
        // R inside a single cell: g is constant there and h_R has mean zero.
        if rect.sides().iter().zip(g.resolution().entries()).any(|(s, &m)| s.level() >= m) {
            continue;
        }
        acc += a * BigRational::from_integer(BigInt::from(sums.get(&rect)?));
    }
    Ok(acc / BigRational::from_integer(BigInt::one() << g.resolution().length()))
}

/// Duality certificate built from `Ψˢᵈ` with `ε_R = sgn α(R)`.
#[derive(Debug, Clone)]
pub struct DualityCertificate<T> {
    /// `⟨F, Ψˢᵈ⟩` with `F` the full sum (layer and coarse part).
    pub pairing: T,
    /// `⟨H_n, Ψˢᵈ_k⟩` for `k = 1 … q`.
    pub pairing_by_order: Vec<T>,
    pub l1: T,
    pub lower_bound: T,
    /// `Σ |α(R)|` over shapes covered by blocks.
    pub covered_mass: BigRational,
    /// `Σ |α(R)|` over the whole layer.
    pub full_mass: BigRational,
    /// `ρ̃ 2^{-n} · covered_mass`.
    pub expected_first_order: T,
    pub first_order_matches: bool,
    pub higher_orders_vanish: bool,
}

fn close<T: Scalar>(a: &T, b: &T) -> bool {
    if T::is_exact() {
        a == b
    } else {
        (a.to_f64() - b.to_f64()).abs() <= 1e-9 * (1.0 + b.to_f64().abs())
    }
}

pub fn duality_certificate<T: Scalar>(coeffs: &CoefficientField, params: &RieszParams) -> Result<DualityCertificate<T>> {
    let rho = params.rho_for::<T>()?;
    params.fits::<T>()?;
    let engine = RieszEngine::new(params, coeffs)?;
    let sums = engine.sd_sums()?;
    let mut pairing_by_order = Vec::with_capacity(sums.len());
    let mut pairing = T::zero();
    let mut rho_k = T::one();
    for s in &sums {
        rho_k = rho_k * rho.clone();
        let layer = T::from_rational(&pairing_with_int(coeffs, s, false)?) * rho_k.clone();
        let full = T::from_rational(&pairing_with_int(coeffs, s, true)?) * rho_k.clone();
        pairing = pairing + full;
        pairing_by_order.push(layer);
    }
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
    let covered_mass = coeffs.mass_of(&params.covered_shapes());
    let full_mass = coeffs.layer_mass();
    let expected_first_order = rho.clone() * T::from_rational(&covered_mass) * T::pow2(-(params.n as i32));
    let first_order_matches = pairing_by_order.first().is_some_and(|p| close(p, &expected_first_order));
    let higher_orders_vanish = pairing_by_order.iter().skip(1).all(|p| close(p, &T::zero()));
    Ok(DualityCertificate {
        lower_bound: pairing.clone() / l1.clone(),
        pairing,
        pairing_by_order,
        l1,
        covered_mass,
        full_mass,
        expected_first_order,
        first_order_matches,
        higher_orders_vanish,
    })
}

/// The four lower-bound forms compared by [`verify_inequality`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InequalityForm {
    /// Exponent `(d−1)/2`; the only asserted form.
    Average,
    /// Exponent `(d−2)/2`.
    Conjecture,
    /// Exponent `(d−1)/2 − η` with `η = ε/4`.
    Main,
    /// Exponent `0` (dimension two).
    TalagrandD2,
}

impl InequalityForm {
    pub const ALL: [InequalityForm; 4] =
        [InequalityForm::Average, InequalityForm::Conjecture, InequalityForm::Main, InequalityForm::TalagrandD2];

    pub fn as_str(self) -> &'static str {
        match self {
            InequalityForm::Average => "average",
            InequalityForm::Conjecture => "conjecture",
            InequalityForm::Main => "main",
            InequalityForm::TalagrandD2 => "talagrand_d2",
        }
    }

    pub fn exponent(self, d: usize, eps: f64) -> f64 {
        let d = d as f64;
        match self {
            InequalityForm::Average => (d - 1.0) / 2.0,
            InequalityForm::Conjecture => (d - 2.0) / 2.0,
            InequalityForm::Main => (d - 1.0) / 2.0 - eps / 4.0,
            InequalityForm::TalagrandD2 => 0.0,
        }
    }
}

/// One inequality check: `lhs = 2^{-n} Σ_{|R|=2^{-n}} |α(R)|`, `rhs = n^{exponent} ‖F‖_∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityRecord {
    pub form: InequalityForm,
    pub lhs: BigRational,
    pub norm_inf: BigRational,
    pub exponent: f64,
    pub rhs: f64,
    /// `rhs / lhs`; infinite when `lhs = 0`.
    pub ratio: f64,
    /// Only decided for the average form: `lhs ≤ √#ℍ_n · ‖F‖_∞`, checked exactly.
    pub holds: Option<bool>,
}

pub fn verify_inequality(coeffs: &CoefficientField, form: InequalityForm, eps: f64) -> Result<InequalityRecord> {
    let norm_inf = hyperbolic_sup(coeffs, true)?;
    Ok(inequality_record(coeffs, form, eps, norm_inf))
}

/// All four forms sharing one sup-norm computation.
pub fn verify_all(coeffs: &CoefficientField, eps: f64) -> Result<Vec<InequalityRecord>> {
    let norm_inf = hyperbolic_sup(coeffs, true)?;
    Ok(InequalityForm::ALL.iter().map(|&f| inequality_record(coeffs, f, eps, norm_inf.clone())).collect())
}

fn inequality_record(coeffs: &CoefficientField, form: InequalityForm, eps: f64, norm_inf: BigRational) -> InequalityRecord {
    let n = coeffs.n();
    let lhs = coeffs.layer_mass() / BigRational::from_integer(BigInt::one() << n);
    let exponent = form.exponent(coeffs.d(), eps);
    let rhs = (n as f64).powf(exponent) * Scalar::to_f64(&norm_inf);
    let lhs_f = Scalar::to_f64(&lhs);
    let ratio = if lhs.is_zero() { f64::INFINITY } else { rhs / lhs_f };
    let holds = (form == InequalityForm::Average).then(|| {
        let shapes = BigRational::from_integer(BigInt::from(enumerate_shapes(n, coeffs.d()).len()));
        &lhs * &lhs <= shapes * &norm_inf * &norm_inf
    });
    InequalityRecord { form, lhs, norm_inf, exponent, rhs, ratio, holds }
}

/// `‖F‖_∞ / (2^{-n} Σ|α|)` minimized over all `±1` patterns on the layer (coarse part zero).
pub fn exhaustive_min_ratio(n: u32, d: usize) -> Result<(BigRational, BigRational)> {
    let base = CoefficientField::ones(n, d);
    let rects: Vec<_> = base.nonzero().into_iter().map(|(r, _)| r).collect();
    if rects.len() > 24 {
        return Err(HyperHaarError::Budget(format!("{} layer rectangles", rects.len())));
    }
    let mut best_sup: Option<BigRational> = None;
    let mut field = base;
    for mask in 0u32..1 << rects.len() {
        for (i, r) in rects.iter().enumerate() {
            let s = if mask >> i & 1 == 1 { -1 } else { 1 };
            field.set(r, BigRational::from_integer(BigInt::from(s)))?;
        }
        let sup = hyperbolic_sup(&field, false)?;
        if best_sup.as_ref().is_none_or(|b| sup < *b) {
            best_sup = Some(sup);
        }
    }
    let sup = best_sup.expect("at least one pattern");
    let lhs = BigRational::from_integer(BigInt::from(rects.len())) / BigRational::from_integer(BigInt::one() << n);
    Ok((sup.clone() / lhs, sup))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use crate::smallball::params::BlockMode;

    type Q = BigRational;

    #[test]
    fn single_coefficient_sum() {
        let mut f = CoefficientField::zeros(2, 2);
        f.set(&"1:0,1:1".parse().unwrap(), ratio(1, 1)).unwrap();
        assert_eq!(hyperbolic_sup(&f, true).unwrap(), ratio(1, 1));
        let rec = verify_inequality(&f, InequalityForm::Average, 0.25).unwrap();
        assert_eq!(rec.lhs, ratio(1, 4));
        assert_eq!(rec.holds, Some(true));
    }

    #[test]
    fn one_dimensional_layer_has_sup_one() {
        let f = CoefficientField::ones(3, 1);
        assert_eq!(hyperbolic_sup(&f, true).unwrap(), ratio(1, 1));
    }

    #[test]
    fn int_and_spectrum_sums_agree() {
        let f = CoefficientField::random_rational(2, 2, 4, 5, 6);
        let g: GridFunction<Q> = hyperbolic_sum(&f, true).unwrap();
        let s = g.haar_analyze();
        for (rect, a) in f.nonzero() {
            assert_eq!(*s.coeff(&rect).unwrap(), a);
        }
    }

    #[test]
    fn all_ones_pairs_to_one_with_each_rfunction() {
        let f = CoefficientField::ones(3, 2);
        let p = RieszParams::new(3, 2, Some(1), BlockMode::Partition).unwrap();
        let engine = RieszEngine::new(&p, &f).unwrap();
        for shape in engine.block_shapes(1).to_vec() {
            let g = engine.rfunction(&shape).unwrap();
            assert_eq!(pairing_with_int(&f, &g, false).unwrap(), ratio(1, 1));
        }
    }

    #[test]
    fn certificate_identities_and_bound() {
        let f = CoefficientField::random_rational(4, 3, 11, 7, 5);
        let p = RieszParams::new(4, 3, Some(2), BlockMode::Partition).unwrap().with_surrogate(ratio(1, 3));
        let c = duality_certificate::<Q>(&f, &p).unwrap();
        assert!(c.first_order_matches && c.higher_orders_vanish);
        assert!(c.lower_bound <= hyperbolic_sup(&f, true).unwrap());
    }
}
