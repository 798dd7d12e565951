use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::discrepancy::points::PointSet;
use crate::dyadic::{enumerate_shapes, DyadicInterval, DyadicRectangle};
use crate::error::{HyperHaarError, Result};
use crate::smallball::CoefficientField;

/// `D_N(x) = #(A ∩ [0, x)) − N |[0, x)|`, counting `p < x` strictly in every coordinate.
pub fn d_eval(set: &PointSet, x: &[BigRational]) -> Result<BigRational> {
    if x.len() != set.d() {
        return Err(HyperHaarError::DimensionMismatch { expected: set.d(), got: x.len() });
    }
    if x.iter().any(|v| *v < BigRational::zero() || *v > BigRational::one()) {
        return Err(HyperHaarError::Domain("x must lie in [0,1]^d".into()));
    }
    let count = set.points().iter().filter(|p| p.iter().zip(x).all(|(a, b)| a < b)).count();
    let volume: BigRational = x.iter().product();
    Ok(BigRational::from_integer(count.into()) - BigRational::from_integer(set.len().into()) * volume)
}

/// `c(a, I) = ⟨1_{(a,1]}, h_I⟩ = −∫_{I ∩ [0,a]} h_I`: a tent on `I`, zero outside.
pub fn counting_factor(a: &BigRational, side: &DyadicInterval) -> BigRational {
    let start = side.start::<BigRational>();
    let end = side.end::<BigRational>();
    if *a <= start || *a >= end {
        return BigRational::zero();
    }
    let left = a - &start;
    let right = &end - a;
    left.min(right)
}

/// `∫_I x h_I(x) dx = |I|² / 4`.
pub fn linear_factor(side: &DyadicInterval) -> BigRational {
    let len = side.length::<BigRational>();
    &len * &len / BigRational::from_integer(4.into())
}

/// `⟨D_N, h_R⟩ = Σ_p Π_t c(p_t, R_t) − N Π_t |R_t|² / 4`.
pub fn haar_coeff_d(set: &PointSet, rect: &DyadicRectangle) -> Result<BigRational> {
    if rect.dim() != set.d() {
        return Err(HyperHaarError::DimensionMismatch { expected: set.d(), got: rect.dim() });
    }
    let counting: BigRational = set
        .points()
        .iter()
        .map(|p| p.iter().zip(rect.sides()).map(|(a, s)| counting_factor(a, s)).product::<BigRational>())
        .sum();
    let linear: BigRational = rect.sides().iter().map(linear_factor).product();
    Ok(counting - BigRational::from_integer(set.len().into()) * linear)
}

/// All `⟨D_N, h_R⟩` with `|R| = 2^{-n}`, as a coefficient field on that layer.
///
/// A point only meets one rectangle per shape, so each shape costs `O(N)`.
pub fn layer_coefficients(set: &PointSet, n: u32) -> Result<CoefficientField> {
    let d = set.d();
    let mut field = CoefficientField::zeros(n, d);
    let scale = BigRational::from_integer(BigInt::one() << n);
    let cells: Vec<Vec<u64>> = set
        .points()
        .iter()
        .map(|p| p.iter().map(|x| (x * &scale).floor().to_integer().to_u64().expect("coordinate in [0,1)")).collect())
        .collect();
    for shape in enumerate_shapes(n, d) {
        let linear: BigRational = shape
            .entries()
            .iter()
            .map(|&r| linear_factor(&DyadicInterval::new(r, 0).expect("valid level")))
            .product::<BigRational>()
            * BigRational::from_integer(set.len().into());
        let mut values = vec![-linear; shape.rect_count()];
        for (p, c) in set.points().iter().zip(&cells) {
            let sides: Vec<DyadicInterval> = shape
                .entries()
                .iter()
                .zip(c)
                .map(|(&r, &j)| DyadicInterval::new(r, j >> (n - r)))
                .collect::<Result<_>>()?;
            let rect = DyadicRectangle::new(sides.clone());
            let term: BigRational = p.iter().zip(&sides).map(|(a, s)| counting_factor(a, s)).product();
            if !term.is_zero() {
                values[shape.rect_index(&rect).expect("rectangle of this shape")] += term;
            }
        }
        for (i, v) in values.into_iter().enumerate() {
            field.set(&shape.rect_at(i), v)?;
        }
    }
    Ok(field)
}

/// The scale `n` with `2N ≤ 2^n < 4N`.
pub fn scale_for(n_points: usize) -> u32 {
    let mut n = 0u32;
    while (1usize << n) < 2 * n_points {
        n += 1;
    }
    n
}

/// Roth's bound: `(Σ_{|R| = 2^{-n}} ⟨D_N, h_R⟩² / |R|)^{1/2} ≤ ‖D_N‖₂` by Bessel.
#[derive(Debug, Clone, PartialEq)]
pub struct RothBound {
    pub n: u32,
    /// The exact sum under the square root.
    pub sum_sq: BigRational,
    pub value: f64,
}

pub fn roth_l2_lower(set: &PointSet, n: u32) -> Result<RothBound> {
    if (1u128 << n) < 2 * set.len() as u128 {
        return Err(HyperHaarError::InvalidParams(format!("need 2N ≤ 2^n, got N = {} and n = {n}", set.len())));
    }
    let field = layer_coefficients(set, n)?;
    let inv_volume = BigRational::from_integer(BigInt::one() << n);
    let sum_sq = field.layer_square_mass() * inv_volume;
    let value = sum_sq.to_f64().unwrap_or(f64::NAN).sqrt();
    Ok(RothBound { n, sum_sq, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::points::{generate, PointKind};
    use crate::scalar::ratio;

    fn single(x: i64, y: i64, den: i64) -> PointSet {
        PointSet::new(2, vec![vec![ratio(x, den), ratio(y, den)]], PointKind::File).unwrap()
    }

    #[test]
    fn d_eval_examples() {
        assert_eq!(d_eval(&single(0, 0, 1), &[ratio(1, 1), ratio(1, 1)]).unwrap(), ratio(0, 1));
        assert_eq!(d_eval(&single(1, 1, 2), &[ratio(1, 2), ratio(1, 2)]).unwrap(), ratio(-1, 4));
        assert!(d_eval(&single(0, 0, 1), &[ratio(3, 2), ratio(0, 1)]).is_err());
    }

    #[test]
    fn factor_examples() {
        let unit = DyadicInterval::unit();
        assert_eq!(linear_factor(&unit), ratio(1, 4));
        assert_eq!(counting_factor(&ratio(0, 1), &unit), ratio(0, 1));
        assert_eq!(counting_factor(&ratio(1, 2), &unit), ratio(1, 2));
        assert_eq!(counting_factor(&ratio(3, 4), &unit), ratio(1, 4));
    }

    #[test]
    fn roth_for_one_point_at_the_origin() {
        // D(x) = 1 − x y off the axes, so ⟨D, h_R⟩ = −Π_t |R_t|² / 4 = −1/64 at |R| = 1/2,
        // and 4 rectangles give 4 · (1/64)² · 2 = 1/512.
        let r = roth_l2_lower(&single(0, 0, 1), 1).unwrap();
        assert_eq!(r.sum_sq, ratio(1, 512));
        assert!(roth_l2_lower(&single(0, 0, 1), 0).is_err());
    }

    #[test]
    fn layer_coefficients_match_direct_formula() {
        let set = generate(PointKind::Random, 13, 2, 3).unwrap();
        let field = layer_coefficients(&set, 5).unwrap();
        for (rect, a) in field.nonzero() {
            assert_eq!(haar_coeff_d(&set, &rect).unwrap(), a);
        }
        assert_eq!(scale_for(13), 5);
        assert_eq!(scale_for(16), 5);
        assert_eq!(scale_for(1), 1);
    }
}
