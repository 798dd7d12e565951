//! Dyadic intervals and rectangles in the unit cube, shape vectors, Haar
//! evaluation and the product rule for Haar tensors.

use std::fmt;
use std::str::FromStr;

use crate::error::{HyperHaarError, Result};
use crate::scalar::Scalar;

/// Levels above this are rejected so positions always fit in a `u64`.
pub const MAX_LEVEL: u32 = 62;

/// `[pos·2^-level, (pos+1)·2^-level)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    level: u32,
    pos: u64,
}

impl DyadicInterval {
    pub fn new(level: u32, pos: u64) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(HyperHaarError::Domain(format!("level {level} exceeds {MAX_LEVEL}")));
        }
        if pos >> level != 0 {
            return Err(HyperHaarError::Domain(format!(
                "position {pos} out of range for level {level}"
            )));
        }
        Ok(Self { level, pos })
    }

    pub const fn unit() -> Self {
        Self { level: 0, pos: 0 }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn pos(&self) -> u64 {
        self.pos
    }

    pub fn halves(&self) -> (Self, Self) {
        let level = self.level + 1;
        (
            Self { level, pos: 2 * self.pos },
            Self { level, pos: 2 * self.pos + 1 },
        )
    }

    pub fn parent(&self) -> Option<Self> {
        (self.level > 0).then(|| Self { level: self.level - 1, pos: self.pos >> 1 })
    }

    /// The ancestor (or self) at a coarser `level`.
    pub fn ancestor(&self, level: u32) -> Option<Self> {
        (level <= self.level).then(|| Self { level, pos: self.pos >> (self.level - level) })
    }

    /// `other ⊆ self`.
    pub fn contains_interval(&self, other: &Self) -> bool {
        other.ancestor(self.level) == Some(*self)
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.contains_interval(other) || other.contains_interval(self)
    }

    pub fn length<T: Scalar>(&self) -> T {
        T::pow2(-(self.level as i32))
    }

    pub fn start<T: Scalar>(&self) -> T {
        T::of_int(self.pos as i64) * self.length::<T>()
    }

    pub fn end<T: Scalar>(&self) -> T {
        T::of_int(self.pos as i64 + 1) * self.length::<T>()
    }

    /// Position of the level-`self.level + 1` cell containing `x` relative to this
    /// interval: `None` outside, `Some(false)` left half, `Some(true)` right half.
    fn locate<T: Scalar>(&self, x: &T) -> Option<bool> {
        let scaled = x.clone() * T::pow2(self.level as i32 + 1);
        let cell = scaled.floor_i64();
        if cell >> 1 != self.pos as i64 {
            return None;
        }
        Some(cell & 1 == 1)
    }

    /// Sign of `h_I` on a strictly smaller interval `inner ⊂ self`.
    pub fn haar_sign_on(&self, inner: &Self) -> i8 {
        debug_assert!(inner.level > self.level && self.contains_interval(inner));
        let half = inner.pos >> (inner.level - self.level - 1) & 1;
        if half == 1 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.pos)
    }
}

impl FromStr for DyadicInterval {
    type Err = HyperHaarError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || HyperHaarError::Parse(format!("bad dyadic interval {s:?}"));
        let (k, j) = s.trim().split_once(':').ok_or_else(bad)?;
        let level = k.trim().parse().map_err(|_| bad())?;
        let pos = j.trim().parse().map_err(|_| bad())?;
        Self::new(level, pos)
    }
}

fn check_unit<T: Scalar>(x: &T) -> Result<()> {
    if *x < T::zero() || *x >= T::one() {
        return Err(HyperHaarError::Domain(format!("coordinate {x:?} outside [0,1)")));
    }
    Ok(())
}

/// `h_I(x)`: −1 on the left half, +1 on the right half, 0 off `I`.
pub fn haar_eval<T: Scalar>(interval: &DyadicInterval, x: &T) -> Result<i8> {
    check_unit(x)?;
    Ok(match interval.locate(x) {
        None => 0,
        Some(false) => -1,
        Some(true) => 1,
    })
}

/// A product of dyadic intervals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicRectangle {
    sides: Vec<DyadicInterval>,
}

impl DyadicRectangle {
    pub fn new(sides: Vec<DyadicInterval>) -> Self {
        Self { sides }
    }

    pub fn unit_cube(d: usize) -> Self {
        Self { sides: vec![DyadicInterval::unit(); d] }
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[DyadicInterval] {
        &self.sides
    }

    pub fn side(&self, axis: usize) -> &DyadicInterval {
        &self.sides[axis]
    }

    pub fn shape(&self) -> ShapeVector {
        ShapeVector::new(self.sides.iter().map(|s| s.level).collect())
    }

    pub fn volume<T: Scalar>(&self) -> T {
        T::pow2(-(self.shape().length() as i32))
    }

    pub fn contains_rect(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self.sides.iter().zip(&other.sides).all(|(a, b)| a.contains_interval(b))
    }
}

impl fmt::Display for DyadicRectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, side) in self.sides.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{side}")?;
        }
        Ok(())
    }
}

impl FromStr for DyadicRectangle {
    type Err = HyperHaarError;

    fn from_str(s: &str) -> Result<Self> {
        let sides = s
            .split(',')
            .map(DyadicInterval::from_str)
            .collect::<Result<Vec<_>>>()?;
        if sides.is_empty() {
            return Err(HyperHaarError::Parse("empty rectangle".into()));
        }
        Ok(Self { sides })
    }
}

/// `h_R(x) = Π_t h_{R_t}(x_t)`.
pub fn haar_tensor_eval<T: Scalar>(rect: &DyadicRectangle, x: &[T]) -> Result<i8> {
    if x.len() != rect.dim() {
        return Err(HyperHaarError::DimensionMismatch { expected: rect.dim(), got: x.len() });
    }
    let mut value = 1i8;
    for (side, xt) in rect.sides.iter().zip(x) {
        value *= haar_eval(side, xt)?;
    }
    Ok(value)
}

/// Vector of side-length exponents `r⃗ ∈ ℕ^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShapeVector(Vec<u32>);

impl ShapeVector {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|r⃗| = Σ r_t`.
    pub fn length(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, axis: usize) -> u32 {
        self.0[axis]
    }

    /// Number of rectangles of this shape, `2^{|r⃗|}`.
    pub fn rect_count(&self) -> usize {
        1usize << self.length()
    }

    /// Row-major (first axis most significant) index of the rectangle with these positions.
    pub fn rect_index(&self, rect: &DyadicRectangle) -> Option<usize> {
        if rect.shape() != *self {
            return None;
        }
        let mut index = 0usize;
        for (side, &level) in rect.sides.iter().zip(&self.0) {
            index = (index << level) | side.pos as usize;
        }
        Some(index)
    }

    pub fn rect_at(&self, mut index: usize) -> DyadicRectangle {
        let mut sides = vec![DyadicInterval::unit(); self.dim()];
        for (axis, &level) in self.0.iter().enumerate().rev() {
            let pos = index & ((1usize << level) - 1);
            index >>= level;
            sides[axis] = DyadicInterval { level, pos: pos as u64 };
        }
        DyadicRectangle { sides }
    }

    /// Coordinatewise maximum.
    pub fn join(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }
}

impl fmt::Display for ShapeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str(")")
    }
}

/// All `r⃗ ∈ ℕ^d` with `|r⃗| = n`, in lexicographic order.
pub fn enumerate_shapes(n: u32, d: usize) -> Vec<ShapeVector> {
    fn rec(remaining: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<ShapeVector>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(ShapeVector(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in 0..=remaining {
            prefix.push(first);
            rec(remaining - first, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    rec(n, d, &mut Vec::with_capacity(d), &mut out);
    out
}

/// `ℛ_{r⃗}`: all `2^{|r⃗|}` rectangles of shape `r⃗`, in row-major position order.
pub fn rectangles_of_shape(shape: &ShapeVector) -> Vec<DyadicRectangle> {
    (0..shape.rect_count()).map(|i| shape.rect_at(i)).collect()
}

/// True iff in every coordinate the entries across the sequence are pairwise distinct.
pub fn strongly_distinct(vecs: &[ShapeVector]) -> bool {
    let Some(first) = vecs.first() else {
        return true;
    };
    let d = first.dim();
    if vecs.iter().any(|v| v.dim() != d) {
        return false;
    }
    (0..d).all(|t| {
        vecs.iter()
            .enumerate()
            .all(|(i, a)| vecs[i + 1..].iter().all(|b| a.0[t] != b.0[t]))
    })
}

/// Result of multiplying Haar tensors with pairwise distinct sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HaarProduct {
    /// The product equals `sign · h_rect` everywhere.
    Signed { sign: i8, rect: DyadicRectangle },
    /// Some pair of sides is disjoint, so the product vanishes identically.
    DisjointSupport,
}

/// The product rule: `Π_j h_{R_j} = ε h_S` with `S = ∩ R_j`, provided no two
/// rectangles share a side in any coordinate.
pub fn multiply_haars(rects: &[DyadicRectangle]) -> Result<HaarProduct> {
    let Some(first) = rects.first() else {
        return Err(HyperHaarError::Domain("empty product".into()));
    };
    let d = first.dim();
    if let Some(bad) = rects.iter().find(|r| r.dim() != d) {
        return Err(HyperHaarError::DimensionMismatch { expected: d, got: bad.dim() });
    }
    for axis in 0..d {
        for i in 0..rects.len() {
            for j in i + 1..rects.len() {
                if rects[i].sides[axis] == rects[j].sides[axis] {
                    return Err(HyperHaarError::Coincidence { first: i, second: j, axis });
                }
            }
        }
    }
    let mut sign = 1i8;
    let mut sides = Vec::with_capacity(d);
    for axis in 0..d {
        let column: Vec<&DyadicInterval> = rects.iter().map(|r| &r.sides[axis]).collect();
        let finest = **column.iter().max_by_key(|s| s.level).expect("nonempty");
        for side in &column {
            if !side.contains_interval(&finest) {
                return Ok(HaarProduct::DisjointSupport);
            }
            if **side != finest {
                sign *= side.haar_sign_on(&finest);
            }
        }
        sides.push(finest);
    }
    Ok(HaarProduct::Signed { sign, rect: DyadicRectangle::new(sides) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    fn iv(level: u32, pos: u64) -> DyadicInterval {
        DyadicInterval::new(level, pos).unwrap()
    }

    fn rect(text: &str) -> DyadicRectangle {
        text.parse().unwrap()
    }

    #[test]
    fn haar_eval_examples() {
        let unit = DyadicInterval::unit();
        assert_eq!(haar_eval(&unit, &ratio(1, 4)).unwrap(), -1);
        assert_eq!(haar_eval(&unit, &ratio(3, 4)).unwrap(), 1);
        assert_eq!(haar_eval(&iv(1, 0), &ratio(3, 4)).unwrap(), 0);
        assert_eq!(haar_eval(&unit, &0.5f64).unwrap(), 1);
        assert!(haar_eval(&unit, &ratio(1, 1)).is_err());
        assert!(haar_eval(&unit, &ratio(-1, 8)).is_err());
    }

    #[test]
    fn tensor_eval_examples() {
        let q = |a, b| ratio(a, b);
        let cube = DyadicRectangle::unit_cube(2);
        assert_eq!(haar_tensor_eval(&cube, &[q(1, 4), q(1, 4)]).unwrap(), 1);
        assert_eq!(haar_tensor_eval(&cube, &[q(1, 4), q(3, 4)]).unwrap(), -1);
        assert_eq!(haar_tensor_eval(&rect("1:0,0:0"), &[q(3, 4), q(1, 4)]).unwrap(), 0);
        assert!(matches!(
            haar_tensor_eval(&cube, &[q(1, 4)]),
            Err(HyperHaarError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn interval_invariants() {
        assert!(DyadicInterval::new(2, 4).is_err());
        let i = iv(3, 5);
        let (l, r) = i.halves();
        assert_eq!((l.level(), l.pos(), r.pos()), (4, 10, 11));
        assert_eq!(l.start::<BigRational>(), i.start::<BigRational>());
        assert_eq!(r.end::<BigRational>(), i.end::<BigRational>());
        assert_eq!(l.parent(), Some(i));
        assert!(i.contains_interval(&r));
        assert!(!l.intersects(&r));
    }

    #[test]
    fn shapes_are_stars_and_bars() {
        let s = enumerate_shapes(2, 2);
        let entries: Vec<_> = s.iter().map(|v| v.entries().to_vec()).collect();
        assert_eq!(entries, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(enumerate_shapes(0, 3), vec![ShapeVector::new(vec![0, 0, 0])]);
        assert_eq!(enumerate_shapes(3, 3).len(), 10);
        assert_eq!(enumerate_shapes(6, 4).len(), 84);
        assert!(enumerate_shapes(5, 3).iter().all(|r| r.length() == 5));
    }

    #[test]
    fn rectangles_tile_their_shape() {
        let shape = ShapeVector::new(vec![1, 1]);
        let rects = rectangles_of_shape(&shape);
        assert_eq!(rects.len(), 4);
        assert_eq!(rectangles_of_shape(&ShapeVector::new(vec![0, 0, 0])).len(), 1);
        assert_eq!(rectangles_of_shape(&ShapeVector::new(vec![2, 0])).len(), 4);
        for (i, r) in rects.iter().enumerate() {
            assert_eq!(shape.rect_index(r), Some(i));
            assert_eq!(r.volume::<BigRational>(), ratio(1, 4));
        }
        let total: BigRational = rects.iter().map(|r| r.volume::<BigRational>()).sum();
        assert_eq!(total, ratio(1, 1));
    }

    #[test]
    fn strong_distinctness_examples() {
        let s = |v: &[u32]| ShapeVector::new(v.to_vec());
        assert!(strongly_distinct(&[s(&[1, 2]), s(&[2, 1])]));
        assert!(!strongly_distinct(&[s(&[1, 2]), s(&[1, 3])]));
        assert!(strongly_distinct(&[s(&[0, 1, 2]), s(&[1, 2, 0]), s(&[2, 0, 1])]));
    }

    #[test]
    fn product_rule_examples() {
        let p = multiply_haars(&[rect("0:0"), rect("1:0")]).unwrap();
        assert_eq!(p, HaarProduct::Signed { sign: -1, rect: rect("1:0") });
        let p = multiply_haars(&[rect("0:0,1:0"), rect("1:0,0:0")]).unwrap();
        assert_eq!(p, HaarProduct::Signed { sign: 1, rect: rect("1:0,1:0") });
        assert!(matches!(
            multiply_haars(&[rect("1:0,0:0"), rect("1:0,1:1")]),
            Err(HyperHaarError::Coincidence { axis: 0, .. })
        ));
        assert_eq!(
            multiply_haars(&[rect("1:0"), rect("2:3")]).unwrap(),
            HaarProduct::DisjointSupport
        );
    }

    #[test]
    fn rectangle_text_round_trip() {
        let r = rect("3:5,0:0,2:1");
        assert_eq!(r.to_string(), "3:5,0:0,2:1");
        assert!("3:8".parse::<DyadicRectangle>().is_err());
        assert!("x".parse::<DyadicRectangle>().is_err());
    }
}
