use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::{enumerate_shapes, DyadicRectangle, ShapeVector};
use crate::error::{HyperHaarError, Result};
use crate::scalar::{parse_rational, rational_to_text};
use crate::smallball::signs::{shape_seed, SignSource};

/// Coefficients `α(R)`: a dense layer `|R| = 2^{-n}` stored per shape, and a
/// sparse coarse part `|R| > 2^{-n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    n: u32,
    d: usize,
    layer: BTreeMap<ShapeVector, Vec<BigRational>>,
    coarse: BTreeMap<DyadicRectangle, BigRational>,
}

impl CoefficientField {
    fn from_layer_fn(n: u32, d: usize, mut f: impl FnMut(&ShapeVector) -> Vec<BigRational>) -> Self {
        let layer = enumerate_shapes(n, d).into_iter().map(|r| {
            let v = f(&r);
            (r, v)
        });
        Self { n, d, layer: layer.collect(), coarse: BTreeMap::new() }
    }

    pub fn zeros(n: u32, d: usize) -> Self {
        Self::from_layer_fn(n, d, |r| vec![BigRational::zero(); r.rect_count()])
    }

    /// `α ≡ 1` on the layer.
    pub fn ones(n: u32, d: usize) -> Self {
        Self::from_layer_fn(n, d, |r| vec![BigRational::one(); r.rect_count()])
    }

    /// Uniform `±1` on the layer.
    pub fn random_signs(n: u32, d: usize, seed: u64) -> Self {
        Self::from_layer_fn(n, d, |r| {
            let mut rng = ChaCha8Rng::seed_from_u64(shape_seed(seed ^ 0x5eed, r));
            (0..r.rect_count())
                .map(|_| BigRational::from_integer(BigInt::from(if rng.gen::<bool>() { 1 } else { -1 })))
                .collect()
        })
    }

    /// Random rationals `p/q` with `|p| ≤ max_num`, `1 ≤ q ≤ max_den` on the layer.
    pub fn random_rational(n: u32, d: usize, seed: u64, max_num: i64, max_den: i64) -> Self {
        Self::from_layer_fn(n, d, |r| {
            let mut rng = ChaCha8Rng::seed_from_u64(shape_seed(seed ^ 0xa1fa, r));
            (0..r.rect_count())
                .map(|_| {
                    let p = rng.gen_range(-max_num..=max_num);
                    let q = rng.gen_range(1..=max_den);
                    BigRational::new(BigInt::from(p), BigInt::from(q))
                })
                .collect()
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn layer(&self) -> &BTreeMap<ShapeVector, Vec<BigRational>> {
        &self.layer
    }

    pub fn coarse(&self) -> &BTreeMap<DyadicRectangle, BigRational> {
        &self.coarse
    }

    pub fn shape_coeffs(&self, shape: &ShapeVector) -> Option<&[BigRational]> {
        self.layer.get(shape).map(|v| v.as_slice())
    }

    pub fn get(&self, rect: &DyadicRectangle) -> BigRational {
        let shape = rect.shape();
        if shape.length() == self.n {
            let i = shape.rect_index(rect).expect("shape matches");
            return self.layer.get(&shape).map_or_else(BigRational::zero, |v| v[i].clone());
        }
        self.coarse.get(rect).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn set(&mut self, rect: &DyadicRectangle, value: BigRational) -> Result<()> {
        if rect.dim() != self.d {
            return Err(HyperHaarError::DimensionMismatch { expected: self.d, got: rect.dim() });
        }
        let shape = rect.shape();
        let len = shape.length();
        if len == self.n {
            let i = shape.rect_index(rect).expect("shape matches");
            self.layer.get_mut(&shape).expect("all layer shapes present")[i] = value;
        } else if len < self.n {
            if value.is_zero() {
                self.coarse.remove(rect);
            } else {
                self.coarse.insert(rect.clone(), value);
            }
        } else {
            return Err(HyperHaarError::Domain(format!("rectangle {rect} is smaller than 2^-{}", self.n)));
        }
        Ok(())
    }

    /// `Σ_{R ∈ ℛ_{r⃗}} |α(R)|`.
    pub fn shape_mass(&self, shape: &ShapeVector) -> BigRational {
        self.layer
            .get(shape)
            .map(|v| v.iter().map(|a| a.abs()).sum())
            .unwrap_or_else(BigRational::zero)
    }

    /// `Σ_{|R| = 2^{-n}} |α(R)|`.
    pub fn layer_mass(&self) -> BigRational {
        self.layer.keys().map(|r| self.shape_mass(r)).sum()
    }

    /// `Σ_{|R| = 2^{-n}} α(R)²`.
    pub fn layer_square_mass(&self) -> BigRational {
        self.layer.values().flatten().map(|a| a * a).sum()
    }

    pub fn mass_of(&self, shapes: &[ShapeVector]) -> BigRational {
        shapes.iter().map(|r| self.shape_mass(r)).sum()
    }

    pub fn max_abs(&self) -> BigRational {
        self.layer
            .values()
            .flatten()
            .chain(self.coarse.values())
            .map(|a| a.abs())
            .fold(BigRational::zero(), |m, a| if a > m { a } else { m })
    }

    /// Divides by `max |α|` when it exceeds one.
    pub fn normalized(&self) -> Self {
        let m = self.max_abs();
        if m <= BigRational::one() {
            return self.clone();
        }
        Self {
            n: self.n,
            d: self.d,
            layer: self.layer.iter().map(|(r, v)| (r.clone(), v.iter().map(|a| a / &m).collect())).collect(),
            coarse: self.coarse.iter().map(|(r, a)| (r.clone(), a / &m)).collect(),
        }
    }

    /// All nonzero `(R, α(R))`, layer first then coarse, in a fixed order.
    pub fn nonzero(&self) -> Vec<(DyadicRectangle, BigRational)> {
        let mut out = Vec::new();
        for (shape, v) in &self.layer {
            for (i, a) in v.iter().enumerate() {
                if !a.is_zero() {
                    out.push((shape.rect_at(i), a.clone()));
                }
            }
        }
        out.extend(self.coarse.iter().map(|(r, a)| (r.clone(), a.clone())));
        out
    }

    /// CSV rows `k1:j1,…,kd:jd,value`; the rectangle occupies the first `d` fields.
    pub fn read_csv<R: Read>(reader: R, n: u32, d: usize) -> Result<Self> {
        let mut field = Self::zeros(n, d);
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
        for record in rdr.records() {
            let record = record?;
            if record.is_empty() || record.get(0).is_some_and(|s| s.starts_with('#')) {
                continue;
            }
            if record.len() != d + 1 {
                return Err(HyperHaarError::Parse(format!("expected {} fields, got {}", d + 1, record.len())));
            }
            let rect: DyadicRectangle = record.iter().take(d).collect::<Vec<_>>().join(",").parse()?;
            let value = parse_rational(&record[d])?;
            field.set(&rect, value)?;
        }
        Ok(field)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for (rect, a) in self.nonzero() {
            let mut row: Vec<String> = rect.sides().iter().map(|s| s.to_string()).collect();
            row.push(rational_to_text(&a));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `sgn α(R)` with `sgn 0 = +1`.
impl SignSource for CoefficientField {
    fn shape_signs(&self, shape: &ShapeVector) -> Result<Vec<i8>> {
        let v = self
            .layer
            .get(shape)
            .ok_or_else(|| HyperHaarError::MissingSign(format!("shape {shape}")))?;
        Ok(v.iter().map(|a| if a.is_negative() { -1 } else { 1 }).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn layer_masses() {
        let f = CoefficientField::ones(2, 2);
        assert_eq!(f.layer_mass(), ratio(12, 1));
        assert_eq!(f.nonzero().len(), 12);
        let g = CoefficientField::random_rational(3, 2, 1, 5, 4);
        assert_eq!(g, CoefficientField::random_rational(3, 2, 1, 5, 4));
    }

    #[test]
    fn csv_round_trip_with_coarse() {
        let mut f = CoefficientField::random_rational(2, 2, 3, 4, 3);
        f.set(&"0:0,1:1".parse().unwrap(), ratio(-2, 3)).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let g = CoefficientField::read_csv(buf.as_slice(), 2, 2).unwrap();
        assert_eq!(f, g);
        assert!(f.set(&"2:0,1:1".parse().unwrap(), ratio(1, 1)).is_err());
    }

    #[test]
    fn signs_follow_coefficients() {
        let mut f = CoefficientField::zeros(1, 1);
        f.set(&"1:1".parse().unwrap(), ratio(-1, 2)).unwrap();
        assert_eq!(f.shape_signs(&ShapeVector::new(vec![1])).unwrap(), vec![1, -1]);
    }

    #[test]
    fn normalization_caps_at_one() {
        let mut f = CoefficientField::zeros(1, 1);
        f.set(&"1:0".parse().unwrap(), ratio(4, 1)).unwrap();
        f.set(&"1:1".parse().unwrap(), ratio(-2, 1)).unwrap();
        let g = f.normalized();
        assert_eq!(g.get(&"1:1".parse().unwrap()), ratio(-1, 2));
        assert_eq!(g.max_abs(), ratio(1, 1));
    }
}
