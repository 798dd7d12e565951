use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::{DyadicRectangle, ShapeVector};
use crate::error::{HyperHaarError, Result};

/// Supplies the signs `ε_R` of an r-function, one per rectangle of a shape
/// in row-major position order.
pub trait SignSource: Sync {
    fn shape_signs(&self, shape: &ShapeVector) -> Result<Vec<i8>>;
}

/// Every sign `+1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AllPlus;

impl SignSource for AllPlus {
    fn shape_signs(&self, shape: &ShapeVector) -> Result<Vec<i8>> {
        Ok(vec![1; shape.rect_count()])
    }
}

/// Independent uniform signs, reproducible from a seed.
#[derive(Debug, Clone, Copy)]
pub struct RandomSigns {
    pub seed: u64,
}

/// Seed of the stream used for one shape.
pub(crate) fn shape_seed(seed: u64, shape: &ShapeVector) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for &r in shape.entries() {
        h = (h ^ r as u64).wrapping_mul(0x1000_0000_01b3).rotate_left(29);
    }
    h
}

impl SignSource for RandomSigns {
    fn shape_signs(&self, shape: &ShapeVector) -> Result<Vec<i8>> {
        let mut rng = ChaCha8Rng::seed_from_u64(shape_seed(self.seed, shape));
        Ok((0..shape.rect_count()).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
    }
}

/// Explicit signs per rectangle; every rectangle of a requested shape must be present.
#[derive(Debug, Clone, Default)]
pub struct SignMap(pub BTreeMap<DyadicRectangle, i8>);

impl SignSource for SignMap {
    fn shape_signs(&self, shape: &ShapeVector) -> Result<Vec<i8>> {
        (0..shape.rect_count())
            .map(|i| {
                let rect = shape.rect_at(i);
                match self.0.get(&rect) {
                    Some(&s) if s == 1 || s == -1 => Ok(s),
                    Some(_) => Err(HyperHaarError::InvalidParams(format!("sign of {rect} is not ±1"))),
                    None => Err(HyperHaarError::MissingSign(rect.to_string())),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_signs_are_reproducible() {
        let shape = ShapeVector::new(vec![2, 3]);
        let a = RandomSigns { seed: 7 }.shape_signs(&shape).unwrap();
        assert_eq!(a, RandomSigns { seed: 7 }.shape_signs(&shape).unwrap());
        assert_ne!(a, RandomSigns { seed: 8 }.shape_signs(&shape).unwrap());
        assert_eq!(a.len(), 32);
    }

    #[test]
    fn sign_map_reports_missing() {
        let shape = ShapeVector::new(vec![1]);
        let mut m = SignMap::default();
        m.0.insert(shape.rect_at(0), 1);
        assert!(matches!(m.shape_signs(&shape), Err(HyperHaarError::MissingSign(_))));
        m.0.insert(shape.rect_at(1), -1);
        assert_eq!(m.shape_signs(&shape).unwrap(), vec![1, -1]);
    }
}
