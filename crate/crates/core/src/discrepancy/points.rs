use std::io::{Read, Write};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HyperHaarError, Result};
use crate::scalar::{parse_rational, rational_to_text};

/// How a point set was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    VanDerCorput,
    Hammersley,
    Random,
    Grid,
    File,
}

impl PointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PointKind::VanDerCorput => "van_der_corput",
            PointKind::Hammersley => "hammersley",
            PointKind::Random => "random",
            PointKind::Grid => "grid",
            PointKind::File => "file",
        }
    }
}

impl FromStr for PointKind {
    type Err = HyperHaarError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "van_der_corput" | "vdc" => Ok(PointKind::VanDerCorput),
            "hammersley" => Ok(PointKind::Hammersley),
            "random" => Ok(PointKind::Random),
            "grid" => Ok(PointKind::Grid),
            "file" => Ok(PointKind::File),
            other => Err(HyperHaarError::Parse(format!("unknown point set kind {other:?}"))),
        }
    }
}

/// `N ≥ 1` points of `[0,1)^d` with exact rational coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    d: usize,
    points: Vec<Vec<BigRational>>,
    kind: PointKind,
}

impl PointSet {
    pub fn new(d: usize, points: Vec<Vec<BigRational>>, kind: PointKind) -> Result<Self> {
        if d == 0 || points.is_empty() {
            return Err(HyperHaarError::InvalidParams("need d ≥ 1 and at least one point".into()));
        }
        for p in &points {
            if p.len() != d {
                return Err(HyperHaarError::DimensionMismatch { expected: d, got: p.len() });
            }
            if p.iter().any(|x| x.is_negative() || *x >= BigRational::one()) {
                return Err(HyperHaarError::Domain("coordinates must lie in [0,1)".into()));
            }
        }
        Ok(Self { d, points, kind })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<BigRational>] {
        &self.points
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    /// CSV rows `x1,…,xd`; fractions `p/q` or decimals.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        for record in rdr.records() {
            let record = record?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            points.push(record.iter().map(parse_rational).collect::<Result<Vec<_>>>()?);
        }
        let d = points.first().map_or(0, |p: &Vec<BigRational>| p.len());
        Self::new(d, points, PointKind::File)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for p in &self.points {
            w.write_record(p.iter().map(rational_to_text))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Radical inverse of `i` in base `b`: digits of `i` mirrored about the radix point.
pub fn radical_inverse(mut i: u64, base: u64) -> BigRational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    while i > 0 {
        num = num * base + i % base;
        den *= base;
        i /= base;
    }
    BigRational::new(num, den)
}

fn first_primes(k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    let mut c = 2u64;
    while out.len() < k {
        if out.iter().all(|p| !c.is_multiple_of(*p)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

const RANDOM_BITS: u32 = 30;

/// Deterministic point sets for tests and experiments.
pub fn generate(kind: PointKind, n_points: usize, d: usize, seed: u64) -> Result<PointSet> {
    if n_points == 0 || d == 0 {
        return Err(HyperHaarError::InvalidParams("need N ≥ 1 and d ≥ 1".into()));
    }
    let frac = |i: usize, n: usize| BigRational::new(BigInt::from(i), BigInt::from(n));
    let points = match kind {
        PointKind::VanDerCorput => {
            if d != 2 {
                return Err(HyperHaarError::InvalidParams("van der Corput sets are two-dimensional".into()));
            }
            (0..n_points).map(|i| vec![frac(i, n_points), radical_inverse(i as u64, 2)]).collect()
        }
        PointKind::Hammersley => {
            let primes = first_primes(d.saturating_sub(1));
            (0..n_points)
                .map(|i| {
                    let mut p = vec![frac(i, n_points)];
                    p.extend(primes.iter().map(|&b| radical_inverse(i as u64, b)));
                    p
                })
                .collect()
        }
        PointKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let den = BigInt::one() << RANDOM_BITS;
            (0..n_points)
                .map(|_| {
                    (0..d).map(|_| BigRational::new(BigInt::from(rng.gen_range(0..1u64 << RANDOM_BITS)), den.clone())).collect()
                })
                .collect()
        }
        PointKind::Grid => {
            let k = (n_points as f64).powf(1.0 / d as f64).round() as usize;
            if k.pow(d as u32) != n_points {
                return Err(HyperHaarError::InvalidParams(format!("grid sets need N = k^d, got N = {n_points}")));
            }
            (0..n_points)
                .map(|mut i| {
                    let mut p = vec![BigRational::zero(); d];
                    for x in p.iter_mut().rev() {
                        *x = frac(i % k, k);
                        i /= k;
                    }
                    p
                })
                .collect()
        }
        PointKind::File => return Err(HyperHaarError::InvalidParams("file point sets are read, not generated".into())),
    };
    PointSet::new(d, points, kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn van_der_corput_four_points() {
        let set = generate(PointKind::VanDerCorput, 4, 2, 0).unwrap();
        let want = [[0, 1, 0, 1], [1, 4, 1, 2], [1, 2, 1, 4], [3, 4, 3, 4]];
        for (p, w) in set.points().iter().zip(want) {
            assert_eq!(p, &vec![ratio(w[0], w[1]), ratio(w[2], w[3])]);
        }
        assert!(generate(PointKind::VanDerCorput, 4, 3, 0).is_err());
    }

    #[test]
    fn grid_and_random_sets() {
        let g = generate(PointKind::Grid, 9, 2, 0).unwrap();
        assert_eq!(g.points()[5], vec![ratio(1, 3), ratio(2, 3)]);
        assert!(generate(PointKind::Grid, 8, 2, 0).is_err());
        let a = generate(PointKind::Random, 20, 3, 7).unwrap();
        assert_eq!(a, generate(PointKind::Random, 20, 3, 7).unwrap());
        assert_ne!(a, generate(PointKind::Random, 20, 3, 8).unwrap());
    }

    #[test]
    fn hammersley_uses_prime_bases() {
        let h = generate(PointKind::Hammersley, 10, 3, 0).unwrap();
        assert_eq!(h.points()[5], vec![ratio(1, 2), ratio(5, 8), ratio(7, 9)]);
    }

    #[test]
    fn csv_round_trip() {
        let set = generate(PointKind::Hammersley, 6, 3, 0).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let back = PointSet::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.points(), set.points());
        assert!(PointSet::read_csv("0.5,1\n".as_bytes()).is_err());
        assert_eq!(PointSet::read_csv("0.25, 1/3\n".as_bytes()).unwrap().points()[0], vec![ratio(1, 4), ratio(1, 3)]);
    }
}
