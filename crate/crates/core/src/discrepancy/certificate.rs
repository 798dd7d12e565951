use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::discrepancy::dfunc::{d_eval, layer_coefficients, roth_l2_lower, scale_for};
use crate::discrepancy::points::PointSet;
use crate::error::{HyperHaarError, Result};
use crate::field::GridFunction;
use crate::scalar::rational_to_text;
use crate::smallball::{dyadic_approximation, BlockMode, RieszEngine, RieszParams};

fn big(v: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Suffix sums `T(c) = Σ_{c' ≥ c} S(c')` on the grid padded by one cell per axis.
struct SuffixTable {
    dims: Vec<usize>,
    strides: Vec<usize>,
    data: Vec<i64>,
}

impl SuffixTable {
    fn new(s: &GridFunction<i32>) -> Self {
        let cells: Vec<usize> = s.resolution().entries().iter().map(|&m| 1usize << m).collect();
        let dims: Vec<usize> = cells.iter().map(|c| c + 1).collect();
        let d = dims.len();
        let mut strides = vec![1usize; d];
        for t in (0..d.saturating_sub(1)).rev() {
            strides[t] = strides[t + 1] * dims[t + 1];
        }
        let mut data = vec![0i64; dims.iter().product()];
        for (flat, &v) in s.values().iter().enumerate() {
            let mut rest = flat;
            let mut at = 0;
            for t in (0..d).rev() {
                at += (rest % cells[t]) * strides[t];
                rest /= cells[t];
            }
            data[at] = v as i64;
        }
        for t in 0..d {
            let (stride, dim) = (strides[t], dims[t]);
            for flat in (0..data.len()).rev() {
                let c = flat / stride % dim;
                if c + 1 < dim {
                    data[flat] += data[flat + stride];
                }
            }
        }
        Self { dims, strides, data }
    }

    fn get(&self, idx: &[usize]) -> i64 {
        if idx.iter().zip(&self.dims).any(|(i, d)| i >= d) {
            return 0;
        }
        self.data[idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum::<usize>()]
    }
}

/// `⟨D_N, S⟩` exactly for an integer grid `S`.
///
/// The counting part is `Σ_p ∫_{x > p} S`, which splits per axis into full cells above
/// the point and the partial cell containing it; the linear part is the separable sum
/// `Σ_c S(c) Π_t (b_t² − a_t²) / 2`.
pub fn pairing_with_discrepancy(set: &PointSet, s: &GridFunction<i32>) -> Result<BigRational> {
    let d = set.d();
    if s.dim() != d {
        return Err(HyperHaarError::DimensionMismatch { expected: d, got: s.dim() });
    }
    let m: Vec<u32> = s.resolution().entries().to_vec();
    let table = SuffixTable::new(s);
    let cell_len: Vec<BigRational> = m.iter().map(|&k| BigRational::new(BigInt::one(), BigInt::one() << k)).collect();
    let mut counting = BigRational::zero();
    let mut idx = vec![0usize; d];
    for p in set.points() {
        let cells: Vec<usize> = p
            .iter()
            .zip(&m)
            .map(|(x, &k)| (x * BigRational::from_integer(BigInt::one() << k)).floor().to_integer().to_usize().unwrap())
            .collect();
        let partial: Vec<BigRational> =
            p.iter().zip(&cells).zip(&cell_len).map(|((x, &i), l)| l * big(i as i128 + 1) - x).collect();
        for b in 0..1usize << d {
            let mut sum = 0i64;
            let mut sub = b;
            loop {
                for t in 0..d {
                    let in_b = b >> t & 1 == 1;
                    let in_sub = sub >> t & 1 == 1;
                    idx[t] = if in_b && !in_sub { cells[t] } else { cells[t] + 1 };
                }
                let sign = if sub.count_ones() % 2 == 0 { 1 } else { -1 };
                sum += sign * table.get(&idx);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & b;
            }
            if sum == 0 {
                continue;
            }
            let weight: BigRational =
                (0..d).map(|t| if b >> t & 1 == 1 { partial[t].clone() } else { cell_len[t].clone() }).product();
            counting += weight * big(sum as i128);
        }
    }
    let mut linear = 0i128;
    for (flat, &v) in s.values().iter().enumerate() {
        if v == 0 {
            continue;
        }
        let mut rest = flat;
        let mut prod = v as i128;
        for &k in m.iter().rev() {
            let c = rest % (1usize << k);
            rest >>= k;
            prod *= 2 * c as i128 + 1;
        }
        linear += prod;
    }
    let denom_bits: u32 = m.iter().map(|&k| 2 * k + 1).sum();
    let linear = big(linear) / BigRational::from_integer(BigInt::one() << denom_bits);
    Ok(counting - big(set.len() as i128) * linear)
}

/// `‖Σ_k ρ^k S_k‖₁` exactly, evaluating each distinct cell tuple once.
pub fn l1_of_combination(sums: &[GridFunction<i32>], rho: &BigRational) -> Result<BigRational> {
    let first = sums.first().ok_or_else(|| HyperHaarError::InvalidParams("no grids".into()))?;
    let mut counts: HashMap<Vec<i32>, u64> = HashMap::new();
    let mut key = vec![0i32; sums.len()];
    for c in 0..first.len() {
        for (k, s) in key.iter_mut().zip(sums) {
            *k = s.values()[c];
        }
        match counts.get_mut(key.as_slice()) {
            Some(n) => *n += 1,
            None => {
                counts.insert(key.clone(), 1);
            }
        }
    }
    let mut total = BigRational::zero();
    for (key, n) in counts {
        let mut v = BigRational::zero();
        let mut rk = BigRational::one();
        for &x in &key {
            rk = &rk * rho;
            v += &rk * big(x as i128);
        }
        total += v.abs() * big(n as i128);
    }
    Ok(total / BigRational::from_integer(BigInt::one() << first.resolution().length()))
}

/// Certified lower bound `‖D_N‖_∞ ≥ ⟨D_N, Ψˢᵈ⟩ / ‖Ψˢᵈ‖₁` with `ε_R = sgn⟨D_N, h_R⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyCertificate {
    pub n_points: usize,
    pub n: u32,
    pub d: usize,
    /// The exact `ρ̃` used: the surrogate when given, otherwise a dyadic approximation.
    pub rho_tilde: BigRational,
    pub pairing: BigRational,
    pub pairing_by_order: Vec<BigRational>,
    pub l1: BigRational,
    pub lower_bound: BigRational,
    /// Smallest `⟨D_N, f_{r⃗}⟩ = Σ_R |⟨D_N, h_R⟩|` over covered shapes.
    pub min_shape_pairing: BigRational,
    pub roth_l2: f64,
}

impl DiscrepancyCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "N": self.n_points,
            "n": self.n,
            "d": self.d,
            "rho_tilde": rational_to_text(&self.rho_tilde),
            "pairing": rational_to_text(&self.pairing),
            "pairing_by_order": self.pairing_by_order.iter().map(rational_to_text).collect::<Vec<_>>(),
            "l1": rational_to_text(&self.l1),
            "lower_bound": rational_to_text(&self.lower_bound),
            "lower_bound_float": self.lower_bound.to_f64(),
            "min_shape_pairing": rational_to_text(&self.min_shape_pairing),
            "roth_l2": self.roth_l2,
        })
    }
}

pub const RHO_BITS: u32 = 32;

pub fn discrepancy_certificate(set: &PointSet, params: &RieszParams) -> Result<DiscrepancyCertificate> {
    if params.d != set.d() {
        return Err(HyperHaarError::DimensionMismatch { expected: params.d, got: set.d() });
    }
    if params.n != scale_for(set.len()) {
        return Err(HyperHaarError::InvalidParams(format!(
            "need 2N ≤ 2^n < 4N: N = {} gives n = {}, got n = {}",
            set.len(),
            scale_for(set.len()),
            params.n
        )));
    }
    if params.block_mode != BlockMode::Shifted {
        return Err(HyperHaarError::InvalidParams("discrepancy certificates use shifted blocks".into()));
    }
    let rho = params.rho_surrogate.clone().unwrap_or_else(|| dyadic_approximation(params.rho_tilde, RHO_BITS));
    let coeffs = layer_coefficients(set, params.n)?;
    let min_shape_pairing = params
        .covered_shapes()
        .iter()
        .map(|r| coeffs.shape_mass(r))
        .min()
        .unwrap_or_else(BigRational::zero);
    let engine = RieszEngine::new(params, &coeffs)?;
    let sums = engine.sd_sums()?;
    let mut pairing_by_order = Vec::with_capacity(sums.len());
    let mut rk = BigRational::one();
    for s in &sums {
        rk = &rk * &rho;
        pairing_by_order.push(&rk * pairing_with_discrepancy(set, s)?);
    }
    let pairing: BigRational = pairing_by_order.iter().sum();
    let l1 = l1_of_combination(&sums, &rho)?;
    if l1.is_zero() {
        return Err(HyperHaarError::CertificateUndefined("‖Ψˢᵈ‖₁ = 0".into()));
    }
    let roth_l2 = roth_l2_lower(set, params.n)?.value;
    Ok(DiscrepancyCertificate {
        n_points: set.len(),
        n: params.n,
        d: params.d,
        rho_tilde: rho,
        lower_bound: &pairing / &l1,
        pairing,
        pairing_by_order,
        l1,
        min_shape_pairing,
        roth_l2,
    })
}

/// Largest `|D_N|` seen at random points, recomputed exactly at the maximizer.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSup {
    pub samples: usize,
    pub at: Vec<BigRational>,
    pub value: BigRational,
}

const SAMPLE_BITS: u32 = 32;
const RANK_TABLE_LIMIT: usize = 1 << 24;

/// Counts `#{p : p < x}` for `d = 2` by a rank prefix-count table.
struct RankTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    counts: Vec<u32>,
}

impl RankTable {
    fn new(points: &[Vec<f64>]) -> Option<Self> {
        let mut xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let mut ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
        for v in [&mut xs, &mut ys] {
            v.sort_by(f64::total_cmp);
            v.dedup();
        }
        let w = ys.len() + 1;
        if (xs.len() + 1) * w > RANK_TABLE_LIMIT {
            return None;
        }
        let mut counts = vec![0u32; (xs.len() + 1) * w];
        for p in points {
            let a = xs.partition_point(|&x| x < p[0]);
            let b = ys.partition_point(|&y| y < p[1]);
            counts[(a + 1) * w + b + 1] += 1;
        }
        for a in 0..=xs.len() {
            for b in 0..w {
                let mut v = counts[a * w + b];
                if a > 0 {
                    v += counts[(a - 1) * w + b];
                }
                if b > 0 {
                    v += counts[a * w + b - 1];
                }
                if a > 0 && b > 0 {
                    v -= counts[(a - 1) * w + b - 1];
                }
                counts[a * w + b] = v;
            }
        }
        Some(Self { xs, ys, counts })
    }

    fn below(&self, x: &[f64]) -> u32 {
        let a = self.xs.partition_point(|&v| v < x[0]);
        let b = self.ys.partition_point(|&v| v < x[1]);
        self.counts[a * (self.ys.len() + 1) + b]
    }
}

pub fn sampled_sup(set: &PointSet, samples: usize, seed: u64) -> Result<SampledSup> {
    let d = set.d();
    let pts: Vec<Vec<f64>> =
        set.points().iter().map(|p| p.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()).collect();
    let table = if d == 2 { RankTable::new(&pts) } else { None };
    let n = set.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (1u64 << SAMPLE_BITS) as f64;
    let mut best = (f64::NEG_INFINITY, vec![0u64; d]);
    let mut raw = vec![0u64; d];
    let mut x = vec![0f64; d];
    for _ in 0..samples {
        for t in 0..d {
            raw[t] = rng.gen_range(0..=1u64 << SAMPLE_BITS);
            x[t] = raw[t] as f64 / scale;
        }
        let count = match &table {
            Some(tab) => tab.below(&x),
            None => pts.iter().filter(|p| p.iter().zip(&x).all(|(a, b)| a < b)).count() as u32,
        };
        let v = (count as f64 - n * x.iter().product::<f64>()).abs();
        if v > best.0 {
            best = (v, raw.clone());
        }
    }
    let den = BigInt::one() << SAMPLE_BITS;
    let at: Vec<BigRational> = best.1.iter().map(|&j| BigRational::new(BigInt::from(j), den.clone())).collect();
    let value = d_eval(set, &at)?.abs();
    Ok(SampledSup { samples, at, value })
}
