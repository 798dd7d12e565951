use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::dyadic::{enumerate_shapes, ShapeVector};
use crate::error::{HyperHaarError, Result};
use crate::scalar::{rational_to_text, ratio, Scalar};

/// How the first-coordinate levels are grouped into blocks `I_1 … I_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockMode {
    /// `q` consecutive intervals of (nearly) equal length partitioning `{1, …, n}`.
    Partition,
    /// `I_t = {j ∈ [0, n] : |j − tn/q| < q/4}`, well separated.
    Shifted,
}

impl BlockMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockMode::Partition => "partition",
            BlockMode::Shifted => "shifted",
        }
    }
}

impl std::str::FromStr for BlockMode {
    type Err = HyperHaarError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "partition" => Ok(BlockMode::Partition),
            "shifted" => Ok(BlockMode::Shifted),
            other => Err(HyperHaarError::Parse(format!("unknown block mode {other:?}"))),
        }
    }
}

/// Parameters of the Riesz product.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszParams {
    pub n: u32,
    pub d: usize,
    pub q: usize,
    pub a: BigRational,
    pub b: BigRational,
    pub eps: BigRational,
    /// `√q · n^{-(d-1)/2}`.
    pub rho: f64,
    /// `a · q^b · n^{-(d-1)/2}`.
    pub rho_tilde: f64,
    pub rho_surrogate: Option<BigRational>,
    pub block_mode: BlockMode,
    pub blocks: Vec<Vec<u32>>,
}

/// `q = ⌊a n^ε⌋`, clamped to at least 2 and then to at most `max(1, ⌊n/2⌋)`.
pub fn derived_q(n: u32, a: &BigRational, eps: &BigRational) -> usize {
    let raw = a.to_f64() * (n as f64).powf(eps.to_f64());
    let q = ((raw + 1e-12).floor() as usize).max(2);
    q.min((n as usize / 2).max(1))
}

/// Blocks `I_1 … I_q` (1-based block index `t` lives at position `t − 1`).
pub fn make_blocks(n: u32, q: usize, mode: BlockMode) -> Vec<Vec<u32>> {
    let (n64, q64) = (n as i64, q as i64);
    (1..=q64)
        .map(|t| match mode {
            BlockMode::Partition => {
                let lo = (t - 1) * n64 / q64 + 1;
                let hi = t * n64 / q64;
                (lo..=hi).map(|j| j as u32).collect()
            }
            BlockMode::Shifted => (0..=n64)
                .filter(|&j| 4 * (j * q64 - t * n64).abs() < q64 * q64)
                .map(|j| j as u32)
                .collect(),
        })
        .collect()
}

impl RieszParams {
    /// Parameters with default `a = 1/2`, `ε = 1/d²`; `q` derived when `None`.
    pub fn new(n: u32, d: usize, q: Option<usize>, block_mode: BlockMode) -> Result<Self> {
        let a = ratio(1, 2);
        let eps = ratio(1, (d * d).max(1) as i64);
        Self::with_constants(n, d, q, a, eps, block_mode)
    }

    pub fn with_constants(
        n: u32,
        d: usize,
        q: Option<usize>,
        a: BigRational,
        eps: BigRational,
        block_mode: BlockMode,
    ) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(HyperHaarError::InvalidParams("need d ≥ 1 and n ≥ 1".into()));
        }
        if !a.is_positive() || a >= BigRational::one() {
            return Err(HyperHaarError::InvalidParams("a must lie in (0,1)".into()));
        }
        if !eps.is_positive() || eps >= BigRational::one() {
            return Err(HyperHaarError::InvalidParams("eps must lie in (0,1)".into()));
        }
        let q = q.unwrap_or_else(|| derived_q(n, &a, &eps));
        if q == 0 {
            return Err(HyperHaarError::InvalidParams("q must be at least 1".into()));
        }
        let b = ratio(1, 4);
        let scale = (n as f64).powf(-((d as f64) - 1.0) / 2.0);
        let rho = (q as f64).sqrt() * scale;
        let rho_tilde = a.to_f64() * (q as f64).powf(0.25) * scale;
        let blocks = make_blocks(n, q, block_mode);
        let params = Self { n, d, q, a, b, eps, rho, rho_tilde, rho_surrogate: None, block_mode, blocks };
        params.check_invariants()?;
        Ok(params)
    }

    pub fn with_surrogate(mut self, rho: BigRational) -> Self {
        self.rho_surrogate = Some(rho);
        self
    }

    /// Disjointness, and the separation bound in shifted mode.
    pub fn check_invariants(&self) -> Result<()> {
        let mut seen = vec![false; self.n as usize + 1];
        for block in &self.blocks {
            for &j in block {
                if std::mem::replace(&mut seen[j as usize], true) {
                    return Err(HyperHaarError::InvalidParams(format!(
                        "blocks overlap at level {j} (q = {} too large for n = {})",
                        self.q, self.n
                    )));
                }
            }
        }
        if self.block_mode == BlockMode::Shifted {
            let bound = self.n as f64 / (2.0 * self.q as f64) - self.q as f64 / 2.0;
            let nonempty: Vec<&Vec<u32>> = self.blocks.iter().filter(|b| !b.is_empty()).collect();
            for w in nonempty.windows(2) {
                let gap = *w[1].first().unwrap() as f64 - *w[0].last().unwrap() as f64;
                if gap < bound {
                    return Err(HyperHaarError::InvalidParams(format!("block gap {gap} below {bound}")));
                }
            }
        }
        Ok(())
    }

    /// `𝔸_t = {r⃗ ∈ ℍ_n : r_1 ∈ I_t}` for `1 ≤ t ≤ q`.
    pub fn block_shapes(&self, t: usize) -> Result<Vec<ShapeVector>> {
        if t == 0 || t > self.q {
            return Err(HyperHaarError::BlockOutOfRange { t, q: self.q });
        }
        let block = &self.blocks[t - 1];
        Ok(enumerate_shapes(self.n, self.d)
            .into_iter()
            .filter(|r| block.contains(&r.get(0)))
            .collect())
    }

    /// Union of all `𝔸_t`.
    pub fn covered_shapes(&self) -> Vec<ShapeVector> {
        (1..=self.q).flat_map(|t| self.block_shapes(t).expect("valid block")).collect()
    }

    /// Grid resolution of the block sums: per axis, one past the finest level used.
    pub fn resolution(&self) -> ShapeVector {
        crate::smallball::rfunc::shapes_resolution(&self.covered_shapes(), self.d)
    }

    /// Whether grids in scalar type `T` fit this resolution, checked before any grid is built.
    pub fn fits<T: Scalar>(&self) -> Result<()> {
        crate::field::check_capacity::<T>(&self.resolution())
    }

    /// The value of `ρ̃` used in scalar type `T`: the surrogate in exact mode, the true value in float mode.
    pub fn rho_for<T: Scalar>(&self) -> Result<T> {
        if T::is_exact() {
            self.rho_surrogate
                .as_ref()
                .map(T::from_rational)
                .ok_or_else(|| HyperHaarError::InvalidParams("exact mode needs rho_surrogate".into()))
        } else {
            Ok(T::from_f64(self.rho_tilde).expect("finite"))
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "d": self.d,
            "q": self.q,
            "a": rational_to_text(&self.a),
            "b": rational_to_text(&self.b),
            "eps": rational_to_text(&self.eps),
            "rho": self.rho,
            "rho_tilde": self.rho_tilde,
            "rho_surrogate": self.rho_surrogate.as_ref().map(rational_to_text),
            "blocks_mode": self.block_mode.as_str(),
            "blocks": self.blocks,
        })
    }
}

/// Rational `p/2^k` closest below `x` (used where an exact stand-in for an irrational is needed).
pub fn dyadic_approximation(x: f64, bits: u32) -> BigRational {
    if x.is_zero() {
        return BigRational::zero();
    }
    let scaled = (x * (1u64 << bits) as f64).floor() as i64;
    ratio(scaled, 1i64 << bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_blocks_cover_levels() {
        assert_eq!(make_blocks(6, 2, BlockMode::Partition), vec![vec![1, 2, 3], vec![4, 5, 6]]);
        assert_eq!(make_blocks(7, 3, BlockMode::Partition), vec![vec![1, 2], vec![3, 4], vec![5, 6, 7]]);
        assert_eq!(make_blocks(2, 3, BlockMode::Partition), vec![vec![], vec![1], vec![2]]);
    }

    #[test]
    fn shifted_blocks_follow_centers() {
        assert_eq!(make_blocks(16, 4, BlockMode::Shifted), vec![vec![4], vec![8], vec![12], vec![16]]);
        assert_eq!(make_blocks(5, 2, BlockMode::Shifted), vec![vec![], vec![5]]);
        let p = RieszParams::new(40, 3, Some(4), BlockMode::Shifted).unwrap();
        assert_eq!(p.blocks, vec![vec![10], vec![20], vec![30], vec![40]]);
    }

    #[test]
    fn default_constants() {
        let p = RieszParams::new(6, 3, None, BlockMode::Partition).unwrap();
        assert_eq!(p.q, 2);
        assert_eq!(p.b, ratio(1, 4));
        assert_eq!(p.eps, ratio(1, 9));
        assert!((p.rho - 2f64.sqrt() / 6.0).abs() < 1e-15);
        assert!((p.rho_tilde - 0.5 * 2f64.powf(0.25) / 6.0).abs() < 1e-15);
        assert!(p.rho_for::<BigRational>().is_err());
        assert_eq!(p.with_surrogate(ratio(1, 4)).rho_for::<BigRational>().unwrap(), ratio(1, 4));
    }

    #[test]
    fn block_shapes_select_first_level() {
        let p = RieszParams::new(2, 2, Some(2), BlockMode::Partition).unwrap();
        assert_eq!(p.block_shapes(1).unwrap(), vec![ShapeVector::new(vec![1, 1])]);
        assert!(matches!(p.block_shapes(3), Err(HyperHaarError::BlockOutOfRange { t: 3, q: 2 })));
    }

    #[test]
    fn overlapping_shifted_blocks_rejected() {
        assert!(RieszParams::new(4, 2, Some(3), BlockMode::Shifted).is_err());
    }
}
