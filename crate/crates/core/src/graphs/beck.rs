use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::dyadic::ShapeVector;
use crate::error::{HyperHaarError, Result};
use crate::field::GridFunction;
use crate::smallball::{add_int_into, AllPlus, BlockMode, RandomSigns, RieszEngine, RieszParams, SignSource};

/// Which pairs `(r⃗, s⃗)` enter a coincidence sum `Σ f_{r⃗} f_{s⃗}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairFamily {
    /// `Φ_{t1,t2,k}`: `r⃗ ∈ 𝔸_{t1}`, `s⃗ ∈ 𝔸_{t2}`, `r⃗ ≠ s⃗`, `r_k = s_k`.
    Coincidence { t1: usize, t2: usize, k: usize },
    /// The same pairs without the coincidence constraint.
    Free { t1: usize, t2: usize },
    /// `r⃗ ∈ 𝔸_{j1}`, `s⃗ ∈ 𝔸_{j2}`, `r_2 = s_2`, `r_{k+2} = a_k`, `s_{|a|+k+2} = b_k`.
    Pinned { j1: usize, j2: usize, a: Vec<u32>, b: Vec<u32> },
}

impl PairFamily {
    fn blocks(&self) -> (usize, usize) {
        match *self {
            PairFamily::Coincidence { t1, t2, .. } | PairFamily::Free { t1, t2 } => (t1, t2),
            PairFamily::Pinned { j1, j2, .. } => (j1, j2),
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            PairFamily::Coincidence { k, .. } if *k == 0 || *k > d => {
                Err(HyperHaarError::InvalidParams(format!("coordinate {k} outside 1..={d}")))
            }
            PairFamily::Pinned { j1, j2, a, b } => {
                if j1 >= j2 {
                    return Err(HyperHaarError::InvalidParams("pinned pairs need j1 < j2".into()));
                }
                if d < 2 || 2 + a.len() + b.len() > d {
                    return Err(HyperHaarError::InvalidParams(format!(
                        "{} pinned coordinates do not fit d = {d}",
                        a.len() + b.len()
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn admits(&self, r: &ShapeVector, s: &ShapeVector) -> bool {
        if r == s {
            return false;
        }
        match self {
            PairFamily::Coincidence { k, .. } => r.get(k - 1) == s.get(k - 1),
            PairFamily::Free { .. } => true,
            PairFamily::Pinned { a, b, .. } => {
                r.get(1) == s.get(1)
                    && a.iter().enumerate().all(|(k, &ak)| r.get(k + 2) == ak)
                    && b.iter().enumerate().all(|(k, &bk)| s.get(a.len() + k + 2) == bk)
            }
        }
    }

    /// All admitted pairs, drawn from the blocks of `params`.
    pub fn pairs(&self, params: &RieszParams) -> Result<Vec<(ShapeVector, ShapeVector)>> {
        self.validate(params.d)?;
        let (t1, t2) = self.blocks();
        let left = params.block_shapes(t1)?;
        let right = params.block_shapes(t2)?;
        let mut out = Vec::new();
        for r in &left {
            for s in &right {
                if self.admits(r, s) {
                    out.push((r.clone(), s.clone()));
                }
            }
        }
        Ok(out)
    }
}

/// Sparse Walsh expansion: with every sign `+1`, `f_{r⃗} = Π_t ρ_{r_t}(x_t)` is a Walsh
/// function, encoded as one bit per `(axis, level)`.
type Walsh = HashMap<u128, i64>;

fn walsh_key(shape: &ShapeVector, n: u32) -> u128 {
    shape
        .entries()
        .iter()
        .enumerate()
        .fold(0u128, |acc, (t, &r)| acc | 1u128 << (t as u32 * (n + 1) + r))
}

fn walsh_product(a: &Walsh, b: &Walsh, budget: &mut u64) -> Result<Walsh> {
    let cost = a.len() as u64 * b.len() as u64;
    if cost > *budget {
        return Err(HyperHaarError::Budget(format!("sparse product of {} × {} terms", a.len(), b.len())));
    }
    *budget -= cost;
    let mut out = Walsh::with_capacity(a.len().max(b.len()));
    for (&ka, &ca) in a {
        for (&kb, &cb) in b {
            *out.entry(ka ^ kb).or_insert(0) += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0);
    Ok(out)
}

fn square_sum(w: &Walsh) -> BigInt {
    w.values().map(|&c| BigInt::from(c) * c).sum()
}

/// Exact `‖Σ_{pairs} f_{r⃗} f_{s⃗}‖_p^p` for each even `p`, all signs `+1`.
pub fn pair_norms_walsh(params: &RieszParams, family: &PairFamily, ps: &[u32]) -> Result<Vec<BigRational>> {
    if params.d as u32 * (params.n + 1) > 128 {
        return Err(HyperHaarError::Budget("more than 128 (axis, level) bits".into()));
    }
    let mut phi = Walsh::new();
    for (r, s) in family.pairs(params)? {
        let key = walsh_key(&r, params.n) ^ walsh_key(&s, params.n);
        *phi.entry(key).or_insert(0) += 1;
    }
    phi.retain(|_, c| *c != 0);
    let mut budget: u64 = 1 << 32;
    let mut powers: Vec<Walsh> = vec![phi];
    ps.iter()
        .map(|&p| {
            if p == 0 || p % 2 == 1 {
                return Err(HyperHaarError::InvalidParams(format!("p = {p} must be even and positive")));
            }
            let half = (p / 2) as usize;
            while powers.len() < half {
                let next = walsh_product(powers.last().expect("nonempty"), &powers[0], &mut budget)?;
                powers.push(next);
            }
            Ok(BigRational::from_integer(square_sum(&powers[half - 1])))
        })
        .collect()
}

/// The pair sum as an integer grid on the engine resolution.
pub fn grid_pair_sum(engine: &RieszEngine, family: &PairFamily) -> Result<GridFunction<i32>> {
    let mut acc = GridFunction::<i32>::zeros(engine.resolution().clone())?;
    let pairs = family.pairs(engine.params())?;
    let mut current: Option<(&ShapeVector, GridFunction<i8>)> = None;
    for (r, s) in &pairs {
        if current.as_ref().is_none_or(|(cr, _)| *cr != r) {
            current = Some((r, engine.rfunction(r)?));
        }
        let fr = &current.as_ref().expect("set above").1;
        add_int_into(&mut acc, &engine.times_rfunction(fr, s)?, 1)?;
    }
    Ok(acc)
}

/// Exact `‖Φ‖_p^p` from a dense grid evaluation with arbitrary signs.
pub fn grid_coincidence_norms(
    params: &RieszParams,
    source: &dyn SignSource,
    family: &PairFamily,
    ps: &[u32],
) -> Result<Vec<BigRational>> {
    let engine = RieszEngine::new(params, source)?;
    let phi = grid_pair_sum(&engine, family)?;
    let cells = BigInt::from(1u8) << phi.resolution().length();
    Ok(ps.iter().map(|&p| BigRational::new(phi.power_sum(p).into(), cells.clone())).collect())
}

/// How pair norms are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeckEngine {
    /// All signs `+1`, sparse Walsh arithmetic; reaches `n = 12` at `d = 3`.
    Walsh,
    /// Random signs from a seed on a dense grid; small `n` only.
    Grid { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeckGainConfig {
    pub d: usize,
    pub ns: Vec<u32>,
    pub ps: Vec<u32>,
    pub engine: BeckEngine,
    /// Also measure the fixed-parameter family (one pinned coordinate of `r⃗`).
    pub pinned: bool,
}

/// One `(n, p)` measurement. Norms are `‖·‖_p`; `*_pow` fields hold exact `p`-th powers.
#[derive(Debug, Clone, PartialEq)]
pub struct BeckRow {
    pub d: usize,
    pub n: u32,
    pub p: u32,
    pub norm_pow: BigRational,
    pub norm: f64,
    pub free_norm: f64,
    /// `sup_a` over the pinned family, and the same pair family left unpinned.
    pub pinned_norm: Option<f64>,
    pub unpinned_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeckGainReport {
    pub config: BeckGainConfig,
    pub rows: Vec<BeckRow>,
    /// Least-squares slope of `log ‖Φ_{1,1,1}‖_p` against `log n`, per `p`.
    pub slopes: Vec<(u32, f64)>,
    /// The same slope with the coincidence constraint removed.
    pub free_slopes: Vec<(u32, f64)>,
}

impl BeckGainReport {
    pub fn slope(&self, p: u32) -> Option<f64> {
        self.slopes.iter().find(|(q, _)| *q == p).map(|&(_, s)| s)
    }

    pub fn free_slope(&self, p: u32) -> Option<f64> {
        self.free_slopes.iter().find(|(q, _)| *q == p).map(|&(_, s)| s)
    }

    /// CSV `d,n,p,norm,slope,…` with one row per `(n, p)`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["d", "n", "p", "norm", "slope", "free_norm", "free_slope", "pinned_norm", "unpinned_norm"])?;
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        for row in &self.rows {
            w.write_record([
                row.d.to_string(),
                row.n.to_string(),
                row.p.to_string(),
                fmt_f64(row.norm),
                opt(self.slope(row.p)),
                fmt_f64(row.free_norm),
                opt(self.free_slope(row.p)),
                opt(row.pinned_norm),
                opt(row.unpinned_norm),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.12e}")
}

fn root(pow: &BigRational, p: u32) -> f64 {
    pow.to_f64().unwrap_or(f64::NAN).powf(1.0 / p as f64)
}

/// Least-squares slope of `y` against `x`.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    num / den
}

fn norms(params: &RieszParams, engine: BeckEngine, family: &PairFamily, ps: &[u32]) -> Result<Vec<BigRational>> {
    match engine {
        BeckEngine::Walsh => pair_norms_walsh(params, family, ps),
        BeckEngine::Grid { seed } => grid_coincidence_norms(params, &RandomSigns { seed }, family, ps),
    }
}

/// Measures `‖Φ_{1,1,1}‖_p` with `q = 2` partition blocks over a range of `n`.
pub fn beck_gain_experiment(config: &BeckGainConfig) -> Result<BeckGainReport> {
    if config.d < 2 {
        return Err(HyperHaarError::InvalidParams("Beck gain needs d ≥ 2".into()));
    }
    if config.pinned && config.d < 3 {
        return Err(HyperHaarError::InvalidParams("pinned family needs d ≥ 3".into()));
    }
    if config.ns.len() < 2 {
        return Err(HyperHaarError::InvalidParams("need at least two values of n for a slope".into()));
    }
    let mut rows = Vec::new();
    for &n in &config.ns {
        let params = RieszParams::new(n, config.d, Some(2), BlockMode::Partition)?;
        let phi = norms(&params, config.engine, &PairFamily::Coincidence { t1: 1, t2: 1, k: 1 }, &config.ps)?;
        let free = norms(&params, config.engine, &PairFamily::Free { t1: 1, t2: 1 }, &config.ps)?;
        let (pinned, unpinned) = if config.pinned {
            let unpinned = norms(&params, config.engine, &PairFamily::Coincidence { t1: 1, t2: 2, k: 2 }, &config.ps)?;
            let mut best = vec![BigRational::zero(); config.ps.len()];
            for a in 0..n {
                let family = PairFamily::Pinned { j1: 1, j2: 2, a: vec![a], b: vec![] };
                for (b, v) in best.iter_mut().zip(norms(&params, config.engine, &family, &config.ps)?) {
                    if v > *b {
                        *b = v;
                    }
                }
            }
            (Some(best), Some(unpinned))
        } else {
            (None, None)
        };
        for (i, &p) in config.ps.iter().enumerate() {
            rows.push(BeckRow {
                d: config.d,
                n,
                p,
                norm: root(&phi[i], p),
                norm_pow: phi[i].clone(),
                free_norm: root(&free[i], p),
                pinned_norm: pinned.as_ref().map(|v| root(&v[i], p)),
                unpinned_norm: unpinned.as_ref().map(|v| root(&v[i], p)),
            });
        }
    }
    let slope_of = |p: u32, pick: &dyn Fn(&BeckRow) -> f64| {
        let pts: Vec<(f64, f64)> =
            rows.iter().filter(|r| r.p == p).map(|r| ((r.n as f64).ln(), pick(r).ln())).collect();
        (p, least_squares_slope(&pts))
    };
    let slopes = config.ps.iter().map(|&p| slope_of(p, &|r| r.norm)).collect();
    let free_slopes = config.ps.iter().map(|&p| slope_of(p, &|r| r.free_norm)).collect();
    Ok(BeckGainReport { config: config.clone(), rows, slopes, free_slopes })
}

/// The all-`+1` sign choice that the Walsh engine assumes.
pub fn walsh_signs() -> AllPlus {
    AllPlus
}
