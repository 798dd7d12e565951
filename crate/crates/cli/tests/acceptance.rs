//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use hyperhaar::discrepancy::{discrepancy_certificate, generate, haar_coeff_d, roth_l2_lower, sampled_sup, scale_for, PointKind};
use hyperhaar::dyadic::{multiply_haars, DyadicInterval, DyadicRectangle, HaarProduct, ShapeVector};
use hyperhaar::field::{GridFunction, HaarSpectrum, PiecewiseLinear, TensorPLFunction};
use hyperhaar::graphs::{beck_gain_experiment, inclusion_exclusion_psi_neg, BeckEngine, BeckGainConfig};
use hyperhaar::scalar::{ratio, rational_to_text};
use hyperhaar::smallball::{
    block_moment_table, duality_certificate, exhaustive_min_ratio, profile_constant, smooth_pairing, BlockMode,
    CoefficientField, RandomSigns, RieszEngine, RieszParams,
};
use hyperhaar::{ExactGrid, HyperHaarError, Rational, Scalar};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Quadrature agreement for Haar coefficients of the discrepancy function.
const QUADRATURE_TOL: f64 = 1e-10;
/// Agreement between the exact tensor-PL sup and the dense-sampling max.
const SAMPLING_TOL: f64 = 1e-9;
/// Allowed spread of `‖ρF‖_p / √p` across `p`.
const MOMENT_SPREAD: f64 = 3.0;
/// Golden exhaustive probe at `d = 2`, `n = 2`, frozen from the first run.
const GOLDEN_MIN_RATIO: &str = "1";
const GOLDEN_MIN_SUP: &str = "3";

const SEEDS: [u64; 2] = [101, 202];

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn surrogates() -> [Rational; 2] {
    [ratio(1, 4), ratio(1, 3)]
}

/// Parameter grid shared by criteria 1 and 3.
fn identity_grid() -> Vec<(usize, u32, usize)> {
    let mut out = Vec::new();
    for d in [3, 4] {
        for n in [2, 4, 6] {
            for q in [2, 3] {
                out.push((d, n, q));
            }
        }
    }
    out
}

fn params(d: usize, n: u32, q: usize, rho: &Rational) -> Result<RieszParams, String> {
    RieszParams::new(n, d, Some(q), BlockMode::Partition).map(|p| p.with_surrogate(rho.clone())).map_err(|e| e.to_string())
}

fn is_capacity(e: &HyperHaarError) -> bool {
    matches!(e, HyperHaarError::Capacity { .. })
}

fn criterion_1() -> Check {
    let (mut checked, mut capped) = (0, Vec::new());
    for (d, n, q) in identity_grid() {
        for seed in SEEDS {
            for rho in surrogates() {
                let p = params(d, n, q, &rho)?;
                let tag = format!("d={d} n={n} q={q} seed={seed} ρ={}", rational_to_text(&rho));
                if let Err(e) = p.fits::<Rational>() {
                    ensure(is_capacity(&e), || format!("{tag}: {e}"))?;
                    capped.push(format!("d={d} n={n} q={q}"));
                    continue;
                }
                let engine = RieszEngine::new(&p, &RandomSigns { seed }).map_err(|e| format!("{tag}: {e}"))?;
                let dec = match engine.decompose::<Rational>() {
                    Ok(dec) => dec,
                    Err(e) if is_capacity(&e) => {
                        capped.push(format!("d={d} n={n} q={q}"));
                        continue;
                    }
                    Err(e) => return Err(format!("{tag}: {e}")),
                };
                ensure(dec.psi.integral().is_one(), || format!("{tag}: E Ψ = {}", dec.psi.integral()))?;
                ensure(dec.identity_holds().map_err(|e| e.to_string())?, || format!("{tag}: Ψ ≠ 1 + Ψˢᵈ + Ψ¬"))?;
                let inex = inclusion_exclusion_psi_neg::<Rational>(&engine).map_err(|e| format!("{tag}: {e}"))?;
                ensure(inex == dec.neg, || format!("{tag}: inclusion–exclusion ≠ Ψ¬"))?;
                checked += 1;
            }
        }
    }
    capped.dedup();
    Ok(format!("{checked} legs exact, capped by capacity: {}", if capped.is_empty() { "none".into() } else { capped.join(", ") }))
}

/// Levels on one axis: distinct per rectangle; positions either free or nested in one finest cell.
/// Levels stay ≤ 5, and the product grid stays within 2^16 cells.
fn random_tuple(rng: &mut ChaCha8Rng) -> Vec<DyadicRectangle> {
    let d = rng.gen_range(1..=4usize);
    let max_level = (16 / d as u32 - 1).min(5);
    let count = rng.gen_range(2..=4usize);
    let nested = rng.gen_bool(0.5);
    let mut sides: Vec<Vec<DyadicInterval>> = vec![Vec::with_capacity(d); count];
    for _ in 0..d {
        let mut levels: Vec<u32> = (0..=max_level).collect();
        levels.shuffle(rng);
        let finest = rng.gen_range(0..1u64 << max_level);
        for (i, &k) in levels.iter().take(count).enumerate() {
            let j = if nested { finest >> (max_level - k) } else { rng.gen_range(0..1u64 << k) };
            sides[i].push(DyadicInterval::new(k, j).unwrap());
        }
    }
    sides.into_iter().map(DyadicRectangle::new).collect()
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut signed, mut disjoint) = (0, 0);
    for case in 0..500 {
        let rects = random_tuple(&mut rng);
        let d = rects[0].dim();
        let res = ShapeVector::new((0..d).map(|t| rects.iter().map(|r| r.side(t).level() + 1).max().unwrap()).collect());
        let grid = |r: &DyadicRectangle| GridFunction::<f64>::from_haar(r, &res).unwrap();
        let mut product = grid(&rects[0]);
        for r in &rects[1..] {
            product = product.mul(&grid(r)).unwrap();
        }
        let expected = match multiply_haars(&rects).map_err(|e| format!("case {case}: {e}"))? {
            HaarProduct::Signed { sign, rect } => {
                signed += 1;
                grid(&rect).map(|v| v * sign as f64)
            }
            HaarProduct::DisjointSupport => {
                disjoint += 1;
                GridFunction::zeros(res.clone()).unwrap()
            }
        };
        ensure(product == expected, || format!("case {case}: product rule disagrees on {rects:?}"))?;
    }
    Ok(format!("500 tuples agree ({signed} signed, {disjoint} disjoint)"))
}

fn criterion_3() -> Check {
    let (mut checked, mut capped) = (0, 0);
    for (d, n, q) in identity_grid() {
        for seed in SEEDS {
            for rho in surrogates() {
                let p = params(d, n, q, &rho)?;
                let tag = format!("d={d} n={n} q={q} seed={seed} ρ={}", rational_to_text(&rho));
                let coeffs = CoefficientField::random_rational(n, d, seed, 9, 7);
                let cert = match duality_certificate::<Rational>(&coeffs, &p) {
                    Ok(c) => c,
                    Err(e) if is_capacity(&e) => {
                        capped += 1;
                        continue;
                    }
                    Err(e) => return Err(format!("{tag}: {e}")),
                };
                let expected = &rho * coeffs.mass_of(&p.covered_shapes()) / Rational::from_integer((1u64 << n).into());
                ensure(cert.pairing_by_order[0] == expected, || {
                    format!("{tag}: first order {} vs {}", cert.pairing_by_order[0], expected)
                })?;
                ensure(cert.pairing_by_order[1..].iter().all(Zero::is_zero), || format!("{tag}: higher orders do not vanish"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} legs exact, {capped} capped by capacity"))
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rat = |rng: &mut ChaCha8Rng| ratio(rng.gen_range(-30..=30), rng.gen_range(1..=9));
    for case in 0..100 {
        let d = rng.gen_range(1..=3usize);
        let res = ShapeVector::new((0..d).map(|_| rng.gen_range(0..=3u32)).collect());
        let values: Vec<Rational> = (0..res.rect_count()).map(|_| rat(&mut rng)).collect();
        let f = ExactGrid::from_values(res.clone(), values).unwrap();
        ensure(f.haar_analyze().synthesize() == f, || format!("case {case}: round trip fails at {res}"))?;

        let mut spectrum = HaarSpectrum::<Rational>::zeros(res.clone()).unwrap();
        let mut energy = Rational::zero();
        let sides: Vec<Vec<DyadicInterval>> = res
            .entries()
            .iter()
            .map(|&m| (0..m).flat_map(|k| (0..1u64 << k).map(move |j| DyadicInterval::new(k, j).unwrap())).collect())
            .collect();
        if sides.iter().all(|s| !s.is_empty()) {
            for _ in 0..8 {
                let key: Vec<DyadicInterval> = sides.iter().map(|s| s[rng.gen_range(0..s.len())]).collect();
                let rect = DyadicRectangle::new(key.clone());
                let opt: Vec<Option<DyadicInterval>> = key.into_iter().map(Some).collect();
                if !spectrum.get(&opt).unwrap().is_zero() {
                    continue;
                }
                let a = rat(&mut rng);
                energy += &a * &a * rect.volume::<Rational>();
                spectrum.set(&opt, a).unwrap();
            }
        }
        let g = spectrum.synthesize();
        ensure(g.norm_lp_pow(2).unwrap() == energy, || format!("case {case}: Parseval fails at {res}"))?;
    }
    Ok("100 grids: synthesis ∘ analysis = id and ‖Σαh_R‖₂² = Σα²|R| exactly".into())
}

fn criterion_5() -> Check {
    let (min_ratio, min_sup) = exhaustive_min_ratio(2, 2).map_err(|e| e.to_string())?;
    ensure(min_ratio > Rational::zero(), || "minimum ratio is not positive".into())?;
    ensure(rational_to_text(&min_ratio) == GOLDEN_MIN_RATIO && rational_to_text(&min_sup) == GOLDEN_MIN_SUP, || {
        format!("golden mismatch: ratio {min_ratio}, sup {min_sup}")
    })?;
    Ok(format!("4096 patterns, min ratio {min_ratio}, min sup {min_sup}"))
}

fn criterion_6() -> Check {
    let cfg = BeckGainConfig { d: 3, ns: vec![4, 6, 8, 10, 12], ps: vec![2], engine: BeckEngine::Walsh, pinned: false };
    let report = beck_gain_experiment(&cfg).map_err(|e| e.to_string())?;
    let (slope, free) = (report.slope(2).unwrap(), report.free_slope(2).unwrap());
    ensure(free - slope > 0.0, || format!("slope {slope:.4} not below free slope {free:.4}"))?;
    Ok(format!("slope {slope:.4} < free slope {free:.4}, gap {:.4}", free - slope))
}

fn criterion_7() -> Check {
    let mut lines = Vec::new();
    for n in [6, 8, 10] {
        let rows = block_moment_table(3, n, &[2, 4, 6, 8], &RandomSigns { seed: 7 }).map_err(|e| format!("n={n}: {e}"))?;
        let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
        ensure(hi < MOMENT_SPREAD * lo, || format!("n={n}: ratios {ratios:?} spread {:.3}", hi / lo))?;
        lines.push(format!("n={n} [{}]", ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ")));
    }
    Ok(lines.join("; "))
}

/// Neumaier's compensated sum.
fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        c += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + c
}

/// `⟨D_N, h_R⟩` in two dimensions by a two-point Gauss–Legendre rule on every box of the
/// grid cut at the midpoints and at the point coordinates inside `R`.
fn quadrature_coeff_2d(pts: &[[f64; 2]], rect: &DyadicRectangle) -> f64 {
    const NODE: f64 = 0.577_350_269_189_625_8;
    let n = pts.len() as f64;
    let cuts: Vec<Vec<f64>> = (0..2)
        .map(|t| {
            let side = rect.side(t);
            let (a, b) = (side.start::<f64>(), side.end::<f64>());
            let mut c = vec![a, (a + b) / 2.0, b];
            c.extend(pts.iter().map(|p| p[t]).filter(|&x| x > a && x < b));
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect();
    let (nx, ny) = (cuts[0].len() - 1, cuts[1].len() - 1);
    // A point is counted on box (i, j) iff its coordinates are at most the lower cuts,
    // so bucket it at the first cut not below it and take 2-D prefix sums.
    let mut table = vec![0u32; (nx + 1) * (ny + 1)];
    for p in pts {
        let i = cuts[0].partition_point(|&c| c < p[0]);
        let j = cuts[1].partition_point(|&c| c < p[1]);
        if i <= nx && j <= ny {
            table[i * (ny + 1) + j] += 1;
        }
    }
    for i in 0..=nx {
        for j in 0..=ny {
            let mut v = table[i * (ny + 1) + j];
            if i > 0 {
                v += table[(i - 1) * (ny + 1) + j];
            }
            if j > 0 {
                v += table[i * (ny + 1) + j - 1];
            }
            if i > 0 && j > 0 {
                v -= table[(i - 1) * (ny + 1) + j - 1];
            }
            table[i * (ny + 1) + j] = v;
        }
    }
    let mid = |t: usize| rect.side(t).start::<f64>() + rect.side(t).length::<f64>() / 2.0;
    let (mx, my) = (mid(0), mid(1));
    let mut terms = Vec::with_capacity(nx * ny * 4);
    for i in 0..nx {
        let (x0, x1) = (cuts[0][i], cuts[0][i + 1]);
        for j in 0..ny {
            let (y0, y1) = (cuts[1][j], cuts[1][j + 1]);
            let c = table[i * (ny + 1) + j] as f64;
            let sign = if x0 < mx { -1.0 } else { 1.0 } * if y0 < my { -1.0 } else { 1.0 };
            let w = (x1 - x0) * (y1 - y0) / 4.0;
            for sx in [-NODE, NODE] {
                for sy in [-NODE, NODE] {
                    let x = (x0 + x1) / 2.0 + sx * (x1 - x0) / 2.0;
                    let y = (y0 + y1) / 2.0 + sy * (y1 - y0) / 2.0;
                    terms.push(sign * w * (c - n * x * y));
                }
            }
        }
    }
    neumaier(terms)
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut previous_roth = 0.0f64;
    let mut lines = Vec::new();
    for k in 4..=10u32 {
        let n_points = 1usize << k;
        let set = generate(PointKind::VanDerCorput, n_points, 2, 0).map_err(|e| e.to_string())?;
        let pts: Vec<[f64; 2]> = set.points().iter().map(|p| [p[0].to_f64(), p[1].to_f64()]).collect();
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let sides: Vec<DyadicInterval> = (0..2)
                .map(|_| {
                    let level = rng.gen_range(0..=k + 1);
                    DyadicInterval::new(level, rng.gen_range(0..1u64 << level)).unwrap()
                })
                .collect();
            let rect = DyadicRectangle::new(sides);
            let exact = haar_coeff_d(&set, &rect).map_err(|e| e.to_string())?.to_f64();
            let err = (exact - quadrature_coeff_2d(&pts, &rect)).abs();
            worst = worst.max(err);
            ensure(err < QUADRATURE_TOL, || format!("k={k} {rect}: quadrature error {err:e}"))?;
        }
        let n = scale_for(n_points);
        let roth = roth_l2_lower(&set, n).map_err(|e| e.to_string())?;
        ensure(roth.value > 0.0 && roth.value >= previous_roth, || {
            format!("k={k}: Roth bound {} after {previous_roth}", roth.value)
        })?;
        previous_roth = roth.value;
        let p = RieszParams::new(n, 2, Some(2), BlockMode::Shifted).map_err(|e| e.to_string())?;
        let cert = discrepancy_certificate(&set, &p).map_err(|e| e.to_string())?;
        let sup = sampled_sup(&set, 1_000_000, k as u64).map_err(|e| e.to_string())?;
        ensure(cert.lower_bound <= sup.value, || format!("k={k}: certificate {} above sampled sup {}", cert.lower_bound, sup.value))?;
        lines.push(format!(
            "k={k} quad_err {worst:.1e} roth {:.4} cert {:.4} ≤ sup {:.4}",
            roth.value,
            cert.lower_bound.to_f64(),
            sup.value.to_f64()
        ));
    }
    Ok(lines.join("; "))
}

fn criterion_9() -> Check {
    let tent = PiecewiseLinear::<Rational>::odd_tent();
    let c = profile_constant(&tent).map_err(|e| e.to_string())?;
    ensure(c == ratio(1, 2), || format!("c_φ = {c}"))?;
    let mut pairs = 0;
    for (d, n) in [(2usize, 3u32), (3, 3)] {
        let coeffs = CoefficientField::random_rational(n, d, 9, 9, 7);
        let constant = (0..d).fold(Rational::one(), |acc, _| acc * &c);
        for shape in hyperhaar::dyadic::enumerate_shapes(n, d) {
            let got = smooth_pairing(&coeffs, &shape, &shape, &tent).map_err(|e| e.to_string())?;
            let want = &constant * coeffs.shape_mass(&shape) / Rational::from_integer((1u64 << n).into());
            ensure(got == want, || format!("d={d} n={n} shape {shape}: {got} vs {want}"))?;
            pairs += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let d = 1 + case % 3;
        // Breakpoints on the 1/16 grid, sampled on the 1/64 grid, which contains every vertex.
        let sample = if d == 3 { 32 } else { 64 };
        let breakpoints: Vec<Vec<f64>> = (0..d)
            .map(|_| {
                let mut b: Vec<f64> = (1..16).filter(|_| rng.gen_bool(0.4)).map(|i| i as f64 / 16.0).collect();
                b.insert(0, 0.0);
                b.push(1.0);
                b
            })
            .collect();
        let count: usize = breakpoints.iter().map(Vec::len).product();
        let values: Vec<f64> = (0..count).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let f = TensorPLFunction::new(breakpoints, values).map_err(|e| e.to_string())?;
        let mut max = 0.0f64;
        let mut idx = vec![0usize; d];
        loop {
            let x: Vec<f64> = idx.iter().map(|&i| i as f64 / sample as f64).collect();
            max = max.max(f.eval(&x).unwrap().abs());
            let mut t = 0;
            while t < d {
                idx[t] += 1;
                if idx[t] <= sample {
                    break;
                }
                idx[t] = 0;
                t += 1;
            }
            if t == d {
                break;
            }
        }
        let err = (f.sup() - max).abs();
        worst = worst.max(err);
        ensure(err <= SAMPLING_TOL, || format!("case {case}: sup {} vs sampled {max}", f.sup()))?;
    }
    Ok(format!("c_φ = 1/2, {pairs} shape pairings exact, 50 sups within {worst:.1e}"))
}

fn criterion_10() -> Check {
    let bin = env!("CARGO_BIN_EXE_hyperhaar");
    let runs: [&[&str]; 5] = [
        &["verify", "--d", "3", "--n", "5", "--coeff", "random", "--seed", "3"],
        &["verify", "--d", "2", "--n", "2", "--coeff", "exhaustive"],
        &["riesz", "--d", "3", "--n", "4", "--q", "2", "--seed", "5"],
        &["beckgain", "--seed", "0"],
        &["discrepancy", "--points", "hammersley", "--n-points", "64", "--samples", "10000", "--seed", "1"],
    ];
    for args in runs {
        let once = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        let twice = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        ensure(once.status.success(), || format!("{args:?} exited with {:?}", once.status.code()))?;
        ensure(once.stdout == twice.stdout, || format!("{args:?} differs between runs"))?;
    }
    Ok(format!("{} subcommand runs byte-identical", runs.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact identities", criterion_1),
        ("product rule", criterion_2),
        ("pairing identities", criterion_3),
        ("Haar round trip and Parseval", criterion_4),
        ("exhaustive d=2 probe", criterion_5),
        ("Beck gain slope", criterion_6),
        ("moment profile", criterion_7),
        ("discrepancy certificates", criterion_8),
        ("smooth variant", criterion_9),
        ("determinism", criterion_10),
    ];
    // Numeric arguments (`cargo test --test acceptance -- 3 8`) select criteria.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
