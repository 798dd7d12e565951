use hyperhaar::discrepancy::{
    d_eval, discrepancy_certificate, generate, haar_coeff_d, layer_coefficients, roth_l2_lower, sampled_sup, scale_for,
    PointKind, PointSet,
};
use hyperhaar::dyadic::{enumerate_shapes, rectangles_of_shape, DyadicRectangle};
use hyperhaar::scalar::{ratio, Scalar};
use hyperhaar::smallball::{BlockMode, RieszParams};
use hyperhaar::Rational;
use num_traits::{One, Zero};
use proptest::prelude::*;

/// Two-point Gauss–Legendre rule on [-1, 1]; exact for cubics.
const GL_NODES: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

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

/// `⟨D_N, h_R⟩` by quadrature: every side is cut at its midpoint and at the point
/// coordinates inside it, so on each box the count is constant and the rest is multilinear.
fn quadrature_coeff(pts: &[Vec<f64>], rect: &DyadicRectangle) -> f64 {
    let n = pts.len() as f64;
    let cuts: Vec<Vec<f64>> = rect
        .sides()
        .iter()
        .enumerate()
        .map(|(t, side)| {
            let (a, b) = (side.start::<f64>(), side.end::<f64>());
            let mut c = vec![a, (a + b) / 2.0, b];
            c.extend(pts.iter().map(|p| p[t]).filter(|&x| x > a && x < b));
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect();
    let d = cuts.len();
    let mut terms = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let boxes: Vec<(f64, f64)> = (0..d).map(|t| (cuts[t][idx[t]], cuts[t][idx[t] + 1])).collect();
        let sign: f64 = rect.sides().iter().zip(&boxes).map(|(s, (lo, _))| if *lo < s.mid() { -1.0 } else { 1.0 }).product();
        let half_widths: f64 = boxes.iter().map(|(lo, hi)| (hi - lo) / 2.0).product();
        for node in 0..1usize << d {
            let x: Vec<f64> =
                boxes.iter().enumerate().map(|(t, (lo, hi))| (lo + hi) / 2.0 + (hi - lo) / 2.0 * GL_NODES[node >> t & 1]).collect();
            let count = pts.iter().filter(|p| p.iter().zip(&x).all(|(a, b)| a < b)).count() as f64;
            terms.push(sign * half_widths * (count - n * x.iter().product::<f64>()));
        }
        let mut t = 0;
        loop {
            if t == d {
                return neumaier(terms);
            }
            idx[t] += 1;
            if idx[t] + 1 < cuts[t].len() {
                break;
            }
            idx[t] = 0;
            t += 1;
        }
    }
}

trait Mid {
    fn mid(&self) -> f64;
}

impl Mid for hyperhaar::dyadic::DyadicInterval {
    fn mid(&self) -> f64 {
        (self.start::<f64>() + self.end::<f64>()) / 2.0
    }
}

/// Warnock's closed form for `‖D_N‖₂²`.
fn warnock_l2_sq(set: &PointSet) -> Rational {
    let pts = set.points();
    let n = Rational::from_integer(pts.len().into());
    let mut cross = Rational::zero();
    for p in pts {
        for q in pts {
            cross += p.iter().zip(q).map(|(a, b)| Rational::one() - a.max(b)).product::<Rational>();
        }
    }
    let linear: Rational = pts.iter().map(|p| p.iter().map(|a| Rational::one() - a * a).product::<Rational>()).sum();
    let cube = Rational::one() / Rational::from_integer(3.into()).pow(set.d() as i32);
    let two_n = Rational::from_integer(2.into()) * &n / Rational::from_integer((1i64 << set.d()).into());
    cross - two_n * linear + &n * &n * cube
}

fn sets() -> Vec<PointSet> {
    vec![
        generate(PointKind::VanDerCorput, 16, 2, 0).unwrap(),
        generate(PointKind::Hammersley, 13, 3, 0).unwrap(),
        generate(PointKind::Random, 20, 2, 5).unwrap(),
        generate(PointKind::Grid, 27, 3, 0).unwrap(),
    ]
}

#[test]
fn haar_coefficients_match_quadrature() {
    for set in sets() {
        let pts: Vec<Vec<f64>> = set.points().iter().map(|p| p.iter().map(Scalar::to_f64).collect()).collect();
        for n in 0..=3 {
            for shape in enumerate_shapes(n, set.d()) {
                for rect in rectangles_of_shape(&shape) {
                    let exact = haar_coeff_d(&set, &rect).unwrap().to_f64();
                    let quad = quadrature_coeff(&pts, &rect);
                    assert!((exact - quad).abs() < 1e-10, "{:?} {rect}: {exact} vs {quad}", set.kind());
                }
            }
        }
    }
}

#[test]
fn layer_field_agrees_with_single_coefficients() {
    let set = generate(PointKind::Hammersley, 10, 2, 0).unwrap();
    let field = layer_coefficients(&set, 5).unwrap();
    for shape in enumerate_shapes(5, 2) {
        for rect in rectangles_of_shape(&shape) {
            assert_eq!(field.get(&rect), haar_coeff_d(&set, &rect).unwrap());
        }
    }
}

#[test]
fn roth_bound_is_below_the_exact_l2_norm() {
    for set in sets() {
        let n = scale_for(set.len());
        let roth = roth_l2_lower(&set, n).unwrap();
        assert!(roth.sum_sq <= warnock_l2_sq(&set), "{:?}", set.kind());
    }
}

#[test]
fn counting_is_left_continuous() {
    let set = PointSet::new(2, vec![vec![ratio(1, 4), ratio(1, 2)]], PointKind::File).unwrap();
    let at = d_eval(&set, &[ratio(1, 4), ratio(3, 4)]).unwrap();
    let above = d_eval(&set, &[ratio(1, 4) + ratio(1, 1 << 20), ratio(3, 4)]).unwrap();
    assert_eq!(at, -ratio(3, 16));
    assert_eq!(&above - &at, Rational::one() - ratio(3, 4 << 20));
}

#[test]
fn certificate_stays_below_the_sampled_sup() {
    for (kind, n_points, seed) in [(PointKind::VanDerCorput, 64, 0), (PointKind::Random, 40, 3), (PointKind::Hammersley, 50, 0)] {
        let set = generate(kind, n_points, 2, seed).unwrap();
        let n = scale_for(n_points);
        let params = RieszParams::new(n, 2, Some(2), BlockMode::Shifted).unwrap();
        let cert = discrepancy_certificate(&set, &params).unwrap();
        let sup = sampled_sup(&set, 20_000, seed).unwrap();
        assert!(cert.lower_bound <= sup.value, "{kind:?}: {} > {}", cert.lower_bound, sup.value);
        assert!(cert.roth_l2 <= warnock_l2_sq(&set).to_f64().sqrt() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_sets_match_quadrature(seed in any::<u64>(), n_points in 1usize..12) {
        let set = generate(PointKind::Random, n_points, 2, seed).unwrap();
        let pts: Vec<Vec<f64>> = set.points().iter().map(|p| p.iter().map(Scalar::to_f64).collect()).collect();
        for shape in enumerate_shapes(2, 2) {
            for rect in rectangles_of_shape(&shape) {
                let exact = haar_coeff_d(&set, &rect).unwrap().to_f64();
                prop_assert!((exact - quadrature_coeff(&pts, &rect)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn csv_round_trip(seed in any::<u64>(), n_points in 1usize..20, d in 1usize..4) {
        let set = generate(PointKind::Random, n_points, d, seed).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let back = PointSet::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.points(), set.points());
    }
}
