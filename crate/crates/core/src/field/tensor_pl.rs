use crate::error::{HyperHaarError, Result};
use crate::field::grid::GridFunction;
use crate::scalar::Scalar;

/// Continuous piecewise-linear function of one variable given by knots and values.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear<T> {
    knots: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> PiecewiseLinear<T> {
    pub fn new(knots: Vec<T>, values: Vec<T>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(HyperHaarError::InvalidParams("need matching knots and values, at least two".into()));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HyperHaarError::InvalidParams("knots must be strictly increasing".into()));
        }
        Ok(Self { knots, values })
    }

    /// The odd tent on `[-1/2, 1/2]`: slope 4 on `[-1/4, 1/4]`, back to 0 at `±1/2`.
    pub fn odd_tent() -> Self {
        let q = |a: i64, b: i64| T::of_int(a) / T::of_int(b);
        Self {
            knots: vec![q(-1, 2), q(-1, 4), q(1, 4), q(1, 2)],
            values: vec![T::zero(), -T::one(), T::one(), T::zero()],
        }
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn eval(&self, x: &T) -> T {
        let last = self.knots.len() - 1;
        if *x < self.knots[0] || *x > self.knots[last] {
            return T::zero();
        }
        let k = (self.knots.partition_point(|b| b <= x) - 1).min(last - 1);
        let (a, b) = (&self.knots[k], &self.knots[k + 1]);
        let lambda = (x.clone() - a.clone()) / (b.clone() - a.clone());
        self.values[k].clone() + lambda * (self.values[k + 1].clone() - self.values[k].clone())
    }

    /// Shifts the support `[-1/2, 1/2]` onto `[0, 1]`.
    pub fn centered_on_unit(&self) -> Self {
        let half = T::one().half();
        Self {
            knots: self.knots.iter().map(|k| k.clone() + half.clone()).collect(),
            values: self.values.clone(),
        }
    }

    /// `∫ φ` over `[lo, hi]`, exact for piecewise-linear `φ` (zero off the knot range).
    pub fn integral_between(&self, lo: &T, hi: &T) -> T {
        let mut pts = vec![lo.clone()];
        pts.extend(self.knots.iter().filter(|k| *k > lo && *k < hi).cloned());
        pts.push(hi.clone());
        let mut acc = T::zero();
        for w in pts.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let mid_sum = self.eval(a) + self.eval(b);
            let inside = *a >= self.knots[0] && b <= self.knots.last().unwrap();
            if inside {
                acc = acc + (b.clone() - a.clone()) * mid_sum.half();
            }
        }
        acc
    }

    /// `c_φ = ⟨φ, h_{[-1/2,1/2]}⟩`.
    pub fn haar_pairing(&self) -> T {
        let half = T::one().half();
        let zero = T::zero();
        self.integral_between(&zero, &half) - self.integral_between(&-half.clone(), &zero)
    }

    pub fn mean(&self) -> T {
        let first = self.knots[0].clone();
        let last = self.knots.last().unwrap().clone();
        self.integral_between(&first, &last)
    }
}

/// A function on `[0,1]^d` that is multilinear on every box of a product breakpoint grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorPLFunction<T> {
    breakpoints: Vec<Vec<T>>,
    values: Vec<T>,
}

fn vertex_count<T>(breakpoints: &[Vec<T>]) -> usize {
    breakpoints.iter().map(|b| b.len()).product()
}

impl<T: Scalar> TensorPLFunction<T> {
    pub fn new(breakpoints: Vec<Vec<T>>, values: Vec<T>) -> Result<Self> {
        for axis in &breakpoints {
            if axis.len() < 2 || !axis[0].is_zero() || !axis.last().unwrap().is_one() {
                return Err(HyperHaarError::InvalidParams("breakpoints must run from 0 to 1".into()));
            }
            if axis.windows(2).any(|w| w[0] >= w[1]) {
                return Err(HyperHaarError::InvalidParams("breakpoints must be strictly increasing".into()));
            }
        }
        if values.len() != vertex_count(&breakpoints) {
            return Err(HyperHaarError::InvalidParams(format!(
                "{} vertex values for {} vertices",
                values.len(),
                vertex_count(&breakpoints)
            )));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(d: usize, c: T) -> Self {
        Self {
            breakpoints: vec![vec![T::zero(), T::one()]; d],
            values: vec![c; 1 << d],
        }
    }

    /// Builds the function from its value at every vertex of the breakpoint grid.
    pub fn from_vertex_fn(breakpoints: Vec<Vec<T>>, f: impl Fn(&[T]) -> T) -> Result<Self> {
        let count = vertex_count(&breakpoints);
        let mut values = Vec::with_capacity(count);
        let mut point = Vec::with_capacity(breakpoints.len());
        for flat in 0..count {
            point.clear();
            let mut rest = flat;
            let mut idx = vec![0; breakpoints.len()];
            for (axis, b) in breakpoints.iter().enumerate().rev() {
                idx[axis] = rest % b.len();
                rest /= b.len();
            }
            point.extend(idx.iter().zip(&breakpoints).map(|(&i, b)| b[i].clone()));
            values.push(f(&point));
        }
        Self::new(breakpoints, values)
    }

    pub fn dim(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn breakpoints(&self) -> &[Vec<T>] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn eval(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dim() {
            return Err(HyperHaarError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let mut cells = Vec::with_capacity(self.dim());
        for (xt, b) in x.iter().zip(&self.breakpoints) {
            if *xt < T::zero() || *xt > T::one() {
                return Err(HyperHaarError::Domain(format!("coordinate {xt:?} outside [0,1]")));
            }
            let k = (b.partition_point(|v| v <= xt) - 1).min(b.len() - 2);
            let lambda = (xt.clone() - b[k].clone()) / (b[k + 1].clone() - b[k].clone());
            cells.push((k, lambda));
        }
        let mut acc = T::zero();
        for corner in 0..1usize << self.dim() {
            let mut weight = T::one();
            let mut flat = 0usize;
            for (axis, (k, lambda)) in cells.iter().enumerate() {
                let up = corner >> (self.dim() - 1 - axis) & 1 == 1;
                weight = weight * if up { lambda.clone() } else { T::one() - lambda.clone() };
                flat = flat * self.breakpoints[axis].len() + k + up as usize;
            }
            if !weight.is_zero() {
                acc = acc + weight * self.values[flat].clone();
            }
        }
        Ok(acc)
    }

    /// Exact `sup |f|`: the maximum modulus over vertices.
    pub fn sup(&self) -> T {
        self.values
            .iter()
            .map(|v| v.abs())
            .fold(T::zero(), |m, v| if v > m { v } else { m })
    }

    /// The same function on a finer breakpoint grid.
    pub fn resample(&self, breakpoints: Vec<Vec<T>>) -> Result<Self> {
        for (new, old) in breakpoints.iter().zip(&self.breakpoints) {
            if old.iter().any(|o| new.binary_search_by(|n| n.partial_cmp(o).unwrap()).is_err()) {
                return Err(HyperHaarError::InvalidParams("resampling grid must contain the breakpoints".into()));
            }
        }
        Self::from_vertex_fn(breakpoints, |p| self.eval(p).expect("point in domain"))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(HyperHaarError::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let union: Vec<Vec<T>> =
            self.breakpoints.iter().zip(&other.breakpoints).map(|(a, b)| merge_sorted(a, b)).collect();
        let a = self.resample(union.clone())?;
        let b = other.resample(union)?;
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x.clone() + y.clone()).collect();
        Self::new(a.breakpoints, values)
    }

    /// `∫ f · g` for a grid function `g`, exact in exact mode.
    /// `∫ f · g` exactly for a piecewise-constant grid function `g`.
    ///
    /// Writes `f = Σ_v f(v) Π_t hat_{v_t}` and contracts `g` axis by axis against the
    /// one-dimensional weights `∫_{cell} hat`, so no common refinement is needed.
    pub fn integrate_grid(&self, g: &GridFunction<T>) -> Result<T> {
        if g.dim() != self.dim() {
            return Err(HyperHaarError::DimensionMismatch { expected: self.dim(), got: g.dim() });
        }
        let d = self.dim();
        let mut shape: Vec<usize> = g.resolution().entries().iter().map(|&m| 1usize << m).collect();
        let mut data: Vec<T> = g.values().to_vec();
        for axis in 0..d {
            let weights = hat_cell_weights(&self.breakpoints[axis], g.resolution().entries()[axis]);
            let outer: usize = shape[..axis].iter().product();
            let inner: usize = shape[axis + 1..].iter().product();
            let (cells, verts) = (shape[axis], self.breakpoints[axis].len());
            let mut next = vec![T::zero(); outer * verts * inner];
            for o in 0..outer {
                for (v, row) in weights.iter().enumerate() {
                    let dst = (o * verts + v) * inner;
                    for (c, w) in row {
                        let src = (o * cells + c) * inner;
                        for i in 0..inner {
                            let x = &data[src + i];
                            if !x.is_zero() {
                                next[dst + i] = next[dst + i].clone() + w.clone() * x.clone();
                            }
                        }
                    }
                }
            }
            shape[axis] = verts;
            data = next;
        }
        Ok(self
            .values
            .iter()
            .zip(&data)
            .filter(|(f, _)| !f.is_zero())
            .fold(T::zero(), |acc, (f, w)| acc + f.clone() * w.clone()))
    }
}

/// For each breakpoint, the nonzero `(cell, ∫_{cell} hat)` over the `2^m` cells of `[0, 1]`.
fn hat_cell_weights<T: Scalar>(b: &[T], m: u32) -> Vec<Vec<(usize, T)>> {
    let scale = T::pow2(m as i32);
    let cell_of = |x: &T| ((x.clone() * scale.clone()).floor_i64().max(0) as usize).min((1usize << m) - 1);
    let step = T::pow2(-(m as i32));
    (0..b.len())
        .map(|i| {
            let lo = if i == 0 { b[0].clone() } else { b[i - 1].clone() };
            let hi = if i + 1 == b.len() { b[i].clone() } else { b[i + 1].clone() };
            let mut knots = vec![lo.clone()];
            let mut vals = vec![if i == 0 { T::one() } else { T::zero() }];
            if i > 0 && i + 1 < b.len() {
                knots.push(b[i].clone());
                vals.push(T::one());
            }
            knots.push(hi.clone());
            vals.push(if i + 1 == b.len() { T::one() } else { T::zero() });
            let hat = PiecewiseLinear { knots, values: vals };
            let mut row = Vec::new();
            for c in cell_of(&lo)..=cell_of(&hi) {
                let a = T::of_int(c as i64) * step.clone();
                let z = a.clone() + step.clone();
                let (a, z) = (if a > lo { a } else { lo.clone() }, if z < hi { z } else { hi.clone() });
                if a < z {
                    let w = hat.integral_between(&a, &z);
                    if !w.is_zero() {
                        row.push((c, w));
                    }
                }
            }
            row
        })
        .collect()
}

pub(crate) fn merge_sorted<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = if j >= b.len() || (i < a.len() && a[i] <= b[j]) {
            i += 1;
            a[i - 1].clone()
        } else {
            j += 1;
            b[j - 1].clone()
        };
        if out.last() != Some(&next) {
            out.push(next);
        }
    }
    out
}
