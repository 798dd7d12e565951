use std::io::Write;

use crate::dyadic::{DyadicInterval, DyadicRectangle, ShapeVector};
use crate::error::{HyperHaarError, Result};
use crate::field::grid::{cell_multi_index, GridFunction};
use crate::scalar::Scalar;

/// Tensor Haar spectrum of a grid function.
///
/// Per axis the dense index `0` stands for the constant function and `2^k + j`
/// for `h_I` with `I = [j 2^-k, (j+1) 2^-k)`. Every coefficient is normalized by
/// the support volume, so `f = Σ a_key · basis_key` with `L∞`-normalized basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarSpectrum<T> {
    resolution: ShapeVector,
    data: Vec<T>,
}

/// Per-axis factor of a spectrum entry: `None` is the constant, `Some(I)` is `h_I`.
pub type SpectrumKey = Vec<Option<DyadicInterval>>;

fn axis_index(side: &Option<DyadicInterval>) -> usize {
    match side {
        None => 0,
        Some(i) => (1usize << i.level()) + i.pos() as usize,
    }
}

fn axis_side(i: u64) -> Option<DyadicInterval> {
    if i == 0 {
        return None;
    }
    let level = 63 - i.leading_zeros();
    Some(DyadicInterval::new(level, i - (1 << level)).expect("valid index"))
}

/// Applies `f` to every fiber along `axis`; fibers are gathered and scattered.
fn for_each_fiber<T: Clone>(
    values: &mut [T],
    resolution: &ShapeVector,
    axis: usize,
    mut f: impl FnMut(&mut [T]),
) {
    let len = 1usize << resolution.get(axis);
    let inner: usize = resolution.entries()[axis + 1..].iter().map(|&m| 1usize << m).product();
    let outer = values.len() / (len * inner);
    let mut fiber: Vec<T> = Vec::with_capacity(len);
    for o in 0..outer {
        for i in 0..inner {
            let base = o * len * inner + i;
            fiber.clear();
            fiber.extend((0..len).map(|j| values[base + j * inner].clone()));
            f(&mut fiber);
            for (j, v) in fiber.iter().enumerate() {
                values[base + j * inner] = v.clone();
            }
        }
    }
}

fn analyze_fiber<T: Scalar>(fiber: &mut [T], scratch: &mut Vec<T>) {
    let mut len = fiber.len();
    while len > 1 {
        let half = len / 2;
        scratch.clear();
        scratch.extend_from_slice(&fiber[..len]);
        for j in 0..half {
            let l = scratch[2 * j].clone();
            let r = scratch[2 * j + 1].clone();
            fiber[j] = (l.clone() + r.clone()).half();
            fiber[half + j] = (r - l).half();
        }
        len = half;
    }
}

fn synthesize_fiber<T: Scalar>(fiber: &mut [T], scratch: &mut Vec<T>) {
    let mut len = 1;
    while len < fiber.len() {
        scratch.clear();
        scratch.extend_from_slice(&fiber[..2 * len]);
        for j in 0..len {
            let avg = scratch[j].clone();
            let det = scratch[len + j].clone();
            fiber[2 * j] = avg.clone() - det.clone();
            fiber[2 * j + 1] = avg + det;
        }
        len *= 2;
    }
}

/// One-dimensional Haar transform along `axis` only, in place.
pub(crate) fn analyze_axis<T: Scalar>(values: &mut [T], resolution: &ShapeVector, axis: usize) {
    let mut scratch = Vec::new();
    for_each_fiber(values, resolution, axis, |fiber| analyze_fiber(fiber, &mut scratch));
}

impl<T: Scalar> GridFunction<T> {
    /// Fast tensor Haar analysis, `O(d · cells)` scalar operations.
    pub fn haar_analyze(&self) -> HaarSpectrum<T> {
        let mut data = self.values().to_vec();
        for axis in 0..self.dim() {
            analyze_axis(&mut data, self.resolution(), axis);
        }
        HaarSpectrum { resolution: self.resolution().clone(), data }
    }

    /// `S²f = Σ_I a_I² 1_I` along `axis`, with coefficients depending on the other coordinates.
    pub fn square_function_sq(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim() {
            return Err(HyperHaarError::Domain(format!("axis {axis} out of range")));
        }
        let mut data = self.values().to_vec();
        let res = self.resolution().clone();
        let mut scratch = Vec::new();
        for_each_fiber(&mut data, &res, axis, |fiber| {
            analyze_fiber(fiber, &mut scratch);
            let len = fiber.len();
            let mut out = vec![T::zero(); len];
            for idx in 1..len {
                let side = axis_side(idx as u64).expect("nonzero index");
                let sq = fiber[idx].clone() * fiber[idx].clone();
                let span = len >> side.level();
                let start = side.pos() as usize * span;
                for o in &mut out[start..start + span] {
                    *o = o.clone() + sq.clone();
                }
            }
            fiber.clone_from_slice(&out);
        });
        GridFunction::from_values(res, data)
    }
}

impl<T: Scalar> HaarSpectrum<T> {
    pub fn zeros(resolution: ShapeVector) -> Result<Self> {
        let g = GridFunction::<T>::zeros(resolution)?;
        Ok(Self { resolution: g.resolution().clone(), data: g.into_values() })
    }

    pub fn resolution(&self) -> &ShapeVector {
        &self.resolution
    }

    pub fn mean(&self) -> &T {
        &self.data[0]
    }

    fn flat(&self, key: &[Option<DyadicInterval>]) -> Result<usize> {
        if key.len() != self.resolution.dim() {
            return Err(HyperHaarError::DimensionMismatch { expected: self.resolution.dim(), got: key.len() });
        }
        let mut flat = 0usize;
        for (side, &m) in key.iter().zip(self.resolution.entries()) {
            if let Some(i) = side {
                if i.level() >= m {
                    return Err(HyperHaarError::InsufficientResolution {
                        requested: self.resolution.entries().to_vec(),
                        what: format!("coefficient at level {}", i.level()),
                    });
                }
            }
            flat = (flat << m) | axis_index(side);
        }
        Ok(flat)
    }

    pub fn get(&self, key: &[Option<DyadicInterval>]) -> Result<&T> {
        Ok(&self.data[self.flat(key)?])
    }

    pub fn set(&mut self, key: &[Option<DyadicInterval>], value: T) -> Result<()> {
        let i = self.flat(key)?;
        self.data[i] = value;
        Ok(())
    }

    /// `a_R = ⟨f, h_R⟩ / |R|`.
    pub fn coeff(&self, rect: &DyadicRectangle) -> Result<&T> {
        let key: SpectrumKey = rect.sides().iter().copied().map(Some).collect();
        self.get(&key)
    }

    /// All entries in dense order, including the mean and mixed constant/Haar keys.
    pub fn entries(&self) -> impl Iterator<Item = (SpectrumKey, &T)> + '_ {
        self.data.iter().enumerate().map(move |(i, v)| {
            let idx = cell_multi_index(&self.resolution, i);
            (idx.into_iter().map(axis_side).collect(), v)
        })
    }

    /// Coefficients of pure Haar tensors `h_R`.
    pub fn rect_coeffs(&self) -> impl Iterator<Item = (DyadicRectangle, &T)> + '_ {
        self.entries().filter_map(|(key, v)| {
            let sides: Option<Vec<DyadicInterval>> = key.into_iter().collect();
            sides.map(|s| (DyadicRectangle::new(s), v))
        })
    }

    /// Inverse transform at the spectrum's own resolution.
    pub fn synthesize(&self) -> GridFunction<T> {
        let mut data = self.data.clone();
        let mut scratch = Vec::new();
        for axis in 0..self.resolution.dim() {
            for_each_fiber(&mut data, &self.resolution, axis, |f| synthesize_fiber(f, &mut scratch));
        }
        GridFunction::from_values(self.resolution.clone(), data).expect("same shape as spectrum")
    }

    /// Inverse transform refined to `resolution`.
    pub fn synthesize_at(&self, resolution: &ShapeVector) -> Result<GridFunction<T>> {
        self.synthesize().refine(resolution)
    }

    /// CSV rows `rect,coeff`; constant axes are written as `-`.
    pub fn write_csv<W: Write>(&self, out: W, skip_zero: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rect", "coeff"])?;
        for (key, v) in self.entries() {
            if skip_zero && v.is_zero() {
                continue;
            }
            let rect: Vec<String> =
                key.iter().map(|s| s.map_or_else(|| "-".to_string(), |i| i.to_string())).collect();
            w.write_record([rect.join(","), v.to_text()])?;
        }
        w.flush()?;
        Ok(())
    }
}


/// Unnormalized integer Haar sums `Σ_cells f · basis` of an integer grid: the entry
/// for `h_R` equals `2^{|m⃗|} ⟨f, h_R⟩`. Pair/difference passes keep everything integral.
#[derive(Debug, Clone, PartialEq)]
pub struct IntHaarSums {
    resolution: ShapeVector,
    data: Vec<i64>,
}

fn sum_diff_fiber(fiber: &mut [i64], scratch: &mut Vec<i64>) {
    let mut len = fiber.len();
    while len > 1 {
        let half = len / 2;
        scratch.clear();
        scratch.extend_from_slice(&fiber[..len]);
        for j in 0..half {
            let (l, r) = (scratch[2 * j], scratch[2 * j + 1]);
            fiber[j] = l + r;
            fiber[half + j] = r - l;
        }
        len = half;
    }
}

/// Integer synthesis from `L∞`-normalized integer coefficients (`avg ± det`, no halving).
pub(crate) fn synthesize_int(data: &mut [i64], resolution: &ShapeVector) {
    let mut scratch = Vec::new();
    for axis in 0..resolution.dim() {
        for_each_fiber(data, resolution, axis, |fiber| {
            let mut len = 1;
            while len < fiber.len() {
                scratch.clear();
                scratch.extend_from_slice(&fiber[..2 * len]);
                for j in 0..len {
                    fiber[2 * j] = scratch[j] - scratch[len + j];
                    fiber[2 * j + 1] = scratch[j] + scratch[len + j];
                }
                len *= 2;
            }
        });
    }
}

/// Dense flat index of a spectrum key at `resolution`.
pub(crate) fn spectrum_index(resolution: &ShapeVector, rect: &DyadicRectangle) -> Result<usize> {
    let mut flat = 0usize;
    for (side, &m) in rect.sides().iter().zip(resolution.entries()) {
        if side.level() >= m {
            return Err(HyperHaarError::InsufficientResolution {
                requested: resolution.entries().to_vec(),
                what: format!("coefficient of {rect}"),
            });
        }
        flat = (flat << m) | axis_index(&Some(*side));
    }
    Ok(flat)
}

impl IntHaarSums {
    pub fn new<I: crate::scalar::IntCell>(g: &GridFunction<I>) -> Self {
        let mut data: Vec<i64> = g.values().iter().map(|&v| v.into()).collect();
        let mut scratch = Vec::new();
        for axis in 0..g.dim() {
            for_each_fiber(&mut data, g.resolution(), axis, |f| sum_diff_fiber(f, &mut scratch));
        }
        Self { resolution: g.resolution().clone(), data }
    }

    pub fn resolution(&self) -> &ShapeVector {
        &self.resolution
    }

    /// `Σ_cells f`.
    pub fn total(&self) -> i64 {
        self.data[0]
    }

    /// `Σ_cells f · h_R`.
    pub fn get(&self, rect: &DyadicRectangle) -> Result<i64> {
        Ok(self.data[spectrum_index(&self.resolution, rect)?])
    }
}
