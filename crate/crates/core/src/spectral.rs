//! Circle grids, frequency boxes and partial-Fourier fields, with the DFT
//! kernels the rest of the crate is built on.
//!
//! Conventions: nodes are `t_j = 2πj/n`; circle coefficients are normalised
//! so that `h(t_j) = Σ_κ ĥ(κ) e^{iκ t_j}` with `κ = -n/2 .. n/2-1`, which
//! makes Parseval read `mean |h|² = Σ |ĥ(κ)|²`. The Nyquist mode `κ = -n/2`
//! is dropped by derivatives and primitives (exactness is claimed for
//! trigonometric polynomials of degree `< n/2` only).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{self, TAU};

pub use crate::math::freq_norm;

/// Uniform grid of `n` nodes on the time circle.
#[derive(Clone)]
pub struct CircleGrid {
    n: usize,
    // roots[m] = exp(-2πi m / n)
    roots: Vec<Complex64>,
}

impl CircleGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidGrid { n, reason: "need at least 8 nodes" });
        }
        if n % 2 != 0 {
            return Err(Error::InvalidGrid { n, reason: "node count must be even" });
        }
        let roots = (0..n)
            .map(|m| {
                let theta = -TAU * (m as f64) / (n as f64);
                Complex64::new(math::cos(theta), math::sin(theta))
            })
            .collect();
        Ok(Self { n, roots })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn step(&self) -> f64 {
        TAU / self.n as f64
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Frequency `κ` held at FFT slot `k`.
    #[inline]
    pub fn wavenumber(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(data.len(), n);
        let root = |m: usize| {
            let w = self.roots[m % n];
            if inverse {
                w.conj()
            } else {
                w
            }
        };
        if n.is_power_of_two() {
            let bits = n.trailing_zeros();
            for i in 0..n {
                let j = i.reverse_bits() >> (usize::BITS - bits);
                if j > i {
                    data.swap(i, j);
                }
            }
            let mut len = 2;
            while len <= n {
                let stride = n / len;
                let half = len / 2;
                for start in (0..n).step_by(len) {
                    for k in 0..half {
                        let w = root(k * stride);
                        let a = data[start + k];
                        let b = data[start + k + half] * w;
                        data[start + k] = a + b;
                        data[start + k + half] = a - b;
                    }
                }
                len <<= 1;
            }
        } else {
            let input = data.to_vec();
            for (k, out) in data.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, x) in input.iter().enumerate() {
                    acc += *x * root(j * k);
                }
                *out = acc;
            }
        }
    }
}

impl fmt::Debug for CircleGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleGrid").field("n", &self.n).finish()
    }
}

impl PartialEq for CircleGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

/// Circle Fourier coefficients of one time slice, stored in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleSpectrum {
    coeffs: Vec<Complex64>,
}

impl CircleSpectrum {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient `ĥ(κ)`; zero outside `-n/2 .. n/2-1`.
    pub fn get(&self, kappa: i64) -> Complex64 {
        let n = self.coeffs.len() as i64;
        if kappa < -n / 2 || kappa >= n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[kappa.rem_euclid(n) as usize]
    }

    /// `(κ, ĥ(κ))` in ascending `κ`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.coeffs.len() as i64;
        (-n / 2..n / 2).map(move |k| (k, self.coeffs[k.rem_euclid(n) as usize]))
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

fn check_samples<T>(grid: &CircleGrid, samples: &[T], context: &'static str) -> Result<()> {
    if samples.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            context,
            expected: grid.len(),
            found: samples.len(),
        });
    }
    Ok(())
}

fn check_finite(samples: &[Complex64], context: &'static str) -> Result<()> {
    if samples.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { context })
    }
}

/// Circle Fourier coefficients of `samples`.
pub fn analyze(grid: &CircleGrid, samples: &[Complex64]) -> Result<CircleSpectrum> {
    check_samples(grid, samples, "analyze")?;
    check_finite(samples, "analyze input")?;
    let mut coeffs = samples.to_vec();
    grid.transform(&mut coeffs, false);
    let scale = 1.0 / grid.len() as f64;
    for c in &mut coeffs {
        *c *= scale;
    }
    Ok(CircleSpectrum { coeffs })
}

pub fn synthesize(grid: &CircleGrid, spectrum: &CircleSpectrum) -> Result<Vec<Complex64>> {
    check_samples(grid, &spectrum.coeffs, "synthesize")?;
    let mut out = spectrum.coeffs.clone();
    grid.transform(&mut out, true);
    Ok(out)
}

pub(crate) fn to_complex(samples: &[f64]) -> Vec<Complex64> {
    samples.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// `d^order/dt^order` of a slice, spectrally.
pub fn derivative(grid: &CircleGrid, samples: &[Complex64], order: u32) -> Result<Vec<Complex64>> {
    check_samples(grid, samples, "derivative")?;
    let mut work = samples.to_vec();
    derivative_in_place(grid, &mut work, order);
    Ok(work)
}

pub(crate) fn derivative_in_place(grid: &CircleGrid, work: &mut [Complex64], order: u32) {
    if order == 0 {
        return;
    }
    let n = grid.len();
    grid.transform(work, false);
    let scale = 1.0 / n as f64;
    for (k, c) in work.iter_mut().enumerate() {
        if k == n / 2 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        let kappa = grid.wavenumber(k) as f64;
        let mut factor = Complex64::new(scale, 0.0);
        for _ in 0..order {
            factor *= Complex64::new(0.0, kappa);
        }
        *c *= factor;
    }
    grid.transform(work, true);
}

pub fn derivative_real(grid: &CircleGrid, samples: &[f64], order: u32) -> Result<Vec<f64>> {
    let out = derivative(grid, &to_complex(samples), order)?;
    Ok(out.into_iter().map(|z| z.re).collect())
}

/// A primitive `H` of periodic samples `h`, anchored so `H(t_base) = 0`.
///
/// `H(t) = h₀ (t - t_base) + P(t) - P(t_base)` where `P` is the periodic
/// part. Values beyond one period are reached through [`Primitive::lifted`],
/// which applies `H(t + 2π) = H(t) + 2π h₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub samples: Vec<f64>,
    /// Mean of `h`, i.e. the slope of the linear ramp.
    pub slope: f64,
    pub base: usize,
}

impl Primitive {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `H(t + 2π) - H(t)`.
    #[inline]
    pub fn period_increment(&self) -> f64 {
        TAU * self.slope
    }

    /// `H` at node index `i` of the lifted grid (any `i ≥ 0`).
    #[inline]
    pub fn lifted(&self, i: usize) -> f64 {
        let n = self.samples.len();
        self.samples[i % n] + (i / n) as f64 * self.period_increment()
    }

    /// Argmax over one period, smallest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.samples.iter().enumerate() {
            if v > self.samples[best] {
                best = i;
            }
        }
        best
    }

    /// Scale every sample and the slope by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|v| v * factor).collect(),
            slope: self.slope * factor,
            base: self.base,
        }
    }
}

pub fn spectral_primitive(grid: &CircleGrid, h: &[f64], base: usize) -> Result<Primitive> {
    check_samples(grid, h, "spectral_primitive")?;
    if base >= grid.len() {
        return Err(Error::NodeOutOfRange { index: base, n: grid.len() });
    }
    if !h.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite { context: "spectral_primitive input" });
    }
    let n = grid.len();
    let mut work = to_complex(h);
    grid.transform(&mut work, false);
    let scale = 1.0 / n as f64;
    let mean = work[0].re * scale;
    work[0] = Complex64::new(0.0, 0.0);
    work[n / 2] = Complex64::new(0.0, 0.0);
    for (k, c) in work.iter_mut().enumerate().skip(1) {
        let kappa = grid.wavenumber(k) as f64;
        *c *= scale / Complex64::new(0.0, kappa);
    }
    grid.transform(&mut work, true);
    let p_base = work[base].re;
    let t_base = grid.node(base);
    let samples = work
        .iter()
        .enumerate()
        .map(|(j, p)| mean * (grid.node(j) - t_base) + (p.re - p_base))
        .collect();
    Ok(Primitive { samples, slope: mean, base })
}

/// All `ξ ∈ Zᴺ` with `|ξ| ≤ K` (Euclidean), in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBox {
    dim: usize,
    cutoff: f64,
    freqs: Vec<Vec<i64>>,
}

impl FrequencyBox {
    pub fn new(dim: usize, cutoff: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidBox { reason: "dimension must be positive" });
        }
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::InvalidBox { reason: "cutoff must be a positive real" });
        }
        let r = math::floor(cutoff) as i64;
        let k2 = cutoff * cutoff;
        let mut freqs = Vec::new();
        let mut cur = vec![-r; dim];
        loop {
            let s: i64 = cur.iter().map(|k| k * k).sum();
            if (s as f64) <= k2 {
                freqs.push(cur.clone());
            }
            // odometer increment, last coordinate fastest => lexicographic
            let mut d = dim;
            loop {
                if d == 0 {
                    return Ok(Self { dim, cutoff, freqs });
                }
                d -= 1;
                if cur[d] < r {
                    cur[d] += 1;
                    for c in cur.iter_mut().skip(d + 1) {
                        *c = -r;
                    }
                    break;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn freqs(&self) -> &[Vec<i64>] {
        &self.freqs
    }

    pub fn freq(&self, idx: usize) -> &[i64] {
        &self.freqs[idx]
    }

    pub fn index_of(&self, xi: &[i64]) -> Option<usize> {
        self.freqs.binary_search_by(|f| f.as_slice().cmp(xi)).ok()
    }

    pub fn nonzero_count(&self) -> usize {
        self.freqs.iter().filter(|f| f.iter().any(|&k| k != 0)).count()
    }
}

/// Partial-Fourier data `F[j, ξ]` on a grid and box. Slices are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    grid: CircleGrid,
    freq_box: FrequencyBox,
    data: Vec<Complex64>,
}

impl FourierField {
    pub fn zeros(grid: &CircleGrid, freq_box: &FrequencyBox) -> Self {
        Self {
            grid: grid.clone(),
            freq_box: freq_box.clone(),
            data: vec![Complex64::new(0.0, 0.0); grid.len() * freq_box.len()],
        }
    }

    /// Build from `value(t, ξ)`.
    pub fn from_fn<F>(grid: &CircleGrid, freq_box: &FrequencyBox, mut value: F) -> Result<Self>
    where
        F: FnMut(f64, &[i64]) -> Complex64,
    {
        let mut field = Self::zeros(grid, freq_box);
        let n = grid.len();
        for (idx, xi) in freq_box.freqs().iter().enumerate() {
            for j in 0..n {
                field.data[idx * n + j] = value(grid.node(j), xi);
            }
        }
        field.validate()?;
        Ok(field)
    }

    pub fn from_slices(
        grid: &CircleGrid,
        freq_box: &FrequencyBox,
        slices: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if slices.len() != freq_box.len() {
            return Err(Error::ShapeMismatch {
                context: "field slices",
                expected: freq_box.len(),
                found: slices.len(),
            });
        }
        let mut data = Vec::with_capacity(grid.len() * freq_box.len());
        for s in slices {
            check_samples(grid, &s, "field slice")?;
            data.extend(s);
        }
        let field = Self { grid: grid.clone(), freq_box: freq_box.clone(), data };
        field.validate()?;
        Ok(field)
    }

    pub fn validate(&self) -> Result<()> {
        check_finite(&self.data, "field")
    }

    pub fn grid(&self) -> &CircleGrid {
        &self.grid
    }

    pub fn freq_box(&self) -> &FrequencyBox {
        &self.freq_box
    }

    pub fn slice(&self, idx: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.data[idx * n..(idx + 1) * n]
    }

    pub fn slice_mut(&mut self, idx: usize) -> &mut [Complex64] {
        let n = self.grid.len();
        &mut self.data[idx * n..(idx + 1) * n]
    }

    pub fn slice_at(&self, xi: &[i64]) -> Option<&[Complex64]> {
        self.freq_box.index_of(xi).map(|i| self.slice(i))
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn slice_sup(&self, idx: usize) -> f64 {
        self.slice(idx).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero_slice(&self, idx: usize) -> bool {
        self.slice(idx).iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Analyse then synthesise every slice.
    pub fn round_trip(&self) -> Result<Self> {
        let mut out = self.clone();
        for idx in 0..self.freq_box.len() {
            let spec = analyze(&self.grid, self.slice(idx))?;
            let back = synthesize(&self.grid, &spec)?;
            out.slice_mut(idx).copy_from_slice(&back);
        }
        Ok(out)
    }
}

/// Least-squares line `y = slope·x + intercept`, with RMS residual.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    (slope, intercept, math::sqrt(ss / m))
}

/// Power-law fit `sup_t |D_t^α F(·,ξ)| ≈ C (1+|ξ|)^{-k}` over nonzero `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Fitted `k`; `+∞` when every slice vanishes.
    pub exponent: f64,
    pub constant: f64,
    /// RMS residual in `(log(1+|ξ|), log sup)` coordinates.
    pub residual: f64,
    /// Number of non-vanishing slices used.
    pub points: usize,
}

impl DecayFit {
    pub fn is_vanishing(&self) -> bool {
        self.exponent == f64::INFINITY
    }
}

pub fn decay_fit(field: &FourierField, order: u32) -> Result<DecayFit> {
    let freq_box = field.freq_box();
    let nonzero = freq_box.nonzero_count();
    if nonzero < 8 {
        return Err(Error::TooFewFrequencies { required: 8, found: nonzero });
    }
    let grid = field.grid();
    let deriv_gain = math::powf(grid.len() as f64 / 2.0, order as f64);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (idx, xi) in freq_box.freqs().iter().enumerate() {
        if xi.iter().all(|&k| k == 0) {
            continue;
        }
        let slice = field.slice(idx);
        let base_sup = slice.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if base_sup == 0.0 {
            continue;
        }
        let sup = if order == 0 {
            base_sup
        } else {
            let d = derivative(grid, slice, order)?;
            let s = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if s <= 1e-12 * deriv_gain * base_sup {
                continue;
            }
            s
        };
        xs.push(math::ln1p(freq_norm(xi)));
        ys.push(math::ln(sup));
    }
    match xs.len() {
        0 => Ok(DecayFit {
            exponent: f64::INFINITY,
            constant: 0.0,
            residual: 0.0,
            points: 0,
        }),
        1 => Err(Error::TooFewFrequencies { required: 2, found: 1 }),
        _ => {
            let (slope, intercept, residual) = line_fit(&xs, &ys);
            Ok(DecayFit {
                exponent: -slope,
                constant: math::exp(intercept),
                residual,
                points: xs.len(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_validation() {
        assert!(CircleGrid::new(6).is_err());
        assert!(CircleGrid::new(9).is_err());
        let g = CircleGrid::new(8).unwrap();
        assert!((g.step() * 8.0 - TAU).abs() < 1e-15);
    }

    #[test]
    fn pure_mode_and_constant() {
        for n in [16usize, 24] {
            let g = CircleGrid::new(n).unwrap();
            let h: Vec<_> = g.nodes().iter().map(|&t| c(math::cos(t), math::sin(t))).collect();
            let s = analyze(&g, &h).unwrap();
            for (k, v) in s.iter() {
                let want = if k == 1 { 1.0 } else { 0.0 };
                assert!((v - c(want, 0.0)).norm() < 1e-13, "n={n} k={k} {v}");
            }
            let ones = vec![c(1.0, 0.0); n];
            let s = analyze(&g, &ones).unwrap();
            assert!((s.get(0) - c(1.0, 0.0)).norm() < 1e-15);
            assert!(s.iter().filter(|(k, _)| *k != 0).all(|(_, v)| v.norm() < 1e-15));
        }
    }

    #[test]
    fn rejects_non_finite() {
        let g = CircleGrid::new(8).unwrap();
        let mut h = vec![c(0.0, 0.0); 8];
        h[3] = c(f64::NAN, 0.0);
        assert!(matches!(analyze(&g, &h), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn primitive_examples() {
        let g = CircleGrid::new(32).unwrap();
        let t = g.nodes();
        let h: Vec<f64> = t.iter().map(|&x| math::cos(x)).collect();
        let p = spectral_primitive(&g, &h, 0).unwrap();
        for (j, &x) in t.iter().enumerate() {
            assert!((p.samples[j] - math::sin(x)).abs() < 1e-14);
        }
        let p = spectral_primitive(&g, &vec![1.0; 32], 0).unwrap();
        for (j, &x) in t.iter().enumerate() {
            assert!((p.samples[j] - x).abs() < 1e-13);
        }
        let h: Vec<f64> = t.iter().map(|&x| math::sin(x) + 1.0).collect();
        let p = spectral_primitive(&g, &h, 0).unwrap();
        assert!((p.lifted(32) - p.lifted(0) - TAU).abs() < 1e-13);
    }

    #[test]
    fn primitive_basepoint_anchor() {
        let g = CircleGrid::new(16).unwrap();
        let h: Vec<f64> = g.nodes().iter().map(|&x| 0.3 + math::sin(2.0 * x)).collect();
        let p = spectral_primitive(&g, &h, 5).unwrap();
        assert_eq!(p.samples[5], 0.0);
        assert!(spectral_primitive(&g, &h, 16).is_err());
    }

    #[test]
    fn box_enumeration() {
        let b = FrequencyBox::new(1, 3.0).unwrap();
        assert_eq!(b.freqs(), &[vec![-3], vec![-2], vec![-1], vec![0], vec![1], vec![2], vec![3]]);
        let b = FrequencyBox::new(2, 1.5).unwrap();
        assert_eq!(b.len(), 9);
        assert_eq!(b.freq(0), &[-1, -1]);
        assert_eq!(b.index_of(&[0, 0]), Some(4));
        let b = FrequencyBox::new(2, 2.0).unwrap();
        // 9 points of the 3x3 square plus (±2,0), (0,±2)
        assert_eq!(b.len(), 13);
        assert!(FrequencyBox::new(1, 0.0).is_err());
    }

    #[test]
    fn decay_fit_planted() {
        let g = CircleGrid::new(16).unwrap();
        let b = FrequencyBox::new(1, 40.0).unwrap();
        let f = FourierField::from_fn(&g, &b, |t, xi| {
            let s = math::powf(1.0 + freq_norm(xi), -5.0);
            c(s * math::cos(t), s * math::sin(t))
        })
        .unwrap();
        let fit = decay_fit(&f, 0).unwrap();
        assert!((fit.exponent - 5.0).abs() < 0.05, "{fit:?}");
        assert!(fit.residual < 1e-10);
        assert!((fit.constant - 1.0).abs() < 1e-8);
    }

    #[test]
    fn decay_fit_vanishing_derivative() {
        let g = CircleGrid::new(16).unwrap();
        let b = FrequencyBox::new(1, 20.0).unwrap();
        let f = FourierField::from_fn(&g, &b, |_, xi| c(math::powf(1.0 + freq_norm(xi), -2.0), 0.0))
            .unwrap();
        let fit = decay_fit(&f, 1).unwrap();
        assert!(fit.is_vanishing());
        let fit0 = decay_fit(&f, 0).unwrap();
        assert!((fit0.exponent - 2.0).abs() < 1e-10);
        let small = FrequencyBox::new(1, 3.0).unwrap();
        let f = FourierField::zeros(&g, &small);
        assert!(matches!(decay_fit(&f, 0), Err(Error::TooFewFrequencies { .. })));
    }
}
