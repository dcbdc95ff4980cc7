#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use torsolv_core::spectral::CircleGrid;
use torsolv_core::symbol::ModeProfile;
use torsolv_core::trig::TrigPoly;

pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Zero-mean trigonometric polynomial of the given degree with coefficients
/// in `[-amp, amp]`.
pub fn random_trig(rng: &mut ChaCha8Rng, degree: usize, amp: f64) -> TrigPoly {
    TrigPoly {
        constant: 0.0,
        cos: (0..degree).map(|_| rng.gen_range(-amp..amp)).collect(),
        sin: (0..degree).map(|_| rng.gen_range(-amp..amp)).collect(),
    }
}

pub fn sample(grid: &CircleGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    grid.nodes().iter().map(|&t| f(t)).collect()
}

pub fn profile(grid: &CircleGrid, xi: &[i64], a: &TrigPoly, b: &TrigPoly, eps_z: f64, base: usize) -> ModeProfile {
    ModeProfile::from_samples(grid, xi, sample(grid, |t| a.eval(t)), sample(grid, |t| b.eval(t)), eps_z, base).unwrap()
}

/// Random band-limited samples `Σ_{|κ| ≤ band} f̂_κ e^{iκt}`.
pub fn random_band_limited(rng: &mut ChaCha8Rng, grid: &CircleGrid, band: i64) -> Vec<Complex64> {
    let coefs: Vec<(i64, Complex64)> = (-band..=band)
        .map(|k| (k, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    grid.nodes()
        .iter()
        .map(|&t| coefs.iter().map(|&(k, c)| c * Complex64::from_polar(1.0, k as f64 * t)).sum())
        .collect()
}

pub fn sup(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
