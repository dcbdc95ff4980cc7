//! Complex numbers and sums carried as `mantissa · e^{scale}` so that
//! kernels like `e^{i(C(s) - C(t))}`, whose modulus is `e^{B(t) - B(s)}`,
//! never overflow before the final combination.

use num_complex::Complex64;

use crate::math;

/// Largest log-modulus converted back to an ordinary `f64` complex.
pub const OVERFLOW_GUARD: f64 = 709.0;

/// `e^{log_mag} · e^{i phase}`; `log_mag = -∞` is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub log_mag: f64,
    /// In `(-π, π]`.
    pub phase: f64,
}

fn wrap_phase(p: f64) -> f64 {
    let w = p - math::TAU * math::round(p / math::TAU);
    if w <= -math::PI {
        w + math::TAU
    } else {
        w
    }
}

impl LogComplex {
    pub const ZERO: Self = Self { log_mag: f64::NEG_INFINITY, phase: 0.0 };
    pub const ONE: Self = Self { log_mag: 0.0, phase: 0.0 };

    pub fn new(log_mag: f64, phase: f64) -> Self {
        Self { log_mag, phase: wrap_phase(phase) }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return Self::ZERO;
        }
        Self { log_mag: math::ln(z.norm()), phase: z.arg() }
    }

    /// `e^{i z}` for complex `z`.
    pub fn exp_i(z: Complex64) -> Self {
        Self::new(-z.im, z.re)
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_mag + rhs.log_mag, self.phase + rhs.phase)
    }

    pub fn inv(self) -> Self {
        Self::new(-self.log_mag, -self.phase)
    }

    /// `None` when the modulus exceeds the overflow guard.
    pub fn to_complex(self) -> Option<Complex64> {
        if self.log_mag > OVERFLOW_GUARD {
            return None;
        }
        Some(self.scaled_by(0.0))
    }

    /// `self · e^{-shift}` as an ordinary complex number.
    pub fn scaled_by(self, shift: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(math::exp(self.log_mag - shift), self.phase)
    }
}

/// Running sum `mantissa · e^{scale}` with log-sum-exp rescaling; the
/// mantissa of the largest term so far has modulus of order one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledSum {
    pub mantissa: Complex64,
    pub scale: f64,
}

impl Default for ScaledSum {
    fn default() -> Self {
        Self::ZERO
    }
}

impl ScaledSum {
    pub const ZERO: Self = Self { mantissa: Complex64::new(0.0, 0.0), scale: f64::NEG_INFINITY };

    pub fn term(value: Complex64, log_scale: f64) -> Self {
        Self { mantissa: value, scale: log_scale }
    }

    pub fn is_zero(&self) -> bool {
        self.scale == f64::NEG_INFINITY
    }

    /// Adds `value · e^{log_scale}`.
    pub fn add_term(&mut self, value: Complex64, log_scale: f64) {
        if log_scale == f64::NEG_INFINITY {
            return;
        }
        if self.is_zero() {
            self.mantissa = value;
            self.scale = log_scale;
        } else if log_scale > self.scale {
            self.mantissa = self.mantissa * math::exp(self.scale - log_scale) + value;
            self.scale = log_scale;
        } else {
            self.mantissa += value * math::exp(log_scale - self.scale);
        }
    }

    pub fn plus(mut self, other: Self) -> Self {
        self.add_term(other.mantissa, other.scale);
        self
    }

    /// Multiplies by `factor · e^{log_factor}`.
    pub fn times(self, factor: Complex64, log_factor: f64) -> Self {
        if self.is_zero() {
            return self;
        }
        Self { mantissa: self.mantissa * factor, scale: self.scale + log_factor }
    }

    pub fn log_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let m = self.mantissa.norm();
        if m == 0.0 {
            f64::NEG_INFINITY
        } else {
            math::ln(m) + self.scale
        }
    }

    /// `self · e^{-shift}` as an ordinary complex number.
    pub fn value_shifted(&self, shift: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.mantissa * math::exp(self.scale - shift)
    }

    /// `None` when `log|self|` exceeds the overflow guard.
    pub fn value(&self) -> Option<Complex64> {
        if self.log_abs() > OVERFLOW_GUARD {
            return None;
        }
        Some(self.value_shifted(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_rescaling() {
        let mut s = ScaledSum::ZERO;
        s.add_term(Complex64::new(1.0, 0.0), 800.0);
        s.add_term(Complex64::new(1.0, 0.0), 800.0 + math::ln(3.0));
        assert!((s.log_abs() - (800.0 + math::ln(4.0))).abs() < 1e-12);
        assert!(s.value().is_none());
        let v = s.times(Complex64::new(1.0, 0.0), -800.0).value().unwrap();
        assert!((v.re - 4.0).abs() < 1e-12);
    }

    #[test]
    fn exp_i_modulus() {
        let z = LogComplex::exp_i(Complex64::new(7.0, -1000.0));
        assert_eq!(z.log_mag, 1000.0);
        assert!(z.to_complex().is_none());
        let w = z.mul(LogComplex::new(-999.0, 0.0)).to_complex().unwrap();
        assert!((w.norm() - core::f64::consts::E).abs() < 1e-12);
        assert!((w.arg() - wrap_phase(7.0)).abs() < 1e-12);
    }
}
