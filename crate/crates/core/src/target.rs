//! Closed-form target functions with exact derivatives.
//!
//! A univariate target `g` lives on an interval; a radial target on the unit
//! ball is `f(x) = g*(|x|^2)` with `g*` defined on `[0, 1]`.

use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{factorial_f64, Precision, Real};
use crate::poly::Smooth;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetFn {
    /// `sum_i c_i t^i`.
    Polynomial { coeffs: Vec<f64> },
    /// `amplitude * sin(frequency * t + phase)`.
    Sine {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// `amplitude * exp(rate * t)`.
    Exp { amplitude: f64, rate: f64 },
    /// `slope * |t - center|`; derivatives of order two and more vanish
    /// away from the kink.
    Kink { center: f64, slope: f64 },
    /// `inner(factor * t)`.
    Dilated { inner: Box<TargetFn>, factor: f64 },
}

impl TargetFn {
    pub fn identity() -> Self {
        TargetFn::Polynomial {
            coeffs: vec![0.0, 1.0],
        }
    }

    pub fn dilate(self, factor: f64) -> Self {
        TargetFn::Dilated {
            inner: Box::new(self),
            factor,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TargetFn::Polynomial { coeffs } => coeffs.iter().all(|c| *c == 0.0),
            TargetFn::Sine { amplitude, .. } | TargetFn::Exp { amplitude, .. } => *amplitude == 0.0,
            TargetFn::Kink { slope, .. } => *slope == 0.0,
            TargetFn::Dilated { inner, .. } => inner.is_zero(),
        }
    }

    pub fn derivative_f64(&self, k: usize, t: f64) -> f64 {
        match self {
            TargetFn::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(k)
                .map(|(i, c)| c * falling(i, k) * t.powi((i - k) as i32))
                .sum(),
            TargetFn::Sine {
                amplitude,
                frequency,
                phase,
            } => {
                let shift = k as f64 * std::f64::consts::FRAC_PI_2;
                amplitude * frequency.powi(k as i32) * (frequency * t + phase + shift).sin()
            }
            TargetFn::Exp { amplitude, rate } => amplitude * rate.powi(k as i32) * (rate * t).exp(),
            TargetFn::Kink { center, slope } => match k {
                0 => slope * (t - center).abs(),
                1 => slope * (t - center).signum(),
                _ => 0.0,
            },
            TargetFn::Dilated { inner, factor } => factor.powi(k as i32) * inner.derivative_f64(k, factor * t),
        }
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.derivative_f64(0, t)
    }

    pub fn derivative(&self, k: usize, t: &Real) -> Real {
        let p = t.prec();
        match self {
            TargetFn::Polynomial { coeffs } => {
                let mut acc = Float::new(p);
                for (i, c) in coeffs.iter().enumerate().skip(k).rev() {
                    acc *= t;
                    acc += Float::with_val(p, *c) * falling(i, k);
                }
                acc
            }
            TargetFn::Sine {
                amplitude,
                frequency,
                phase,
            } => {
                let shift = Float::with_val(p, rug::float::Constant::Pi) * k as u64 / 2u32;
                let arg = Float::with_val(p, t * *frequency) + *phase + shift;
                let scale = Float::with_val(p, *frequency).pow(k as u32) * *amplitude;
                arg.sin() * scale
            }
            TargetFn::Exp { amplitude, rate } => {
                let scale = Float::with_val(p, *rate).pow(k as u32) * *amplitude;
                Float::with_val(p, t * *rate).exp() * scale
            }
            TargetFn::Kink { center, slope } => {
                let d = Float::with_val(p, t - *center);
                match k {
                    0 => d.abs() * *slope,
                    1 => {
                        if d.is_zero() {
                            Float::new(p)
                        } else {
                            Float::with_val(p, d.signum()) * *slope
                        }
                    }
                    _ => Float::new(p),
                }
            }
            TargetFn::Dilated { inner, factor } => {
                let scale = Float::with_val(p, *factor).pow(k as u32);
                inner.derivative(k, &Float::with_val(p, t * *factor)) * scale
            }
        }
    }

    pub fn eval(&self, t: &Real) -> Real {
        self.derivative(0, t)
    }

    /// `max |g|` over `samples` points of `[lo, hi]`.
    pub fn sup_abs(&self, lo: f64, hi: f64, samples: usize) -> f64 {
        let n = samples.max(2);
        (0..n)
            .map(|i| self.eval_f64(lo + (hi - lo) * i as f64 / (n - 1) as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// `i (i-1) ... (i-k+1)`.
fn falling(i: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (i - j) as f64)
}

impl Smooth for TargetFn {
    fn derivative_at(&self, k: usize, t: &Real) -> Result<Real> {
        Ok(self.derivative(k, t))
    }
}

/// A target `g` with its smoothness `r = s + v` and Hölder constant `c0` for
/// `g^(s)` on the given interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnivariateTarget {
    pub g: TargetFn,
    pub s: usize,
    pub v: f64,
    pub c0: f64,
    pub lo: f64,
    pub hi: f64,
}

impl UnivariateTarget {
    pub fn new(g: TargetFn, s: usize, v: f64, c0: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::arg(format!("Hölder exponent v = {v} must lie in (0, 1]")));
        }
        if !(c0 > 0.0) {
            return Err(Error::arg("Hölder constant must be positive"));
        }
        if !(lo < hi) {
            return Err(Error::arg("empty domain"));
        }
        Ok(UnivariateTarget { g, s, v, c0, lo, hi })
    }

    pub fn r(&self) -> f64 {
        self.s as f64 + self.v
    }

    /// Largest `|g^(s)(t) - g^(s)(t')| / |t - t'|^v` over a uniform grid.
    pub fn holder_estimate(&self, samples: usize) -> f64 {
        let n = samples.max(2);
        let pts: Vec<f64> = (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
            .collect();
        let vals: Vec<f64> = pts.iter().map(|&t| self.g.derivative_f64(self.s, t)).collect();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let q = (vals[i] - vals[j]).abs() / (pts[j] - pts[i]).powf(self.v);
                best = best.max(q);
            }
        }
        best
    }

    /// Degree-`s` Taylor coefficients `g^(l)(t0) / l!` at the precision of `t0`.
    pub fn taylor_coeffs(&self, t0: &Real) -> Vec<Real> {
        let p = Precision::new(t0.prec()).expect("valid precision");
        (0..=self.s)
            .map(|l| self.g.derivative(l, t0) / p.real(factorial_f64(l)))
            .collect()
    }
}

/// `f(x) = g*(|x|^2)` on the unit ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialTarget {
    pub profile: TargetFn,
    pub s: usize,
    pub v: f64,
    pub c0: f64,
}

impl RadialTarget {
    pub fn new(profile: TargetFn, s: usize, v: f64, c0: f64) -> Result<Self> {
        UnivariateTarget::new(profile.clone(), s, v, c0, 0.0, 1.0)?;
        Ok(RadialTarget { profile, s, v, c0 })
    }

    /// `|x|^2`: profile `t`, Lipschitz with constant 1.
    pub fn squared_norm() -> Self {
        RadialTarget {
            profile: TargetFn::identity(),
            s: 0,
            v: 1.0,
            c0: 1.0,
        }
    }

    pub fn r(&self) -> f64 {
        self.s as f64 + self.v
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.profile.eval_f64(x.iter().map(|v| v * v).sum())
    }

    pub fn eval(&self, x: &[Real]) -> Real {
        let p = x.first().map_or(53, |v| v.prec());
        let mut n2 = Float::new(p);
        for v in x {
            n2 += Float::with_val(p, v * v);
        }
        self.profile.eval(&n2)
    }

    /// The univariate target `g(t) = g*(2t)` on `[0, 1/2]`; the Hölder
    /// constant picks up the factor `2^r`.
    pub fn half_interval_target(&self) -> UnivariateTarget {
        UnivariateTarget {
            g: self.profile.clone().dilate(2.0),
            s: self.s,
            v: self.v,
            c0: self.c0 * 2f64.powf(self.r()),
            lo: 0.0,
            hi: 0.5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        let g = TargetFn::Polynomial {
            coeffs: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(g.derivative_f64(0, 2.0), 17.0);
        assert_eq!(g.derivative_f64(1, 2.0), 14.0);
        assert_eq!(g.derivative_f64(2, 2.0), 6.0);
        assert_eq!(g.derivative_f64(3, 2.0), 0.0);
        let p = Precision::DEFAULT;
        assert_eq!(g.derivative(1, &p.real(2.0)).to_f64(), 14.0);
    }

    #[test]
    fn dilation_rescales_derivatives() {
        let g = TargetFn::Sine {
            amplitude: 1.0,
            frequency: 1.0,
            phase: 0.0,
        }
        .dilate(2.0);
        assert!((g.derivative_f64(1, 0.0) - 2.0).abs() < 1e-15);
        let p = Precision::DEFAULT;
        assert!((g.derivative(2, &p.real(0.3)).to_f64() + 4.0 * 0.6f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn half_interval_target_of_square_norm() {
        let t = RadialTarget::squared_norm().half_interval_target();
        assert_eq!(t.g.eval_f64(0.25), 0.5);
        assert_eq!(t.c0, 2.0);
        assert!(t.holder_estimate(200) <= 2.0 + 1e-12);
    }
}
