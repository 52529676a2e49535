//! Exact conversion of polynomials on `[-1, 1]` into one-hidden-layer
//! networks `sum_j a_j phi(w_j t + theta_j)`.
//!
//! The leading monomial `u t^k` is traded for a single neuron
//! `u k! / (mu^k phi^(k)(theta0)) * phi(mu t + theta0)`; Taylor expansion of
//! that neuron around `theta0` reproduces `u t^k` plus lower-order terms,
//! which are subtracted from the polynomial, and the next-lower degree is
//! processed. The scale `mu` is chosen so that the Taylor remainder of each
//! step stays below its share of the error budget.

use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::activation::{Activation, SmoothnessProfile};
use crate::error::{Error, Result};
use crate::numeric::{factorial, simpson, Precision, Real};

/// Anything with real derivatives of every order we ask for.
pub trait Smooth {
    fn derivative_at(&self, k: usize, t: &Real) -> Result<Real>;
}

impl Smooth for Activation {
    fn derivative_at(&self, k: usize, t: &Real) -> Result<Real> {
        self.derivative(k, t)
    }
}

/// Integral form of the Taylor remainder,
/// `(1/(l-1)!) int_{t0}^{t} (psi^(l)(u) - psi^(l)(t0)) (t - u)^(l-1) du`,
/// evaluated with composite Simpson on `panels` panels. Requires `l >= 1`.
pub fn taylor_remainder<S: Smooth + ?Sized>(
    psi: &S,
    l: usize,
    t0: &Real,
    t: &Real,
    panels: usize,
) -> Result<Real> {
    if l == 0 {
        return Err(Error::arg("remainder order must be at least 1"));
    }
    let prec = Precision::new(t.prec().max(t0.prec()))?;
    let base = psi.derivative_at(l, t0)?;
    let integral = simpson(
        |u| {
            let d = Float::with_val(prec.bits(), psi.derivative_at(l, u)? - &base);
            let w = Float::with_val(prec.bits(), t - u);
            Ok(d * Float::with_val(prec.bits(), w.pow(l as u32 - 1)))
        },
        t0,
        t,
        panels,
    )?;
    Ok(integral / factorial(l - 1, prec))
}

/// Dense polynomial with coefficients in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<Real>,
}

impl Poly {
    pub fn new(coeffs: Vec<Real>) -> Self {
        Poly { coeffs }
    }

    pub fn from_f64(coeffs: &[f64], prec: Precision) -> Self {
        Poly {
            coeffs: coeffs.iter().map(|&c| prec.real(c)).collect(),
        }
    }

    /// `t^k`.
    pub fn monomial(k: usize, prec: Precision) -> Self {
        let mut coeffs = vec![prec.zero(); k + 1];
        coeffs[k] = prec.int(1);
        Poly { coeffs }
    }

    /// Index of the highest nonzero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    pub fn eval(&self, t: &Real) -> Real {
        let prec = t.prec();
        let mut acc = Float::new(prec);
        for c in self.coeffs.iter().rev() {
            acc *= t;
            acc += c;
        }
        acc
    }

    pub fn scaled(&self, factor: &Real) -> Poly {
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Float::with_val(c.prec(), c * factor))
                .collect(),
        }
    }
}

/// One hidden unit `a phi(w t + theta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Neuron {
    pub a: Real,
    pub w: Real,
    pub theta: Real,
}

impl Neuron {
    pub fn eval(&self, act: &Activation, t: &Real) -> Real {
        let prec = t.prec();
        let arg = Float::with_val(prec, &self.w * t) + &self.theta;
        Float::with_val(prec, &self.a * act.eval(&arg))
    }
}

/// `t -> sum_j a_j phi(w_j t + theta_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShallowNet1D {
    pub activation: Activation,
    pub terms: Vec<Neuron>,
}

impl ShallowNet1D {
    pub fn eval(&self, t: &Real) -> Real {
        let mut acc = Float::new(t.prec());
        for n in &self.terms {
            acc += n.eval(&self.activation, t);
        }
        acc
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|n| n.a.to_f64() * self.activation.eval_f64(n.w.to_f64() * t + n.theta.to_f64()))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `sum_j |a_j w_j|`, a Lipschitz bound since `|phi'| <= 1`.
    pub fn lipschitz_bound(&self) -> Real {
        let prec = self.terms.first().map_or(53, |n| n.a.prec());
        let mut acc = Float::new(prec);
        for n in &self.terms {
            acc += Float::with_val(prec, &n.a * &n.w).abs();
        }
        acc
    }

    pub fn max_abs_coefficient(&self) -> Real {
        let prec = self.terms.first().map_or(53, |n| n.a.prec());
        let mut m = Float::new(prec);
        for n in &self.terms {
            let v = Float::with_val(prec, n.a.abs_ref());
            if v > m {
                m = v;
            }
        }
        m
    }

    /// Same network evaluated at `t - shift`.
    pub fn shifted(&self, shift: &Real) -> ShallowNet1D {
        ShallowNet1D {
            activation: self.activation,
            terms: self
                .terms
                .iter()
                .map(|n| Neuron {
                    a: n.a.clone(),
                    w: n.w.clone(),
                    theta: Float::with_val(n.theta.prec(), &n.theta - Float::with_val(n.w.prec(), &n.w * shift)),
                })
                .collect(),
        }
    }
}

/// Serialisable view of a neuron, used by reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeuronRecord {
    pub a: String,
    pub w: String,
    pub theta: String,
}

impl From<&Neuron> for NeuronRecord {
    fn from(n: &Neuron) -> Self {
        NeuronRecord {
            a: n.a.to_string_radix(10, None),
            w: n.w.to_string_radix(10, None),
            theta: n.theta.to_string_radix(10, None),
        }
    }
}

/// Converter bound to one activation, anchor `theta0` and precision.
#[derive(Clone, Debug)]
pub struct PolyBridge {
    act: Activation,
    theta0: Real,
    profile: SmoothnessProfile,
    prec: Precision,
    /// `phi^(i)(theta0)` for `i <= s0`.
    at_theta0: Vec<Real>,
    /// Padded `max |phi^(k+1)|` on `[theta0 - 1, theta0 + 1]`, index `k`.
    local_bounds: Vec<f64>,
}

impl PolyBridge {
    pub fn new(act: Activation, theta0: f64, profile: SmoothnessProfile, prec: Precision) -> Result<Self> {
        let t0 = prec.real(theta0);
        let mut at_theta0 = Vec::with_capacity(profile.s0 + 1);
        for i in 0..=profile.s0 {
            let v = act.derivative(i, &t0)?;
            if v.is_zero() {
                return Err(Error::arg(format!(
                    "phi^({i}) vanishes at theta0 = {theta0}; pick another anchor"
                )));
            }
            at_theta0.push(v);
        }
        let mut local_bounds = Vec::with_capacity(profile.s0 + 1);
        for k in 0..=profile.s0 {
            let m = act.sup_abs_derivative(k + 1, theta0 - 1.0, theta0 + 1.0, 10_000)?;
            local_bounds.push(1.1 * m);
        }
        Ok(PolyBridge {
            act,
            theta0: t0,
            profile,
            prec,
            at_theta0,
            local_bounds,
        })
    }

    pub fn activation(&self) -> Activation {
        self.act
    }

    pub fn theta0(&self) -> &Real {
        &self.theta0
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn profile(&self) -> SmoothnessProfile {
        self.profile
    }

    /// Scale for trading `u_k t^k` with error at most `eps` on `[-1, 1]`.
    pub fn mu_k(&self, k: usize, u_k: &Real, eps: &Real) -> Result<Real> {
        let p = self.prec.bits();
        let s0 = self.profile.s0;
        if k > s0 {
            return Err(Error::arg(format!("degree {k} exceeds the smoothness order s0 = {s0}")));
        }
        if u_k.is_zero() {
            return Ok(self.prec.int(1));
        }
        let u = Float::with_val(p, u_k.abs_ref());
        let d = Float::with_val(p, self.at_theta0[k].abs_ref());
        let raw = if k < s0 {
            let m = self.prec.real(self.local_bounds[k]);
            Float::with_val(p, eps * d) * (k as u64 + 1) / (u * m)
        } else {
            let v0 = self.profile.v0;
            let g_top = self.prec.real(s0 as f64 + v0 + 1.0).gamma();
            let g_bot = self.prec.real(v0 + 1.0).gamma();
            let c0 = self.prec.real(self.profile.c0);
            let inner = Float::with_val(p, eps * d) * g_top / (factorial(s0, self.prec) * g_bot * c0 * u);
            inner.pow(self.prec.real(1.0 / v0))
        };
        Ok(raw.min(&self.prec.int(1)))
    }

    /// Splits off the leading monomial of `p` as one neuron and returns it
    /// with the lower-degree remainder.
    pub fn replace_leading(&self, p: &Poly, eps: &Real) -> Result<(Neuron, Poly)> {
        let prec = self.prec.bits();
        let k = p
            .degree()
            .ok_or_else(|| Error::arg("the zero polynomial has no leading term"))?;
        let u = &p.coeffs[k];
        let mu = self.mu_k(k, u, eps)?;
        let mu_k = Float::with_val(prec, (&mu).pow(k as u32));
        let a = Float::with_val(prec, u * factorial(k, self.prec)) / (mu_k * &self.at_theta0[k]);
        let mut rest = p.coeffs[..k].to_vec();
        // a phi(mu t + theta0) = sum_i a phi^(i)(theta0) mu^i t^i / i! + ...
        let mut mu_i = self.prec.int(1);
        for (i, c) in rest.iter_mut().enumerate() {
            let term = Float::with_val(prec, &a * &self.at_theta0[i]) * &mu_i / factorial(i, self.prec);
            *c -= term;
            mu_i *= &mu;
        }
        Ok((
            Neuron {
                a,
                w: mu,
                theta: self.theta0.clone(),
            },
            Poly::new(rest),
        ))
    }

    /// Network within `eps` of `p` on `[-1, 1]`; one neuron per degree.
    pub fn poly_to_shallow(&self, p: &Poly, eps: &Real) -> Result<ShallowNet1D> {
        if !(eps.is_finite() && *eps > 0) {
            return Err(Error::arg("tolerance must be positive"));
        }
        for c in &p.coeffs {
            self.prec.check(c)?;
        }
        let mut terms = Vec::new();
        let Some(deg) = p.degree() else {
            return Ok(ShallowNet1D {
                activation: self.act,
                terms,
            });
        };
        let step = Float::with_val(self.prec.bits(), eps / (deg as u64 + 1));
        let mut rest = p.clone();
        while rest.degree().is_some() {
            let (n, r) = self.replace_leading(&rest, &step)?;
            terms.push(n);
            rest = r;
        }
        Ok(ShallowNet1D {
            activation: self.act,
            terms,
        })
    }

    /// Gate `(U, U') -> U U'` on `[-1, 1]^2` within `eps`.
    pub fn product_gate(&self, eps: &Real) -> Result<ProductGate> {
        let third = Float::with_val(self.prec.bits(), eps / 3u32);
        let h3 = self.poly_to_shallow(&Poly::monomial(2, self.prec), &third)?;
        Ok(ProductGate {
            h3,
            eps: eps.clone(),
        })
    }
}

/// `2 h3((U + U')/2) - h3(U)/2 - h3(U')/2`, where `h3` approximates `t^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductGate {
    pub h3: ShallowNet1D,
    pub eps: Real,
}

impl ProductGate {
    pub fn combine(&self, u: &Real, v: &Real) -> Real {
        let prec = u.prec();
        let mid = Float::with_val(prec, u + v) / 2u32;
        let whole = self.h3.eval(&mid) * 2u32;
        let left = self.h3.eval(u) / 2u32;
        let right = self.h3.eval(v) / 2u32;
        whole - left - right
    }

    /// `max |a_j| eps^6`, the constant in the coefficient bound `C eps^-6`.
    pub fn coefficient_constant(&self) -> Real {
        let m = self.h3.max_abs_coefficient();
        let e6 = Float::with_val(m.prec(), (&self.eps).pow(6u32));
        m * e6
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::ActivationKind;

    fn bridge(kind: ActivationKind, prec: Precision) -> PolyBridge {
        let act = Activation::new(kind);
        let theta0 = act.find_theta0(3, 0.05).unwrap();
        PolyBridge::new(act, theta0, act.profile(3).unwrap(), prec).unwrap()
    }

    #[test]
    fn remainder_of_cubic() {
        struct Cube;
        impl Smooth for Cube {
            fn derivative_at(&self, k: usize, t: &Real) -> Result<Real> {
                let p = t.prec();
                Ok(match k {
                    0 => Float::with_val(p, t * t) * t,
                    1 => Float::with_val(p, t * t) * 3u32,
                    2 => Float::with_val(p, t * 6u32),
                    3 => Float::with_val(p, 6u32),
                    _ => Float::new(p),
                })
            }
        }
        let prec = Precision::DEFAULT;
        let r = taylor_remainder(&Cube, 2, &prec.zero(), &prec.int(1), 8).unwrap();
        assert!((r.to_f64() - 1.0).abs() < 1e-30);
    }

    #[test]
    fn square_is_reproduced_within_tolerance() {
        let prec = Precision::DEFAULT;
        let b = bridge(ActivationKind::Logistic, prec);
        let eps = prec.real(1e-3);
        let net = b.poly_to_shallow(&Poly::monomial(2, prec), &eps).unwrap();
        assert_eq!(net.len(), 3);
        for i in 0..=200 {
            let t = prec.real(-1.0 + i as f64 / 100.0);
            let err = (net.eval(&t) - Float::with_val(256, &t * &t)).abs();
            assert!(err.to_f64() <= 1e-3, "t = {t}");
        }
        for n in &net.terms {
            assert!(n.w > 0 && n.w <= 1);
        }
    }

    #[test]
    fn zero_polynomial_gives_empty_network() {
        let prec = Precision::DEFAULT;
        let b = bridge(ActivationKind::Gompertz, prec);
        let net = b.poly_to_shallow(&Poly::from_f64(&[0.0, 0.0], prec), &prec.real(0.1)).unwrap();
        assert!(net.is_empty());
        assert_eq!(net.eval(&prec.real(0.3)), 0);
    }

    #[test]
    fn leading_term_replacement_matches_coefficient_formula() {
        let prec = Precision::DEFAULT;
        let b = bridge(ActivationKind::ArctanShifted, prec);
        let p = Poly::from_f64(&[0.25, -0.5, 2.0], prec);
        let eps = prec.real(1e-2);
        let (n, rest) = b.replace_leading(&p, &eps).unwrap();
        let t0 = b.theta0().clone();
        let act = b.activation();
        let d2 = act.derivative(2, &t0).unwrap();
        for i in 0..2 {
            let di = act.derivative(i, &t0).unwrap();
            let expected = p.coeffs[i].clone()
                - prec.real(2.0) * factorial(2, prec) * di
                    / (d2.clone() * Float::with_val(256, (&n.w).pow(2 - i as u32)) * factorial(i, prec));
            assert!((rest.coeffs[i].clone() - expected).abs() < 1e-60);
        }
    }

    #[test]
    fn degree_above_s0_is_rejected() {
        let prec = Precision::DEFAULT;
        let b = bridge(ActivationKind::Logistic, prec);
        assert!(b.poly_to_shallow(&Poly::monomial(4, prec), &prec.real(0.1)).is_err());
    }

    #[test]
    fn top_degree_branch_uses_holder_scale() {
        let prec = Precision::DEFAULT;
        let b = bridge(ActivationKind::TanhShifted, prec);
        let eps = prec.real(1e-4);
        let net = b.poly_to_shallow(&Poly::monomial(3, prec), &eps).unwrap();
        for i in 0..=100 {
            let t = prec.real(-1.0 + i as f64 / 50.0);
            let cube = Float::with_val(256, &t * &t) * &t;
            assert!((net.eval(&t) - cube).abs().to_f64() <= 1e-4);
        }
    }

    #[test]
    fn gate_multiplies_halves() {
        let prec = Precision::DEFAULT;
        let b = bridge(ActivationKind::Logistic, prec);
        let gate = b.product_gate(&prec.real(1e-2)).unwrap();
        let half = prec.real(0.5);
        let v = gate.combine(&half, &half).to_f64();
        assert!((v - 0.25).abs() <= 1e-2);
    }

    #[test]
    fn shifted_network_reads_the_shifted_argument() {
        let prec = Precision::DEFAULT;
        let b = bridge(ActivationKind::Logistic, prec);
        let net = b.poly_to_shallow(&Poly::monomial(1, prec), &prec.real(1e-3)).unwrap();
        let s = prec.real(0.25);
        let moved = net.shifted(&s);
        let t = prec.real(0.6);
        let a = moved.eval(&t);
        let b2 = net.eval(&Float::with_val(256, &t - &s));
        assert!((a - b2).abs() < 1e-60);
    }
}
