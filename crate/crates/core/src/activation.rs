//! Sigmoidal activations with exact higher derivatives.
//!
//! Each derivative is a fixed polynomial with integer coefficients in a
//! convenient auxiliary variable:
//!
//! * logistic `y = s(t)`: `phi^(k) = P_k(y)` with `P_{k+1} = P_k'(y) (y - y^2)`;
//! * shifted tanh `phi(t) = s(2t)`: same recursion with an extra factor 2;
//! * shifted arctan: `phi^(k) = Q_k(t) / (pi (1 + t^2)^k)`,
//!   `Q_{k+1} = Q_k' (1 + t^2) - 2 k t Q_k`;
//! * Gompertz `phi = exp(-u)`, `u = exp(-t)`: `phi^(k) = phi R_k(u)`,
//!   `R_{k+1} = u (R_k - R_k')`.
//!
//! The coefficient tables are built once with overflow-checked integer
//! arithmetic.

use std::sync::OnceLock;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{loglog_fit, Precision, Real};

/// Highest derivative order served by the coefficient tables.
pub const MAX_DERIVATIVE_ORDER: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActivationKind {
    Logistic,
    TanhShifted,
    ArctanShifted,
    Gompertz,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 4] = [
        ActivationKind::Logistic,
        ActivationKind::TanhShifted,
        ActivationKind::ArctanShifted,
        ActivationKind::Gompertz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Logistic => "logistic",
            ActivationKind::TanhShifted => "tanh-shifted",
            ActivationKind::ArctanShifted => "arctan-shifted",
            ActivationKind::Gompertz => "gompertz",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        ActivationKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| {
                Error::arg(format!(
                    "unknown activation {name:?} (expected logistic, tanh-shifted, arctan-shifted or gompertz)"
                ))
            })
    }
}

impl std::fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A named sigmoid, optionally multiplied by a constant `scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Activation {
    pub kind: ActivationKind,
    #[serde(default = "unit_scale")]
    pub scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

type Table = Vec<Vec<i128>>;

fn checked(v: Option<i128>, order: usize) -> Result<i128> {
    v.ok_or(Error::UnsupportedOrder {
        order,
        max: MAX_DERIVATIVE_ORDER,
    })
}

/// Coefficients of `P_k` (logistic family) with the chain factor `factor`.
fn logistic_table(factor: i128) -> Result<Table> {
    let mut table: Table = vec![vec![0, 1]];
    for k in 0..MAX_DERIVATIVE_ORDER {
        let p = &table[k];
        // P' (y - y^2), times factor
        let mut next = vec![0i128; p.len() + 1];
        for (i, &c) in p.iter().enumerate().skip(1) {
            let d = checked(c.checked_mul(i as i128), k + 1)?;
            let d = checked(d.checked_mul(factor), k + 1)?;
            next[i] = checked(next[i].checked_add(d), k + 1)?;
            next[i + 1] = checked(next[i + 1].checked_sub(d), k + 1)?;
        }
        table.push(next);
    }
    Ok(table)
}

/// `Q_k` for k >= 1 (index 0 holds a placeholder).
fn arctan_table() -> Result<Table> {
    let mut table: Table = vec![vec![], vec![1]];
    for k in 1..MAX_DERIVATIVE_ORDER {
        let q = &table[k];
        let mut next = vec![0i128; q.len() + 1];
        for (i, &c) in q.iter().enumerate() {
            if i >= 1 {
                // c i t^{i-1} (1 + t^2)
                let d = checked(c.checked_mul(i as i128), k + 1)?;
                next[i - 1] = checked(next[i - 1].checked_add(d), k + 1)?;
                next[i + 1] = checked(next[i + 1].checked_add(d), k + 1)?;
            }
            // -2 k t * c t^i
            let e = checked(c.checked_mul(2 * k as i128), k + 1)?;
            next[i + 1] = checked(next[i + 1].checked_sub(e), k + 1)?;
        }
        table.push(next);
    }
    Ok(table)
}

/// `R_k` in the variable `u = exp(-t)`.
fn gompertz_table() -> Result<Table> {
    let mut table: Table = vec![vec![1]];
    for k in 0..MAX_DERIVATIVE_ORDER {
        let r = &table[k];
        let mut next = vec![0i128; r.len() + 1];
        for (i, &c) in r.iter().enumerate() {
            next[i + 1] = checked(next[i + 1].checked_add(c), k + 1)?;
            if i >= 1 {
                let d = checked(c.checked_mul(i as i128), k + 1)?;
                next[i] = checked(next[i].checked_sub(d), k + 1)?;
            }
        }
        table.push(next);
    }
    Ok(table)
}

fn table(kind: ActivationKind) -> &'static Table {
    static LOGISTIC: OnceLock<Table> = OnceLock::new();
    static TANH: OnceLock<Table> = OnceLock::new();
    static ARCTAN: OnceLock<Table> = OnceLock::new();
    static GOMPERTZ: OnceLock<Table> = OnceLock::new();
    let build = |r: Result<Table>| r.expect("derivative tables fit in i128 up to the maximum order");
    match kind {
        ActivationKind::Logistic => LOGISTIC.get_or_init(|| build(logistic_table(1))),
        ActivationKind::TanhShifted => TANH.get_or_init(|| build(logistic_table(2))),
        ActivationKind::ArctanShifted => ARCTAN.get_or_init(|| build(arctan_table())),
        ActivationKind::Gompertz => GOMPERTZ.get_or_init(|| build(gompertz_table())),
    }
}

fn horner_f64(coeffs: &[i128], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
}

fn horner_real(coeffs: &[i128], x: &Real) -> Real {
    let prec = x.prec();
    let mut acc = Float::new(prec);
    for &c in coeffs.iter().rev() {
        acc *= x;
        acc += Float::with_val(prec, c);
    }
    acc
}

/// Smoothness data used by the polynomial-to-network conversion: the
/// derivative order `s0`, Hölder exponent `v0` and Hölder constant `c0` of
/// `phi^(s0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessProfile {
    pub s0: usize,
    pub v0: f64,
    pub c0: f64,
}

/// Outcome of checking the standing assumptions on an activation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub theta0: Option<f64>,
    pub min_abs_derivative: f64,
    pub sup_abs: f64,
    pub sup_abs_first_derivative: f64,
    /// `max A * delta(A)` over the sampled tail.
    pub tail_constant: f64,
    /// Fitted decay exponent of `delta(A)`; at least 1 is required.
    pub tail_exponent: f64,
    pub satisfied: bool,
    pub violations: Vec<String>,
}

impl Activation {
    pub fn new(kind: ActivationKind) -> Self {
        Activation { kind, scale: 1.0 }
    }

    /// `factor * phi`; only useful for exercising the assumption checks.
    pub fn scaled(kind: ActivationKind, factor: f64) -> Self {
        Activation {
            kind,
            scale: factor,
        }
    }

    pub fn name(&self) -> String {
        if self.scale == 1.0 {
            self.kind.name().to_string()
        } else {
            format!("{}*{}", self.scale, self.kind.name())
        }
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        let v = match self.kind {
            ActivationKind::Logistic => 1.0 / (1.0 + (-t).exp()),
            ActivationKind::TanhShifted => 0.5 * (t.tanh() + 1.0),
            ActivationKind::ArctanShifted => t.atan() / std::f64::consts::PI + 0.5,
            ActivationKind::Gompertz => (-(-t).exp()).exp(),
        };
        v * self.scale
    }

    pub fn eval(&self, t: &Real) -> Real {
        let prec = t.prec();
        let v = match self.kind {
            ActivationKind::Logistic => {
                let e = Float::with_val(prec, -t).exp();
                Float::with_val(prec, 1u32) / (e + 1u32)
            }
            ActivationKind::TanhShifted => (Float::with_val(prec, t.tanh_ref()) + 1u32) / 2u32,
            ActivationKind::ArctanShifted => {
                let pi = Float::with_val(prec, rug::float::Constant::Pi);
                Float::with_val(prec, t.atan_ref()) / pi + 0.5f64
            }
            ActivationKind::Gompertz => {
                let u = Float::with_val(prec, -t).exp();
                (-u).exp()
            }
        };
        if self.scale == 1.0 {
            v
        } else {
            v * self.scale
        }
    }

    fn check_order(k: usize) -> Result<()> {
        if k > MAX_DERIVATIVE_ORDER {
            return Err(Error::UnsupportedOrder {
                order: k,
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        Ok(())
    }

    /// `phi^(k)(t)` in double precision.
    pub fn derivative_f64(&self, k: usize, t: f64) -> Result<f64> {
        Self::check_order(k)?;
        if k == 0 {
            return Ok(self.eval_f64(t));
        }
        let tab = table(self.kind);
        let v = match self.kind {
            ActivationKind::Logistic => horner_f64(&tab[k], 1.0 / (1.0 + (-t).exp())),
            ActivationKind::TanhShifted => horner_f64(&tab[k], 1.0 / (1.0 + (-2.0 * t).exp())),
            ActivationKind::ArctanShifted => {
                let q = horner_f64(&tab[k], t);
                q / (std::f64::consts::PI * (1.0 + t * t).powi(k as i32))
            }
            ActivationKind::Gompertz => {
                let u = (-t).exp();
                let phi = (-u).exp();
                if phi == 0.0 {
                    0.0
                } else {
                    phi * horner_f64(&tab[k], u)
                }
            }
        };
        Ok(v * self.scale)
    }

    /// `phi^(k)(t)` at the precision of `t`.
    pub fn derivative(&self, k: usize, t: &Real) -> Result<Real> {
        Self::check_order(k)?;
        if k == 0 {
            return Ok(self.eval(t));
        }
        let prec = t.prec();
        let tab = table(self.kind);
        let v = match self.kind {
            ActivationKind::Logistic => {
                let y = Float::with_val(prec, 1u32) / (Float::with_val(prec, -t).exp() + 1u32);
                horner_real(&tab[k], &y)
            }
            ActivationKind::TanhShifted => {
                let y = Float::with_val(prec, 1u32)
                    / (Float::with_val(prec, t * -2i32).exp() + 1u32);
                horner_real(&tab[k], &y)
            }
            ActivationKind::ArctanShifted => {
                let q = horner_real(&tab[k], t);
                let base = Float::with_val(prec, t * t) + 1u32;
                let den = Float::with_val(prec, rug::float::Constant::Pi)
                    * Float::with_val(prec, rug::ops::Pow::pow(&base, k as u32));
                q / den
            }
            ActivationKind::Gompertz => {
                let u = Float::with_val(prec, -t).exp();
                let phi = Float::with_val(prec, -&u).exp();
                phi * horner_real(&tab[k], &u)
            }
        };
        Ok(if self.scale == 1.0 { v } else { v * self.scale })
    }

    /// Integer coefficients of the k-th derivative polynomial in the
    /// auxiliary variable of this family.
    pub fn derivative_coefficients(&self, k: usize) -> Result<&'static [i128]> {
        Self::check_order(k)?;
        Ok(&table(self.kind)[k])
    }

    /// `max(|1 - phi(A)|, |phi(-A)|)`.
    pub fn delta(&self, a: &Real) -> Real {
        let prec = a.prec();
        let hi = Float::with_val(prec, 1u32 - self.eval(a)).abs();
        let lo = self.eval(&Float::with_val(prec, -a)).abs();
        hi.max(&lo)
    }

    pub fn delta_f64(&self, a: f64) -> f64 {
        (1.0 - self.eval_f64(a)).abs().max(self.eval_f64(-a).abs())
    }

    /// Largest `|phi^(k)|` over `samples` equispaced points of `[lo, hi]`.
    pub fn sup_abs_derivative(&self, k: usize, lo: f64, hi: f64, samples: usize) -> Result<f64> {
        let n = samples.max(2);
        let mut best = 0.0f64;
        for i in 0..n {
            let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            best = best.max(self.derivative_f64(k, t)?.abs());
        }
        Ok(best)
    }

    /// Smallest `|theta|` in `[-3, 3]` with `|phi^(j)(theta)| >= tol` for all
    /// `j <= s0`. The `10^-2` scan is refined by bisection toward zero.
    pub fn find_theta0(&self, s0: usize, tol: f64) -> Result<f64> {
        Self::check_order(s0)?;
        let score = |t: f64| -> Result<f64> {
            let mut m = f64::INFINITY;
            for j in 0..=s0 {
                m = m.min(self.derivative_f64(j, t)?.abs());
            }
            Ok(m)
        };
        let mut best = (0.0, f64::NEG_INFINITY);
        for mag in 0..=300i32 {
            for sign in [1, -1] {
                if mag == 0 && sign == -1 {
                    continue;
                }
                let i = sign * mag;
                let t = i as f64 / 100.0;
                let m = score(t)?;
                if m > best.1 {
                    best = (t, m);
                }
                if m < tol {
                    continue;
                }
                if mag == 0 {
                    return Ok(0.0);
                }
                // the neighbour closer to zero failed; narrow the crossing
                let mut fail = (i - sign) as f64 / 100.0;
                let mut pass = t;
                for _ in 0..48 {
                    let mid = 0.5 * (fail + pass);
                    if score(mid)? >= tol {
                        pass = mid;
                    } else {
                        fail = mid;
                    }
                }
                return Ok(pass);
            }
        }
        Err(Error::ThetaSearch {
            lo: -3.0,
            hi: 3.0,
            best: best.0,
            value: best.1,
            tol,
        })
    }

    /// Smoothness profile with `v0 = 1` and `c0` a padded bound on
    /// `|phi^(s0 + 1)|` over the real line.
    pub fn profile(&self, s0: usize) -> Result<SmoothnessProfile> {
        let sup = self.sup_abs_derivative(s0 + 1, -40.0, 40.0, 40_001)?;
        Ok(SmoothnessProfile {
            s0,
            v0: 1.0,
            c0: 1.1 * sup,
        })
    }

    /// Checks boundedness of `phi` and `phi'`, the existence of `theta0`,
    /// and `delta(A) = O(1/A)` on a sampled tail.
    pub fn validate_assumptions(&self, s0: usize, tol: f64) -> Result<AssumptionReport> {
        let mut violations = Vec::new();
        let sup_abs = self.sup_abs_derivative(0, -60.0, 60.0, 24_001)?;
        let sup_d1 = self.sup_abs_derivative(1, -60.0, 60.0, 24_001)?;
        if sup_abs > 1.0 + 1e-12 {
            violations.push(format!("sup |phi| = {sup_abs} exceeds 1"));
        }
        if sup_d1 > 1.0 + 1e-12 {
            violations.push(format!("sup |phi'| = {sup_d1} exceeds 1"));
        }
        let (theta0, min_abs) = match self.find_theta0(s0, tol) {
            Ok(t) => {
                let mut m = f64::INFINITY;
                for j in 0..=s0 {
                    m = m.min(self.derivative_f64(j, t)?.abs());
                }
                (Some(t), m)
            }
            Err(Error::ThetaSearch { value, .. }) => {
                violations.push(format!(
                    "no theta0 with |phi^(j)| >= {tol} for all j <= {s0}"
                ));
                (None, value)
            }
            Err(e) => return Err(e),
        };
        let prec = Precision::new(128)?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut tail_constant = 0.0f64;
        for e in 1..=12 {
            let a = f64::powi(2.0, e);
            let d = self.delta(&prec.real(a)).to_f64();
            tail_constant = tail_constant.max(a * d);
            if e >= 6 && d > 0.0 {
                xs.push(a);
                ys.push(d);
            }
        }
        let tail_exponent = if xs.len() >= 2 {
            -loglog_fit(&xs, &ys)?.slope
        } else {
            f64::INFINITY
        };
        if !(tail_exponent >= 0.95) {
            violations.push(format!(
                "delta(A) decays like A^-{tail_exponent:.3}, slower than 1/A"
            ));
        }
        Ok(AssumptionReport {
            theta0,
            min_abs_derivative: min_abs,
            sup_abs,
            sup_abs_first_derivative: sup_d1,
            tail_constant,
            tail_exponent,
            satisfied: violations.is_empty(),
            violations,
        })
    }
}
