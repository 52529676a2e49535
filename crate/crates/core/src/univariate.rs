//! Two-hidden-layer approximation of smooth univariate functions on
//! `J = [0, 1/2]`.
//!
//! The nodes `t_j = j / (2n)` carry Taylor polynomials `T_j` of `g`, glued
//! together by sigmoid bumps
//!
//! ```text
//! b_0(t) = phi(-4An t + A)
//! b_j(t) = phi(-4An (t - t_j) + A) - phi(-4An (t - t_{j-1}) + A)
//! ```
//!
//! whose sum telescopes to `phi(-4An (t - 1/2) + A)`, which is close to 1 on
//! `J`. The quasi-interpolant `Phi = sum_j T_j b_j` is turned into a network
//! by approximating each `T_j / B1` with a shallow net `h_j` and each product
//! `T_j b_j` with the product gate.
//!
//! In the resulting tree the leaves are the identity, layer 1 holds the sigmoid
//! neurons of `h_j` and of the bumps, and layer 2 applies the squaring unit
//! `h3` of the gate. Each `j` contributes three top nodes, one per gate call.

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::numeric::{factorial_f64, Precision, Real};
use crate::poly::{Poly, PolyBridge, ProductGate, ShallowNet1D};
use crate::target::UnivariateTarget;
use crate::tree::{LayerActivation, LeafParam, NodeParam, TreeArch, TreeNet};

/// Knobs shared by the univariate and radial builders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    /// Starting precision.
    pub precision: Precision,
    /// Largest precision the builder may raise itself to.
    pub precision_ceiling: u32,
    /// Rebuild at a higher precision when the estimate asks for it.
    pub auto_raise: bool,
    /// Anchor point; searched for when absent.
    pub theta0: Option<f64>,
    pub theta0_tol: f64,
    /// Smoothness order used by the polynomial conversion; defaults to
    /// `max(3, s + 1)`.
    pub s0: Option<usize>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            precision: Precision::DEFAULT,
            precision_ceiling: 8192,
            auto_raise: true,
            theta0: None,
            theta0_tol: 0.05,
            s0: None,
        }
    }
}

impl BuildConfig {
    pub fn s0_for(&self, s: usize) -> usize {
        self.s0.unwrap_or_else(|| (s + 1).max(3))
    }

    pub fn theta0_for(&self, act: &Activation, s0: usize) -> Result<f64> {
        match self.theta0 {
            Some(t) => Ok(t),
            None => act.find_theta0(s0, self.theta0_tol),
        }
    }
}

/// Bits needed to resolve `min_eps` next to values as large as `max_abs`.
pub fn required_bits(max_abs_log2: f64, min_eps: f64) -> u32 {
    let big = max_abs_log2.max(0.0).ceil();
    let small = (-min_eps.log2()).max(0.0).ceil();
    (big + small) as u32 + 64
}

/// Runs `build` at increasing precision until the estimate it returns is
/// satisfied.
pub(crate) fn with_precision<T>(
    cfg: &BuildConfig,
    mut build: impl FnMut(Precision) -> Result<(T, u32)>,
) -> Result<T> {
    let mut prec = cfg.precision;
    for _ in 0..4 {
        let (out, need) = build(prec)?;
        if need <= prec.bits() || !cfg.auto_raise {
            return Ok(out);
        }
        let next = need.div_ceil(64) * 64;
        if next > cfg.precision_ceiling {
            return Err(Error::PrecisionExceeded {
                required: need,
                ceiling: cfg.precision_ceiling,
            });
        }
        prec = Precision::new(next)?;
    }
    Err(Error::Construction("precision estimate did not settle".into()))
}

/// The bumps `b_0, ..., b_n` for one `(n, A)`.
#[derive(Clone, Debug)]
pub struct BumpSystem {
    n: usize,
    a: Real,
    act: Activation,
    /// `4 A n`.
    slope: Real,
}

impl BumpSystem {
    pub fn new(n: usize, a: Real, act: Activation) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("n must be at least 1"));
        }
        if !(a >= 1) {
            return Err(Error::arg("A must be at least 1"));
        }
        let slope = Float::with_val(a.prec(), &a * (4 * n) as u64);
        Ok(BumpSystem { n, a, act, slope })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &Real {
        &self.a
    }

    pub fn slope(&self) -> &Real {
        &self.slope
    }

    /// `t_j = j / (2n)`.
    pub fn node(&self, j: usize) -> Real {
        Float::with_val(self.a.prec(), j as u64) / (2 * self.n) as u64
    }

    /// `-4An (t - t_j) + A`.
    fn edge_arg(&self, j: usize, t: &Real) -> Real {
        let p = self.a.prec();
        let d = Float::with_val(p, t - self.node(j));
        Float::with_val(p, &self.a - Float::with_val(p, &self.slope * &d))
    }

    /// `phi(-4An (t - t_j) + A)` for `j = 0..=n`.
    pub fn edges(&self, t: &Real) -> Vec<Real> {
        (0..=self.n).map(|j| self.act.eval(&self.edge_arg(j, t))).collect()
    }

    pub fn bumps(&self, t: &Real) -> Vec<Real> {
        let e = self.edges(t);
        let p = self.a.prec();
        (0..=self.n)
            .map(|j| {
                if j == 0 {
                    e[0].clone()
                } else {
                    Float::with_val(p, &e[j] - &e[j - 1])
                }
            })
            .collect()
    }

    /// `sum_j b_j(t)`, accumulated in index order.
    pub fn sum(&self, t: &Real) -> Real {
        let mut acc = Float::new(self.a.prec());
        for b in self.bumps(t) {
            acc += b;
        }
        acc
    }

    /// `phi(-4An (t - 1/2) + A)`.
    pub fn telescoped(&self, t: &Real) -> Real {
        self.act.eval(&self.edge_arg(self.n, t))
    }
}

/// Taylor polynomial of `g` at `t_j` as a polynomial in `t - t_j`.
fn taylor_at(target: &UnivariateTarget, tj: &Real) -> Poly {
    Poly::new(target.taylor_coeffs(tj))
}

/// `Phi(t) = sum_j T_j(t) b_j(t)`.
pub fn phi_operator(target: &UnivariateTarget, bumps: &BumpSystem, t: &Real) -> Real {
    let p = t.prec();
    let b = bumps.bumps(t);
    let mut acc = Float::new(p);
    for (j, bj) in b.iter().enumerate() {
        let tj = bumps.node(j);
        let d = Float::with_val(p, t - &tj);
        let tay = taylor_at(target, &tj).eval(&d);
        acc += tay * bj;
    }
    acc
}

/// Constants and audit data for one univariate build.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnivariateReport {
    pub n: usize,
    pub s: usize,
    pub r: f64,
    pub a: f64,
    pub eps: f64,
    /// Accuracy of the Taylor-polynomial networks.
    pub eps1: f64,
    pub s0: usize,
    pub theta0: f64,
    pub b1: f64,
    /// Constant of the quasi-interpolant bound `C3 (n delta(A) + n^-r)`.
    pub c3: f64,
    /// `max |a| eps^6` of the squaring unit.
    pub gate_constant: f64,
    /// Constant of the network bound `C4 (n delta(A) + n^-r + n eps)`.
    pub c4: f64,
    pub delta_a: f64,
    /// `C4 ((n + 1) delta(A) + n^-r + (n + 1) eps)`.
    pub error_bound: f64,
    pub max_abs_param_log2: f64,
    pub max_abs_w: f64,
    pub max_abs_bias: f64,
    pub w_cap: f64,
    pub bias_cap: f64,
    pub caps_ok: bool,
    pub precision_bits: u32,
    pub widths: Vec<usize>,
}

/// A finished univariate construction.
#[derive(Clone, Debug)]
pub struct UnivariateBuild {
    pub net: TreeNet,
    pub gate: ProductGate,
    pub report: UnivariateReport,
}

impl UnivariateBuild {
    /// `(a, w, theta)` of every layer-1 neuron feeding top node `q`, as seen
    /// from the input `t` (the leaf weight folded in).
    pub fn inner_neurons(&self, q: usize) -> Vec<(Real, Real, Real)> {
        let fan = self.net.arch().widths()[1];
        (q * fan..(q + 1) * fan)
            .map(|i| {
                let node = &self.net.layer(1)[i];
                let leaf = &self.net.leaves()[i];
                (node.a.clone(), leaf.w.clone(), node.b.clone())
            })
            .collect()
    }
}

fn log2_abs(x: &Real) -> f64 {
    if x.is_zero() {
        f64::NEG_INFINITY
    } else {
        Float::with_val(64, x.abs_ref()).log2().to_f64()
    }
}

struct Pieces {
    gate: ProductGate,
    /// Shallow nets for `T_j / B1`, already shifted to read `t`.
    h: Vec<ShallowNet1D>,
    b1: Real,
    eps1: f64,
    s0: usize,
    theta0: f64,
}

fn construct(
    target: &UnivariateTarget,
    n: usize,
    a: f64,
    eps: f64,
    act: Activation,
    cfg: &BuildConfig,
    prec: Precision,
) -> Result<(UnivariateBuild, u32)> {
    let s = target.s;
    let s0 = cfg.s0_for(s);
    if s > s0 {
        return Err(Error::arg(format!("target smoothness s = {s} exceeds s0 = {s0}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::arg(format!("eps = {eps} is outside (0, 1]")));
    }
    let theta0 = cfg.theta0_for(&act, s0)?;
    let profile = act.profile(s0)?;
    let bridge = PolyBridge::new(act, theta0, profile, prec)?;
    let bumps = BumpSystem::new(n, prec.real(a), act)?;

    let g_sup = target.g.sup_abs(target.lo, target.hi, 10_001);
    let c0 = target.c0;
    // |T_j| on J through its coefficients, guarding a misdeclared c0
    let mut taylor_sup = 0.0f64;
    for j in 0..=n {
        let tj = (j as f64) / (2 * n) as f64;
        let bound: f64 = (0..=s)
            .map(|l| target.g.derivative_f64(l, tj).abs() * 0.5f64.powi(l as i32) / factorial_f64(l))
            .sum();
        taylor_sup = taylor_sup.max(bound);
    }
    let b1_f = (4.0 * (g_sup + c0 + 2.0)).max(4.0 * taylor_sup);
    let b1 = prec.real(b1_f);

    let eps1 = if s0 >= 3 {
        eps.powi(7) / 4.0
    } else {
        eps.powf(1.0 + 6.0 / profile.v0) / 4.0
    };
    let gate = bridge.product_gate(&prec.real(eps))?;
    let eps1_r = prec.real(eps1);
    let mut h = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let tj = bumps.node(j);
        let poly = taylor_at(target, &tj).scaled(&Float::with_val(prec.bits(), 1u32 / &b1));
        let net = bridge.poly_to_shallow(&poly, &eps1_r)?;
        h.push(net.shifted(&tj));
    }
    let pieces = Pieces {
        gate,
        h,
        b1,
        eps1,
        s0,
        theta0,
    };
    let net = assemble(&pieces, &bumps, s, prec)?;

    // audit
    let p = prec.bits();
    let w_cap = 4.0 * a * n as f64;
    let bias_cap = 1.0 + 3.0 * a * n as f64 + theta0.abs();
    let mut max_w = 0.0f64;
    let mut max_bias = 0.0f64;
    for leaf in net.leaves() {
        max_w = max_w.max(leaf.w.to_f64().abs());
    }
    for node in net.layer(1).iter().chain(net.layer(2)) {
        max_bias = max_bias.max(node.b.to_f64().abs());
    }
    let caps_ok = max_w <= w_cap * (1.0 + 1e-12) && max_bias <= bias_cap * (1.0 + 1e-12);
    let max_abs = net.max_abs_param();
    let max_log2 = log2_abs(&max_abs);

    let g_factor = factorial_f64(s);
    let c3 = 2.0 * ((c0 + c0 * 1.0) / g_factor + g_sup);
    let gate_constant = pieces.gate.coefficient_constant().to_f64();
    let c4 = c3 + b1_f * b1_f + 9.0 * gate_constant * b1_f * b1_f / 8.0 + 1.0;
    let delta_a = act.delta(&prec.real(a)).to_f64();
    let r = target.r();
    let nf = n as f64;
    let error_bound = c4 * ((nf + 1.0) * delta_a + nf.powf(-r) + (nf + 1.0) * eps);

    // smallest tolerance that must be resolved: one conversion step
    let min_eps = (eps1 / (s as f64 + 1.0)).min(eps / 9.0);
    let need = required_bits(max_log2, min_eps);
    let widths = net.arch().widths().to_vec();
    let report = UnivariateReport {
        n,
        s,
        r,
        a,
        eps,
        eps1,
        s0,
        theta0,
        b1: b1_f,
        c3,
        gate_constant,
        c4,
        delta_a,
        error_bound,
        max_abs_param_log2: max_log2,
        max_abs_w: max_w,
        max_abs_bias: max_bias,
        w_cap,
        bias_cap,
        caps_ok,
        precision_bits: p,
        widths,
    };
    Ok((
        UnivariateBuild {
            net,
            gate: pieces.gate,
            report,
        },
        need,
    ))
}

/// Lays out the three gate calls of every `j` as top nodes of the tree.
fn assemble(pieces: &Pieces, bumps: &BumpSystem, s: usize, prec: Precision) -> Result<TreeNet> {
    let p = prec.bits();
    let n = bumps.n();
    let fan = s + 3;
    let act = pieces.gate.h3.activation;
    let arch = TreeArch::new(
        vec![1, fan, 3 * (n + 1)],
        vec![
            LayerActivation::Identity,
            LayerActivation::Sigmoid(act),
            LayerActivation::Unit(pieces.gate.h3.clone()),
        ],
    )?;
    let b1 = &pieces.b1;
    let b1_sq = Float::with_val(p, b1 * b1);
    let half = prec.ratio(1, 2);
    let inv_b1 = Float::with_val(p, 1u32 / b1);
    let inv_2b1 = Float::with_val(p, &inv_b1 / 2u32);
    let zero_leaf = || LeafParam {
        a: prec.zero(),
        w: prec.zero(),
        b: prec.zero(),
    };
    let zero_node = || NodeParam {
        a: prec.zero(),
        b: prec.zero(),
    };
    let mut leaves = Vec::with_capacity(3 * (n + 1) * fan);
    let mut mids = Vec::with_capacity(3 * (n + 1) * fan);
    let mut tops = Vec::with_capacity(3 * (n + 1));
    // (coefficient, inner weight, bias) triples for one top node
    let push_group = |group: Vec<(Real, Real, Real)>, leaves: &mut Vec<LeafParam>, mids: &mut Vec<NodeParam>| {
        debug_assert!(group.len() <= fan);
        let used = group.len();
        for (a, w, b) in group {
            leaves.push(LeafParam {
                a: prec.int(1),
                w,
                b: prec.zero(),
            });
            mids.push(NodeParam { a, b });
        }
        for _ in used..fan {
            leaves.push(zero_leaf());
            mids.push(zero_node());
        }
    };
    let minus_slope = Float::with_val(p, -bumps.slope());
    for j in 0..=n {
        let h = &pieces.h[j];
        // bump neurons (coefficient sign, bias)
        let mut bump_terms: Vec<(i32, Real)> = Vec::with_capacity(2);
        let bias = |jj: usize| Float::with_val(p, bumps.slope() * bumps.node(jj)) + bumps.a();
        bump_terms.push((1, bias(j)));
        if j > 0 {
            bump_terms.push((-1, bias(j - 1)));
        }
        if h.is_empty() {
            // T_j vanishes, so does its product with b_j
            for _ in 0..3 {
                push_group(Vec::new(), &mut leaves, &mut mids);
                tops.push(zero_node());
            }
            continue;
        }
        // X: h3(h_j / 2 + b_j / (2 B1))
        let mut x = Vec::with_capacity(fan);
        for t in &h.terms {
            x.push((Float::with_val(p, &t.a * &half), t.w.clone(), t.theta.clone()));
        }
        for (sign, b) in &bump_terms {
            x.push((Float::with_val(p, &inv_2b1 * *sign), minus_slope.clone(), b.clone()));
        }
        push_group(x, &mut leaves, &mut mids);
        tops.push(NodeParam {
            a: Float::with_val(p, &b1_sq * 2u32),
            b: prec.zero(),
        });
        // Y: h3(h_j)
        let y = h.terms.iter().map(|t| (t.a.clone(), t.w.clone(), t.theta.clone())).collect();
        push_group(y, &mut leaves, &mut mids);
        tops.push(NodeParam {
            a: Float::with_val(p, -&b1_sq) / 2u32,
            b: prec.zero(),
        });
        // Z: h3(b_j / B1)
        let z = bump_terms
            .iter()
            .map(|(sign, b)| (Float::with_val(p, &inv_b1 * *sign), minus_slope.clone(), b.clone()))
            .collect();
        push_group(z, &mut leaves, &mut mids);
        tops.push(NodeParam {
            a: Float::with_val(p, -&b1_sq) / 2u32,
            b: prec.zero(),
        });
    }
    let mut net = TreeNet::from_parts(arch, prec, pieces.theta0, leaves, vec![mids, tops])?;
    net.metadata.insert("builder".into(), "univariate".into());
    net.metadata.insert("n".into(), n.to_string());
    net.metadata.insert("A".into(), bumps.a().to_string_radix(10, Some(17)));
    net.metadata.insert("b1".into(), b1.to_string_radix(10, Some(17)));
    net.metadata.insert("eps1".into(), format!("{:e}", pieces.eps1));
    net.metadata.insert("s0".into(), pieces.s0.to_string());
    Ok(net)
}

/// Builds the two-hidden-layer approximant of `target` on `[0, 1/2]`.
pub fn build_univariate_net(
    target: &UnivariateTarget,
    n: usize,
    a: f64,
    eps: f64,
    act: Activation,
    cfg: &BuildConfig,
) -> Result<UnivariateBuild> {
    if target.lo != 0.0 || target.hi != 0.5 {
        return Err(Error::arg("univariate targets must live on [0, 1/2]"));
    }
    let mut build = with_precision(cfg, |prec| construct(target, n, a, eps, act, cfg, prec))?;
    build
        .net
        .metadata
        .insert("theta0_tol".into(), format!("{}", cfg.theta0_tol));
    Ok(build)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::ActivationKind;
    use crate::target::TargetFn;

    fn logistic() -> Activation {
        Activation::new(ActivationKind::Logistic)
    }

    fn identity_target() -> UnivariateTarget {
        UnivariateTarget::new(TargetFn::identity(), 0, 1.0, 1.0, 0.0, 0.5).unwrap()
    }

    #[test]
    fn telescoping_sum() {
        let prec = Precision::DEFAULT;
        let sys = BumpSystem::new(4, prec.real(64.0), logistic()).unwrap();
        for &t in &[0.0, 0.1, 0.26, 0.5] {
            let x = prec.real(t);
            let diff = Float::with_val(256, sys.sum(&x) - sys.telescoped(&x)).abs();
            assert!(diff <= crate::numeric::ulp(&sys.telescoped(&x)) * 10u32);
        }
    }

    #[test]
    fn single_cell_operator_is_piecewise_taylor() {
        let prec = Precision::DEFAULT;
        let target = UnivariateTarget::new(
            TargetFn::Polynomial {
                coeffs: vec![0.0, 1.0, 1.0],
            },
            1,
            1.0,
            2.0,
            0.0,
            0.5,
        )
        .unwrap();
        let sys = BumpSystem::new(1, prec.real(1e6), logistic()).unwrap();
        for &t in &[0.05, 0.2, 0.3, 0.45] {
            let x = prec.real(t);
            let phi = phi_operator(&target, &sys, &x).to_f64();
            let t0: f64 = if t < 0.25 { 0.0 } else { 0.5 };
            let patch = (t0 + t0 * t0) + (1.0 + 2.0 * t0) * (t - t0);
            assert!((phi - patch).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn zero_target_gives_zero_network() {
        let target = UnivariateTarget::new(TargetFn::Polynomial { coeffs: vec![0.0] }, 0, 1.0, 1.0, 0.0, 0.5).unwrap();
        let b = build_univariate_net(&target, 4, 16.0, 1.0 / 16.0, logistic(), &BuildConfig::default()).unwrap();
        assert!(b.net.layer(2).iter().all(|n| n.a.is_zero()));
        assert_eq!(b.net.eval_point(&[0.3]).unwrap(), 0);
    }

    #[test]
    fn identity_target_shape_and_caps() {
        let b = build_univariate_net(&identity_target(), 4, 16.0, 1.0 / 16.0, logistic(), &BuildConfig::default()).unwrap();
        assert_eq!(b.net.arch().widths(), &[1, 3, 15]);
        assert!(b.report.caps_ok);
        let err = (b.net.eval_point(&[0.3]).unwrap().to_f64() - 0.3).abs();
        assert!(err <= b.report.error_bound);
    }

    #[test]
    fn expanded_form_matches_unit_form() {
        let b = build_univariate_net(&identity_target(), 2, 4.0, 0.25, logistic(), &BuildConfig::default()).unwrap();
        let wide = b.net.expand_top_unit().unwrap();
        assert_eq!(wide.arch().widths(), &[1, 3, 27]);
        for &t in &[0.0, 0.17, 0.5] {
            let u = b.net.eval_point(&[t]).unwrap();
            let v = wide.eval_point(&[t]).unwrap();
            assert!(Float::with_val(256, u - v).abs() < 1e-60);
        }
    }
}
