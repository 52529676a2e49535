//! Depth-three tree networks for radial targets `f(x) = g*(|x|^2)` on the
//! unit ball.
//!
//! With `g(t) = g*(2t)` on `[0, 1/2]` we have `f(x) = g(|x|^2 / 2)`. The
//! builder approximates `|x|^2 / 2` by a network `h6d` with six nodes in its
//! second layer, approximates `g` by the univariate two-hidden-layer net, and
//! feeds the first into the second. The cascade of tolerances is chosen from
//! the actual Lipschitz constant of the univariate net so that the
//! composition costs at most `eps / 2`.

use rand_distr::{Distribution, StandardNormal};
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::numeric::{factorial_f64, stream_rng, Precision, Real};
use crate::poly::{Poly, PolyBridge, ShallowNet1D};
use crate::target::RadialTarget;
use crate::tree::{check_bounds, BoundSpec, LayerActivation, LeafParam, NodeParam, TreeArch, TreeNet};
use crate::univariate::{build_univariate_net, required_bits, with_precision, BuildConfig, UnivariateBuild};

/// `h3d(x) = sum_l h3(x_l) / 2`, within `d eps1 / 2` of `|x|^2 / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareNet {
    pub h3: ShallowNet1D,
    pub d: usize,
}

impl SquareNet {
    pub fn eval(&self, x: &[Real]) -> Real {
        let p = x.first().map_or(53, |v| v.prec());
        let mut acc = Float::new(p);
        for v in x {
            acc += self.h3.eval(v);
        }
        acc / 2u32
    }
}

/// Builds `h3d` with `h3` within `eps1` of `t^2` on `[-1, 1]`.
pub fn build_square_net(d: usize, eps1: &Real, bridge: &PolyBridge) -> Result<SquareNet> {
    if d == 0 {
        return Err(Error::arg("dimension must be at least 1"));
    }
    let h3 = bridge.poly_to_shallow(&Poly::monomial(2, bridge.precision()), eps1)?;
    Ok(SquareNet { h3, d })
}

/// `h6d`: the squared-norm network rewritten with one activation per layer.
///
/// Writing `h3 = sum_k a_k phi(w_k t + theta0)` and `V_k(x) = sum_l a_k/2
/// phi(w_k x_l + theta0)`, every `V_k` is bounded by `B` and is replaced by
/// `B h2(V_k / B)` with `h2` a shallow approximation of the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct UnifiedSquareNet {
    pub inner: ShallowNet1D,
    pub outer: ShallowNet1D,
    pub b: Real,
    pub d: usize,
    pub eps2: Real,
}

impl UnifiedSquareNet {
    /// Number of second-layer nodes, `|h3| * |h2|`.
    pub fn width(&self) -> usize {
        self.inner.len() * self.outer.len()
    }

    /// The second-layer nodes as `(outer a, outer w, outer theta, inner k)`.
    fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.inner.len()).flat_map(move |k| (0..self.outer.len()).map(move |kk| (k, kk)))
    }

    pub fn eval(&self, x: &[Real]) -> Real {
        let p = self.b.prec();
        let act = self.inner.activation;
        let mut acc = Float::new(p);
        let two_b = Float::with_val(p, &self.b * 2u32);
        for (k, kk) in self.nodes() {
            let inner = &self.inner.terms[k];
            let outer = &self.outer.terms[kk];
            let mut v = Float::new(p);
            for xl in x {
                let arg = Float::with_val(p, &inner.w * xl) + &inner.theta;
                v += act.eval(&arg);
            }
            let v = v * &inner.a / &two_b;
            let arg = Float::with_val(p, &outer.w * &v) + &outer.theta;
            acc += Float::with_val(p, &self.b * &outer.a) * act.eval(&arg);
        }
        acc
    }
}

/// Converts `h3d` into `h6d` with the outer identity approximated within
/// `eps2 = 2^(6 - 6/v0) eps1 / (3B)`, so that `|h3d - h6d| <= eps1`.
pub fn unify_activation(square: &SquareNet, eps1: &Real, bridge: &PolyBridge) -> Result<UnifiedSquareNet> {
    let prec = bridge.precision();
    let p = prec.bits();
    let max_a = square.h3.max_abs_coefficient();
    let b = Float::with_val(p, max_a * square.d as u64) / 2u32;
    let b = b.max(&prec.int(1));
    let v0 = bridge.profile().v0;
    let eps2 = Float::with_val(p, eps1 / Float::with_val(p, &b * 3u32)) * prec.real(2f64.powf(6.0 - 6.0 / v0));
    let outer = bridge.poly_to_shallow(&Poly::monomial(1, prec), &eps2)?;
    Ok(UnifiedSquareNet {
        inner: square.h3.clone(),
        outer,
        b,
        d: square.d,
        eps2,
    })
}

/// `48 (3 + r(r+1) + r (s+1)! 7 (r+1))`.
pub fn weight_exponent(r: f64, s: usize) -> f64 {
    48.0 * (3.0 + r * (r + 1.0) + r * factorial_f64(s + 1) * 7.0 * (r + 1.0))
}

/// Constants, tolerances and audit results of one radial build.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub r: f64,
    pub a: f64,
    pub eps: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// Lipschitz bound of the univariate net.
    pub lipschitz: f64,
    /// `Lambda eps^(7 (s+1)!) / (A n^2)`, at least 1.
    pub c5: f64,
    pub b: f64,
    pub theta0: f64,
    pub precision_bits: u32,
    pub widths: Vec<usize>,
    pub expanded_widths: Vec<usize>,
    pub param_count: u128,
    pub sandwich_ok: bool,
    pub max_abs_param_log2: f64,
    pub max_abs_leaf_w: f64,
    pub max_abs_bias: f64,
    pub bias_cap: f64,
    pub caps_ok: bool,
    pub alpha: f64,
    /// `max(|theta0| + 4, max|param| / n^alpha)`.
    pub r_bound: f64,
    pub bounds_ok: bool,
    pub univariate_error_bound: f64,
}

#[derive(Clone, Debug)]
pub struct RadialBuild {
    pub net: TreeNet,
    pub square: SquareNet,
    pub unified: UnifiedSquareNet,
    pub univariate: UnivariateBuild,
    pub report: BuildReport,
}

fn log2_abs(x: &Real) -> f64 {
    if x.is_zero() {
        f64::NEG_INFINITY
    } else {
        Float::with_val(64, x.abs_ref()).log2().to_f64()
    }
}

/// `sum_q |a_q| Lip(phi_top) sum_i |a_i w_i|` over the univariate net.
fn lipschitz_of(uni: &TreeNet) -> Real {
    let prec = uni.precision();
    let p = prec.bits();
    let lip_top = uni.arch().activations()[2].lipschitz(prec);
    let fan = uni.arch().widths()[1];
    let mut total = Float::new(p);
    for (q, top) in uni.layer(2).iter().enumerate() {
        let mut inner = Float::new(p);
        for i in q * fan..(q + 1) * fan {
            let w = &uni.leaves()[i].w;
            inner += Float::with_val(p, &uni.layer(1)[i].a * w).abs();
        }
        total += Float::with_val(p, top.a.abs_ref()) * &lip_top * inner;
    }
    total
}

fn construct(
    target: &RadialTarget,
    n: usize,
    d: usize,
    a: f64,
    eps: f64,
    act: Activation,
    cfg: &BuildConfig,
    prec: Precision,
) -> Result<(RadialBuild, u32)> {
    let p = prec.bits();
    let uni_target = target.half_interval_target();
    let mut uni_cfg = cfg.clone();
    uni_cfg.precision = prec;
    uni_cfg.auto_raise = false;
    let s = target.s;
    let s0 = cfg.s0_for(s);
    let theta0 = cfg.theta0_for(&act, s0)?;
    uni_cfg.theta0 = Some(theta0);
    let uni = build_univariate_net(&uni_target, n, a, eps, act, &uni_cfg)?;

    let lambda = lipschitz_of(&uni.net);
    let lambda_f = lambda.to_f64();
    let dd = (d + 2) as f64;
    let mut eps1 = prec.real(eps) / Float::with_val(p, &lambda * (d + 2) as u64);
    let cap = prec.real(1.0 / dd);
    if eps1 > cap {
        eps1 = cap;
    }
    let r = target.r();
    let nf = n as f64;
    let c5 = (lambda_f * eps.powf(7.0 * factorial_f64(s + 1)) / (a * nf * nf)).max(1.0);

    let bridge = PolyBridge::new(act, theta0, act.profile(s0)?, prec)?;
    let square = build_square_net(d, &eps1, &bridge)?;
    let unified = unify_activation(&square, &eps1, &bridge)?;
    let net = assemble(&uni.net, &unified, d, s, prec, theta0)?;

    // audit
    let width_ok = net.arch().widths() == [d, 6, s + 3, 3 * n + 3];
    let count = net.param_count();
    let base = (6 * d * (s + 3) * (3 * n + 3)) as u128;
    let sandwich_ok = width_ok && base <= count && count <= 9 * base;
    let max_abs = net.max_abs_param();
    let max_log2 = log2_abs(&max_abs);
    let bias_cap = 1.0 + 3.0 * a * nf + theta0.abs();
    let mut max_leaf_w = 0.0f64;
    let mut max_bias = 0.0f64;
    for l in net.leaves() {
        max_leaf_w = max_leaf_w.max(l.w.to_f64().abs());
        max_bias = max_bias.max(l.b.to_f64().abs());
    }
    for k in 1..=3 {
        for node in net.layer(k) {
            max_bias = max_bias.max(node.b.to_f64().abs());
        }
    }
    let caps_ok = max_leaf_w <= 1.0 && max_bias <= bias_cap * (1.0 + 1e-12);
    let alpha = weight_exponent(r, s);
    let c1 = (max_log2 - alpha * nf.log2()).exp2();
    let r_bound = (theta0.abs() + 4.0).max(c1);
    let bounds_ok = check_bounds(&net, BoundSpec { r: r_bound, alpha }).passed;

    let eps2 = unified.eps2.to_f64();
    let min_eps = eps2
        .min(eps1.to_f64() / 3.0)
        .min(uni.report.eps1 / (s as f64 + 1.0))
        .min(eps / 9.0);
    let need = required_bits(max_log2, min_eps);
    let report = BuildReport {
        n,
        d,
        s,
        r,
        a,
        eps,
        eps1: eps1.to_f64(),
        eps2,
        lipschitz: lambda_f,
        c5,
        b: unified.b.to_f64(),
        theta0,
        precision_bits: p,
        widths: net.arch().widths().to_vec(),
        expanded_widths: vec![d, 6, s + 3, 3 * (3 * n + 3)],
        param_count: count,
        sandwich_ok,
        max_abs_param_log2: max_log2,
        max_abs_leaf_w: max_leaf_w,
        max_abs_bias: max_bias,
        bias_cap,
        caps_ok,
        alpha,
        r_bound,
        bounds_ok,
        univariate_error_bound: uni.report.error_bound,
    };
    Ok((
        RadialBuild {
            net,
            square,
            unified,
            univariate: uni,
            report,
        },
        need,
    ))
}

/// Feeds `h6d` into the univariate net.
fn assemble(
    uni: &TreeNet,
    unified: &UnifiedSquareNet,
    d: usize,
    s: usize,
    prec: Precision,
    theta0: f64,
) -> Result<TreeNet> {
    let p = prec.bits();
    let act = unified.inner.activation;
    let width = unified.width();
    let uni_acts = uni.arch().activations();
    let arch = TreeArch::new(
        vec![d, width, s + 3, uni.arch().widths()[2]],
        vec![
            LayerActivation::Sigmoid(act),
            LayerActivation::Sigmoid(act),
            uni_acts[1].clone(),
            uni_acts[2].clone(),
        ],
    )?;
    let two_b = Float::with_val(p, &unified.b * 2u32);
    // per second-layer node (k, k'): (leaf coefficient, leaf weight, leaf bias,
    // node coefficient before scaling by w*, node bias)
    let mut templates = Vec::with_capacity(width);
    for k in 0..unified.inner.len() {
        for kk in 0..unified.outer.len() {
            let inner = &unified.inner.terms[k];
            let outer = &unified.outer.terms[kk];
            let leaf_a = Float::with_val(p, &outer.w * &inner.a) / &two_b;
            let node_a = Float::with_val(p, &unified.b * &outer.a);
            templates.push((leaf_a, inner.w.clone(), inner.theta.clone(), node_a, outer.theta.clone()));
        }
    }
    let uni_mid = uni.layer(1);
    let mut leaves = Vec::with_capacity(uni_mid.len() * width * d);
    let mut first = Vec::with_capacity(uni_mid.len() * width);
    for (i, node) in uni_mid.iter().enumerate() {
        let w_star = &uni.leaves()[i].w;
        for (leaf_a, leaf_w, leaf_b, node_a, node_b) in &templates {
            for _ in 0..d {
                leaves.push(LeafParam {
                    a: leaf_a.clone(),
                    w: leaf_w.clone(),
                    b: leaf_b.clone(),
                });
            }
            first.push(NodeParam {
                a: Float::with_val(p, node_a * w_star),
                b: node_b.clone(),
            });
        }
        let _ = node;
    }
    let second: Vec<NodeParam> = uni_mid.to_vec();
    let top: Vec<NodeParam> = uni.layer(2).to_vec();
    let mut net = TreeNet::from_parts(arch, prec, theta0, leaves, vec![first, second, top])?;
    net.metadata = uni.metadata.clone();
    net.metadata.insert("builder".into(), "radial".into());
    net.metadata.insert("d".into(), d.to_string());
    net.metadata.insert("eps2".into(), unified.eps2.to_string_radix(10, Some(17)));
    Ok(net)
}

/// Builds the radial approximant with `A = n^(r+1)` and `eps = n^-(r+1)`.
pub fn build_radial_net(
    target: &RadialTarget,
    n: usize,
    d: usize,
    act: Activation,
    cfg: &BuildConfig,
) -> Result<RadialBuild> {
    let k = target.r() + 1.0;
    let nf = n as f64;
    build_radial_net_with(target, n, d, nf.powf(k), nf.powf(-k), act, cfg)
}

/// Radial approximant with explicit `A` and `eps`.
pub fn build_radial_net_with(
    target: &RadialTarget,
    n: usize,
    d: usize,
    a: f64,
    eps: f64,
    act: Activation,
    cfg: &BuildConfig,
) -> Result<RadialBuild> {
    if n == 0 || d == 0 {
        return Err(Error::arg("n and d must be positive"));
    }
    let mut build = with_precision(cfg, |prec| construct(target, n, d, a, eps, act, cfg, prec))?;
    build.net.metadata.insert("theta0_tol".into(), format!("{}", cfg.theta0_tol));
    Ok(build)
}

/// Sup error over `n_radial` radii times `n_sphere` random directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialError {
    pub sup_error: f64,
    pub at_radius: f64,
    pub samples: usize,
}

/// Sample points of the ball: radii `i / (n_radial - 1)` along seeded
/// uniform directions.
pub fn radial_points(d: usize, n_radial: usize, n_sphere: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, 0x7261);
    let dirs: Vec<Vec<f64>> = (0..n_sphere.max(1))
        .map(|_| loop {
            let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect();
    let mut pts = Vec::with_capacity(n_radial * dirs.len());
    for i in 0..n_radial {
        let rho = if n_radial == 1 { 1.0 } else { i as f64 / (n_radial - 1) as f64 };
        for u in &dirs {
            pts.push(u.iter().map(|c| c * rho).collect());
        }
    }
    pts
}

pub fn measure_radial_error(
    net: &TreeNet,
    target: &RadialTarget,
    n_radial: usize,
    n_sphere: usize,
    seed: u64,
) -> Result<RadialError> {
    let prec = net.precision();
    let d = net.arch().input_dim();
    let mut sup = 0.0f64;
    let mut at = 0.0;
    let pts = radial_points(d, n_radial, n_sphere, seed);
    for x in &pts {
        let xr: Vec<Real> = x.iter().map(|&v| prec.real(v)).collect();
        let h = net.eval(&xr)?;
        let f = target.eval(&xr);
        let e = Float::with_val(prec.bits(), h - f).abs().to_f64();
        if !e.is_finite() {
            return Err(Error::NonFinite {
                point: format!("{x:?}"),
                detail: "network output".into(),
            });
        }
        if e > sup {
            sup = e;
            at = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        }
    }
    Ok(RadialError {
        sup_error: sup,
        at_radius: at,
        samples: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::ActivationKind;

    fn bridge() -> PolyBridge {
        let act = Activation::new(ActivationKind::Logistic);
        let t = act.find_theta0(3, 0.05).unwrap();
        PolyBridge::new(act, t, act.profile(3).unwrap(), Precision::new(512).unwrap()).unwrap()
    }

    #[test]
    fn alpha_for_lipschitz_targets() {
        assert_eq!(weight_exponent(1.0, 0), 912.0);
    }

    #[test]
    fn square_net_error_within_budget() {
        let b = bridge();
        let prec = b.precision();
        let eps1 = prec.real(1e-4);
        let sq = build_square_net(3, &eps1, &b).unwrap();
        let x = [prec.real(0.3), prec.real(-0.5), prec.real(0.1)];
        let err = (sq.eval(&x).to_f64() - 0.35 / 2.0).abs();
        assert!(err <= 3.0 * 1e-4 / 2.0);
    }

    #[test]
    fn unified_net_tracks_square_net() {
        let b = bridge();
        let prec = b.precision();
        let eps1 = prec.real(1e-3);
        let sq = build_square_net(2, &eps1, &b).unwrap();
        let un = unify_activation(&sq, &eps1, &b).unwrap();
        assert_eq!(un.width(), 6);
        for &(u, v) in &[(0.0, 0.0), (0.6, -0.2), (-0.7, 0.7)] {
            let x = [prec.real(u), prec.real(v)];
            let gap = (un.eval(&x) - sq.eval(&x)).abs().to_f64();
            assert!(gap <= 1e-3);
        }
    }

    #[test]
    fn small_radial_build() {
        let act = Activation::new(ActivationKind::Logistic);
        let t = RadialTarget::squared_norm();
        let b = build_radial_net(&t, 4, 2, act, &BuildConfig::default()).unwrap();
        assert_eq!(b.net.arch().widths(), &[2, 6, 3, 15]);
        assert!(b.report.sandwich_ok);
        assert!(b.report.caps_ok);
        let p = b.net.precision();
        let x = [p.real(0.3), p.real(0.4)];
        let composed = b.univariate.net.eval(&[b.unified.eval(&x)]).unwrap();
        let gap = Float::with_val(p.bits(), b.net.eval(&x).unwrap() - composed).abs();
        assert!(gap.to_f64() < 1e-30);
    }
}
