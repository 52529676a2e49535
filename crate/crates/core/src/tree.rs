//! Deep tree networks.
//!
//! A tree of depth `L` with widths `(N_0, ..., N_L)` has `N_L` nodes at the
//! top, each with `N_{L-1}` children, down to `N_0` leaves per layer-1 node.
//! Leaf `j` under a layer-1 node reads coordinate `j` of the input and
//! computes `a phi_0(w x_j + b)`; a node at layer `k >= 1` computes
//! `a phi_k(sum of its children + b)`; the output is the sum over the top
//! layer. Every path through the tree owns its parameters, so a layer holds
//! `N_k N_{k+1} ... N_L` parameter groups.
//!
//! Node `p` at layer `k` has its children at indices `p N_{k-1} + c` of layer
//! `k - 1`.
//!
//! Constructed networks repeat identical subtrees many times. Evaluation
//! interns structurally identical subtrees once per network and computes each
//! distinct value once; the arithmetic is the same sequence of roundings as
//! naive evaluation, so both give bit-identical results.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::numeric::{Precision, Real};
use crate::poly::ShallowNet1D;

/// Activation used by one layer.
#[derive(Clone, Debug, PartialEq)]
pub enum LayerActivation {
    Identity,
    Sigmoid(Activation),
    /// A fixed one-hidden-layer unit `t -> sum_j a_j phi(w_j t + theta_j)`.
    Unit(ShallowNet1D),
}

impl LayerActivation {
    pub fn eval(&self, t: &Real) -> Real {
        match self {
            LayerActivation::Identity => t.clone(),
            LayerActivation::Sigmoid(a) => a.eval(t),
            LayerActivation::Unit(u) => u.eval(t),
        }
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        match self {
            LayerActivation::Identity => t,
            LayerActivation::Sigmoid(a) => a.eval_f64(t),
            LayerActivation::Unit(u) => u.eval_f64(t),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            LayerActivation::Identity => "identity".into(),
            LayerActivation::Sigmoid(a) => a.name(),
            LayerActivation::Unit(u) => format!("unit[{} x {}]", u.len(), u.activation.name()),
        }
    }

    /// Lipschitz bound, using `|phi'| <= 1` for sigmoids.
    pub fn lipschitz(&self, prec: Precision) -> Real {
        match self {
            LayerActivation::Identity | LayerActivation::Sigmoid(_) => prec.int(1),
            LayerActivation::Unit(u) => Float::with_val(prec.bits(), u.lipschitz_bound()),
        }
    }
}

/// Widths and per-layer activations.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeArch {
    widths: Vec<usize>,
    activations: Vec<LayerActivation>,
}

impl TreeArch {
    pub fn new(widths: Vec<usize>, activations: Vec<LayerActivation>) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::arg("a tree needs at least one layer above the leaves"));
        }
        if widths.contains(&0) {
            return Err(Error::arg(format!("widths {widths:?} contain a zero")));
        }
        if activations.len() != widths.len() {
            return Err(Error::arg(format!(
                "{} activations given for {} layers",
                activations.len(),
                widths.len()
            )));
        }
        Ok(TreeArch {
            widths,
            activations,
        })
    }

    /// Same sigmoid on every layer.
    pub fn uniform(widths: Vec<usize>, act: Activation) -> Result<Self> {
        let acts = vec![LayerActivation::Sigmoid(act); widths.len()];
        TreeArch::new(widths, acts)
    }

    /// Depth `L`.
    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activations(&self) -> &[LayerActivation] {
        &self.activations
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    /// Number of parameter groups at each layer, `N_k ... N_L`.
    pub fn layer_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.widths.len()];
        let mut acc = 1usize;
        for k in (0..self.widths.len()).rev() {
            acc *= self.widths[k];
            counts[k] = acc;
        }
        counts
    }

    pub fn param_count(&self) -> u128 {
        param_count(&self.widths)
    }
}

/// Closed form `2 sum_{k=0}^{L} prod_{l=0}^{L-k} N_{L-l} + prod_l N_l`.
pub fn param_count(widths: &[usize]) -> u128 {
    let l = widths.len() - 1;
    let mut sum = 0u128;
    for k in 0..=l {
        let mut prod = 1u128;
        for j in 0..=(l - k) {
            prod *= widths[l - j] as u128;
        }
        sum += prod;
    }
    let all: u128 = widths.iter().map(|&n| n as u128).product();
    2 * sum + all
}

/// Parameter count obtained by visiting every node of the tree.
pub fn param_count_enumerated(widths: &[usize]) -> u128 {
    fn visit(widths: &[usize], k: usize) -> u128 {
        if k == 0 {
            return 3;
        }
        let children: u128 = (0..widths[k - 1]).map(|_| visit(widths, k - 1)).sum();
        2 + children
    }
    let l = widths.len() - 1;
    (0..widths[l]).map(|_| visit(widths, l)).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeafParam {
    pub a: Real,
    pub w: Real,
    pub b: Real,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeParam {
    pub a: Real,
    pub b: Real,
}

#[derive(Clone, Debug)]
struct LayerPlan {
    /// Representative node of each distinct subtree.
    reps: Vec<usize>,
    /// Distinct-subtree id of every node.
    ids: Vec<u32>,
}

#[derive(Clone, Debug)]
struct EvalPlan {
    leaves: LayerPlan,
    nodes: Vec<LayerPlan>,
}

/// A tree network with arbitrary-precision parameters.
#[derive(Clone, Debug)]
pub struct TreeNet {
    arch: TreeArch,
    precision: Precision,
    theta0: f64,
    leaves: Vec<LeafParam>,
    /// `nodes[k - 1]` holds layer `k`.
    nodes: Vec<Vec<NodeParam>>,
    pub metadata: BTreeMap<String, String>,
    plan: OnceLock<EvalPlan>,
}

impl PartialEq for TreeNet {
    fn eq(&self, other: &Self) -> bool {
        self.arch == other.arch
            && self.precision == other.precision
            && self.theta0 == other.theta0
            && self.leaves == other.leaves
            && self.nodes == other.nodes
            && self.metadata == other.metadata
    }
}

fn key(x: &Real) -> String {
    x.to_string_radix(16, None)
}

/// Where a parameter lives, for error messages and bound reports.
fn leaf_location(i: usize, field: &str) -> String {
    format!("leaf[{i}].{field}")
}

fn node_location(k: usize, p: usize, field: &str) -> String {
    format!("layer[{k}].node[{p}].{field}")
}

impl TreeNet {
    /// Network with all parameters zero.
    pub fn zeros(arch: TreeArch, precision: Precision, theta0: f64) -> Self {
        let counts = arch.layer_counts();
        let leaves = (0..counts[0])
            .map(|_| LeafParam {
                a: precision.zero(),
                w: precision.zero(),
                b: precision.zero(),
            })
            .collect();
        let nodes = counts[1..]
            .iter()
            .map(|&c| {
                (0..c)
                    .map(|_| NodeParam {
                        a: precision.zero(),
                        b: precision.zero(),
                    })
                    .collect()
            })
            .collect();
        TreeNet {
            arch,
            precision,
            theta0,
            leaves,
            nodes,
            metadata: BTreeMap::new(),
            plan: OnceLock::new(),
        }
    }

    /// Assembles a network from explicit parameter lists.
    pub fn from_parts(
        arch: TreeArch,
        precision: Precision,
        theta0: f64,
        leaves: Vec<LeafParam>,
        nodes: Vec<Vec<NodeParam>>,
    ) -> Result<Self> {
        let counts = arch.layer_counts();
        if leaves.len() != counts[0] {
            return Err(Error::arg(format!(
                "expected {} leaves, got {}",
                counts[0],
                leaves.len()
            )));
        }
        if nodes.len() != arch.depth() {
            return Err(Error::arg(format!(
                "expected {} node layers, got {}",
                arch.depth(),
                nodes.len()
            )));
        }
        for (k, layer) in nodes.iter().enumerate() {
            if layer.len() != counts[k + 1] {
                return Err(Error::arg(format!(
                    "layer {} needs {} nodes, got {}",
                    k + 1,
                    counts[k + 1],
                    layer.len()
                )));
            }
        }
        let net = TreeNet {
            arch,
            precision,
            theta0,
            leaves,
            nodes,
            metadata: BTreeMap::new(),
            plan: OnceLock::new(),
        };
        net.check_precision()?;
        Ok(net)
    }

    fn check_precision(&self) -> Result<()> {
        let p = self.precision;
        for l in &self.leaves {
            p.check(&l.a)?;
            p.check(&l.w)?;
            p.check(&l.b)?;
        }
        for layer in &self.nodes {
            for n in layer {
                p.check(&n.a)?;
                p.check(&n.b)?;
            }
        }
        Ok(())
    }

    pub fn arch(&self) -> &TreeArch {
        &self.arch
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn leaves(&self) -> &[LeafParam] {
        &self.leaves
    }

    /// Parameters of layer `k` (`1 <= k <= L`).
    pub fn layer(&self, k: usize) -> &[NodeParam] {
        &self.nodes[k - 1]
    }

    pub fn leaves_mut(&mut self) -> &mut [LeafParam] {
        self.plan = OnceLock::new();
        &mut self.leaves
    }

    pub fn layer_mut(&mut self, k: usize) -> &mut [NodeParam] {
        self.plan = OnceLock::new();
        &mut self.nodes[k - 1]
    }

    pub fn param_count(&self) -> u128 {
        self.arch.param_count()
    }

    fn check_input(&self, x: &[Real]) -> Result<()> {
        if x.len() != self.arch.input_dim() {
            return Err(Error::arg(format!(
                "input has {} coordinates, network expects {}",
                x.len(),
                self.arch.input_dim()
            )));
        }
        for v in x {
            self.precision.check(v)?;
        }
        Ok(())
    }

    fn leaf_value(&self, i: usize, x: &[Real]) -> Real {
        let p = self.precision.bits();
        let leaf = &self.leaves[i];
        let j = i % self.arch.widths[0];
        let arg = Float::with_val(p, &leaf.w * &x[j]) + &leaf.b;
        self.arch.activations[0].eval(&arg)
    }

    /// Evaluates every node separately, without sharing.
    pub fn eval_naive(&self, x: &[Real]) -> Result<Real> {
        self.check_input(x)?;
        let p = self.precision.bits();
        let mut vals: Vec<Real> = (0..self.leaves.len()).map(|i| self.leaf_value(i, x)).collect();
        let mut coeffs: Vec<&Real> = self.leaves.iter().map(|l| &l.a).collect();
        for k in 1..=self.arch.depth() {
            let fan = self.arch.widths[k - 1];
            let layer = &self.nodes[k - 1];
            let mut next = Vec::with_capacity(layer.len());
            for (q, node) in layer.iter().enumerate() {
                let mut acc = Float::new(p);
                for c in q * fan..(q + 1) * fan {
                    acc += Float::with_val(p, coeffs[c] * &vals[c]);
                }
                acc += &node.b;
                next.push(self.arch.activations[k].eval(&acc));
            }
            vals = next;
            coeffs = layer.iter().map(|n| &n.a).collect();
        }
        let mut out = Float::new(p);
        for (a, v) in coeffs.iter().zip(&vals) {
            out += Float::with_val(p, *a * v);
        }
        Ok(out)
    }

    fn build_plan(&self) -> EvalPlan {
        let mut leaf_ids = Vec::with_capacity(self.leaves.len());
        let mut leaf_reps = Vec::new();
        let mut seen: HashMap<(usize, String, String), u32> = HashMap::new();
        let n0 = self.arch.widths[0];
        for (i, l) in self.leaves.iter().enumerate() {
            let k = (i % n0, key(&l.w), key(&l.b));
            let next = leaf_reps.len() as u32;
            let id = *seen.entry(k).or_insert_with(|| {
                leaf_reps.push(i);
                next
            });
            leaf_ids.push(id);
        }
        let leaves = LayerPlan {
            reps: leaf_reps,
            ids: leaf_ids,
        };
        let mut layers: Vec<LayerPlan> = Vec::with_capacity(self.arch.depth());
        for k in 1..=self.arch.depth() {
            let fan = self.arch.widths[k - 1];
            let (child_ids, child_a): (&[u32], Vec<&Real>) = if k == 1 {
                (&leaves.ids, self.leaves.iter().map(|l| &l.a).collect())
            } else {
                (&layers[k - 2].ids, self.nodes[k - 2].iter().map(|n| &n.a).collect())
            };
            let mut seen: HashMap<(String, Vec<(String, u32)>), u32> = HashMap::new();
            let mut reps = Vec::new();
            let mut ids = Vec::with_capacity(self.nodes[k - 1].len());
            for (q, node) in self.nodes[k - 1].iter().enumerate() {
                let children = (q * fan..(q + 1) * fan)
                    .map(|c| (key(child_a[c]), child_ids[c]))
                    .collect();
                let next = reps.len() as u32;
                let id = *seen.entry((key(&node.b), children)).or_insert_with(|| {
                    reps.push(q);
                    next
                });
                ids.push(id);
            }
            layers.push(LayerPlan { reps, ids });
        }
        EvalPlan {
            leaves,
            nodes: layers,
        }
    }

    /// Number of distinct subtrees per layer (leaves first).
    pub fn distinct_subtrees(&self) -> Vec<usize> {
        let plan = self.plan.get_or_init(|| self.build_plan());
        std::iter::once(plan.leaves.reps.len())
            .chain(plan.nodes.iter().map(|l| l.reps.len()))
            .collect()
    }

    /// Evaluates with shared subtrees; bit-identical to [`TreeNet::eval_naive`].
    pub fn eval(&self, x: &[Real]) -> Result<Real> {
        self.check_input(x)?;
        let p = self.precision.bits();
        let plan = self.plan.get_or_init(|| self.build_plan());
        let mut vals: Vec<Real> = plan.leaves.reps.iter().map(|&i| self.leaf_value(i, x)).collect();
        let mut ids: &[u32] = &plan.leaves.ids;
        let mut coeffs: Vec<&Real> = self.leaves.iter().map(|l| &l.a).collect();
        for k in 1..=self.arch.depth() {
            let fan = self.arch.widths[k - 1];
            let layer = &self.nodes[k - 1];
            let lp = &plan.nodes[k - 1];
            let mut next = Vec::with_capacity(lp.reps.len());
            for &q in &lp.reps {
                let mut acc = Float::new(p);
                for c in q * fan..(q + 1) * fan {
                    acc += Float::with_val(p, coeffs[c] * &vals[ids[c] as usize]);
                }
                acc += &layer[q].b;
                next.push(self.arch.activations[k].eval(&acc));
            }
            vals = next;
            ids = &lp.ids;
            coeffs = layer.iter().map(|n| &n.a).collect();
        }
        let mut out = Float::new(p);
        for (c, a) in coeffs.iter().enumerate() {
            out += Float::with_val(p, *a * &vals[ids[c] as usize]);
        }
        Ok(out)
    }

    /// Lifts an `f64` point to the network precision and evaluates it.
    pub fn eval_point(&self, x: &[f64]) -> Result<Real> {
        let xs: Vec<Real> = x.iter().map(|&v| self.precision.real(v)).collect();
        self.eval(&xs)
    }

    /// Every parameter with its location, including those inside unit
    /// activations.
    pub fn parameters(&self) -> Vec<(String, &Real)> {
        let mut out = Vec::with_capacity(self.param_count() as usize);
        for (i, l) in self.leaves.iter().enumerate() {
            out.push((leaf_location(i, "a"), &l.a));
            out.push((leaf_location(i, "w"), &l.w));
            out.push((leaf_location(i, "b"), &l.b));
        }
        for (k, layer) in self.nodes.iter().enumerate() {
            for (p, n) in layer.iter().enumerate() {
                out.push((node_location(k + 1, p, "a"), &n.a));
                out.push((node_location(k + 1, p, "b"), &n.b));
            }
        }
        for (k, act) in self.arch.activations.iter().enumerate() {
            if let LayerActivation::Unit(u) = act {
                for (j, t) in u.terms.iter().enumerate() {
                    out.push((format!("activation[{k}].term[{j}].a"), &t.a));
                    out.push((format!("activation[{k}].term[{j}].w"), &t.w));
                    out.push((format!("activation[{k}].term[{j}].theta"), &t.theta));
                }
            }
        }
        out
    }

    /// Largest absolute parameter (unit activations included).
    pub fn max_abs_param(&self) -> Real {
        let mut m = self.precision.zero();
        for (_, v) in self.parameters() {
            if v.cmp_abs(&m) == Some(std::cmp::Ordering::Greater) {
                m = Float::with_val(self.precision.bits(), v.abs_ref());
            }
        }
        m
    }

    /// Replaces a unit activation on the top layer by its sigmoid neurons,
    /// multiplying the top width by the unit size.
    pub fn expand_top_unit(&self) -> Result<TreeNet> {
        let l = self.arch.depth();
        let LayerActivation::Unit(unit) = &self.arch.activations[l] else {
            return Err(Error::arg("the top layer does not use a unit activation"));
        };
        let p = self.precision.bits();
        let m = unit.len();
        let mut widths = self.arch.widths.clone();
        widths[l] *= m;
        let mut acts = self.arch.activations.clone();
        acts[l] = LayerActivation::Sigmoid(unit.activation);
        let arch = TreeArch::new(widths, acts)?;
        let old_counts = self.arch.layer_counts();
        let top = self.arch.widths[l];
        // block of layer-k groups below one top node
        let block = |k: usize| old_counts[k] / top;
        let mut leaves = Vec::with_capacity(old_counts[0] * m);
        let mut nodes: Vec<Vec<NodeParam>> = (1..=l).map(|k| Vec::with_capacity(old_counts[k] * m)).collect();
        for q in 0..top {
            for term in &unit.terms {
                // layer L-1 coefficients absorb the inner weight
                if l == 1 {
                    for lf in &self.leaves[q * block(0)..(q + 1) * block(0)] {
                        leaves.push(LeafParam {
                            a: Float::with_val(p, &lf.a * &term.w),
                            w: lf.w.clone(),
                            b: lf.b.clone(),
                        });
                    }
                } else {
                    leaves.extend_from_slice(&self.leaves[q * block(0)..(q + 1) * block(0)]);
                }
                for k in 1..l {
                    let src = &self.nodes[k - 1][q * block(k)..(q + 1) * block(k)];
                    if k == l - 1 {
                        nodes[k - 1].extend(src.iter().map(|n| NodeParam {
                            a: Float::with_val(p, &n.a * &term.w),
                            b: n.b.clone(),
                        }));
                    } else {
                        nodes[k - 1].extend_from_slice(src);
                    }
                }
                let node = &self.nodes[l - 1][q];
                nodes[l - 1].push(NodeParam {
                    a: Float::with_val(p, &node.a * &term.a),
                    b: Float::with_val(p, &term.w * &node.b) + &term.theta,
                });
            }
        }
        let mut net = TreeNet::from_parts(arch, self.precision, self.theta0, leaves, nodes)?;
        net.metadata = self.metadata.clone();
        net.metadata.insert("expanded_from_unit".into(), "true".into());
        Ok(net)
    }
}

/// Admissible box `|param| <= R * A_L^alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub r: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub location: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsCheck {
    pub passed: bool,
    /// `log2(R A_L^alpha)`.
    pub bound_log2: f64,
    /// `log2` of the largest absolute parameter.
    pub max_abs_log2: f64,
    pub checked: usize,
    pub violation_count: usize,
    /// The first ten offenders.
    pub violations: Vec<BoundViolation>,
}

/// `R A_L^alpha` at precision `prec`.
pub fn weight_bound(a_l: u128, spec: BoundSpec, prec: Precision) -> Real {
    let base = Float::with_val(prec.bits(), a_l);
    let pow = Float::with_val(prec.bits(), (&base).pow(&prec.real(spec.alpha)));
    pow * spec.r
}

fn log2_abs(x: &Real) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    Float::with_val(64, x.abs_ref()).log2().to_f64()
}

/// Checks every parameter against `R A_L^alpha`.
pub fn check_bounds(net: &TreeNet, spec: BoundSpec) -> BoundsCheck {
    let prec = net.precision().max(Precision::DEFAULT);
    let bound = weight_bound(net.param_count(), spec, prec);
    let mut violations = Vec::new();
    let mut checked = 0;
    let mut violation_count = 0;
    let mut max_abs = Float::new(prec.bits());
    for (loc, v) in net.parameters() {
        checked += 1;
        let a = Float::with_val(prec.bits(), v.abs_ref());
        if !(a <= bound) {
            violation_count += 1;
            if violations.len() < 10 {
                violations.push(BoundViolation {
                    location: loc,
                    value: v.to_string_radix(10, Some(12)),
                });
            }
        }
        if a > max_abs {
            max_abs = a;
        }
    }
    BoundsCheck {
        passed: violation_count == 0,
        bound_log2: log2_abs(&bound),
        max_abs_log2: log2_abs(&max_abs),
        checked,
        violation_count,
        violations,
    }
}

/// `log2` of the covering-number bound
/// `(2^{L+5/2} c1^{L+3/2} (R A_L^alpha)^{L+1} / eps)^{2 A_L}`.
pub fn covering_bound_log2(widths: &[usize], spec: BoundSpec, c1: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::arg(format!("eps = {eps} is outside (0, 1]")));
    }
    if !(c1 > 0.0 && spec.r > 0.0) {
        return Err(Error::arg("c1 and R must be positive"));
    }
    if widths.len() < 2 {
        return Err(Error::arg("a tree needs at least one layer above the leaves"));
    }
    let l = (widths.len() - 1) as f64;
    let a_l = param_count(widths) as f64;
    let log_num = (l + 2.5) + (l + 1.5) * c1.log2() + (l + 1.0) * (spec.r.log2() + spec.alpha * a_l.log2());
    Ok(2.0 * a_l * (log_num - eps.log2()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::ActivationKind;

    fn logistic() -> Activation {
        Activation::new(ActivationKind::Logistic)
    }

    fn filled(widths: Vec<usize>, seed: u64) -> TreeNet {
        use rand::Rng;
        let prec = Precision::DEFAULT;
        let arch = TreeArch::uniform(widths, logistic()).unwrap();
        let mut net = TreeNet::zeros(arch, prec, 0.0);
        let mut rng = crate::numeric::stream_rng(seed, 1);
        for l in net.leaves_mut() {
            l.a = prec.real(rng.random_range(-1.0..1.0));
            l.w = prec.real(rng.random_range(-1.0..1.0));
            l.b = prec.real(rng.random_range(-1.0..1.0));
        }
        for k in 1..=net.arch().depth() {
            for n in net.layer_mut(k) {
                n.a = prec.real(rng.random_range(-1.0..1.0));
                n.b = prec.real(rng.random_range(-1.0..1.0));
            }
        }
        net
    }

    #[test]
    fn count_for_small_shapes() {
        assert_eq!(param_count(&[2, 6, 3, 6]), 912);
        assert_eq!(param_count(&[1, 1]), 5);
        assert_eq!(param_count_enumerated(&[2, 6, 3, 6]), 912);
    }

    #[test]
    fn single_path_tree() {
        let prec = Precision::DEFAULT;
        let arch = TreeArch::uniform(vec![1, 1], logistic()).unwrap();
        let net = TreeNet::from_parts(
            arch,
            prec,
            0.0,
            vec![LeafParam {
                a: prec.int(1),
                w: prec.int(1),
                b: prec.zero(),
            }],
            vec![vec![NodeParam {
                a: prec.int(1),
                b: prec.zero(),
            }]],
        )
        .unwrap();
        let x = [prec.zero()];
        let expected = logistic().eval(&logistic().eval(&prec.zero()));
        assert_eq!(net.eval(&x).unwrap(), expected);
        assert_eq!(net.eval_naive(&x).unwrap(), expected);
    }

    #[test]
    fn shared_and_naive_evaluation_agree_bitwise() {
        let mut net = filled(vec![2, 3, 2], 7);
        // duplicate the first top subtree into the second
        let counts = net.arch().layer_counts();
        let block0 = counts[0] / 2;
        let block1 = counts[1] / 2;
        let leaves = net.leaves()[..block0].to_vec();
        net.leaves_mut()[block0..].clone_from_slice(&leaves);
        let mids = net.layer(1)[..block1].to_vec();
        net.layer_mut(1)[block1..].clone_from_slice(&mids);
        let prec = net.precision();
        let x = [prec.real(0.3), prec.real(-0.7)];
        assert_eq!(net.eval(&x).unwrap(), net.eval_naive(&x).unwrap());
        assert_eq!(net.distinct_subtrees()[1], block1);
    }

    #[test]
    fn precision_mismatch_on_input() {
        let net = filled(vec![1, 2], 3);
        let x = [Float::with_val(53, 0.5)];
        assert!(matches!(net.eval(&x), Err(Error::PrecisionMismatch { .. })));
    }

    #[test]
    fn bound_is_inclusive() {
        let prec = Precision::DEFAULT;
        let arch = TreeArch::uniform(vec![1, 1], logistic()).unwrap();
        let mut net = TreeNet::zeros(arch, prec, 0.0);
        let spec = BoundSpec { r: 1.0, alpha: 1.0 };
        net.leaves_mut()[0].a = prec.int(5);
        assert!(check_bounds(&net, spec).passed);
        net.leaves_mut()[0].a = prec.int(6);
        let check = check_bounds(&net, spec);
        assert!(!check.passed);
        assert_eq!(check.violations[0].location, "leaf[0].a");
    }

    #[test]
    fn covering_bound_example() {
        let spec = BoundSpec { r: 1.0, alpha: 1.0 };
        let v = covering_bound_log2(&[2, 6, 3, 6], spec, 1.0, 1.0).unwrap();
        let expected = 2.0 * 912.0 * (5.5 + 4.0 * 912f64.log2());
        assert!((v - expected).abs() < 1e-9 * expected);
        assert!(covering_bound_log2(&[2, 6, 3, 6], spec, 1.0, 0.0).is_err());
    }
}
