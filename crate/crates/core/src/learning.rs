//! Empirical least-squares learning over tree architectures.
//!
//! Samples are drawn uniformly from the unit ball, a tree net is fitted by
//! multi-restart mini-batch Adam (an approximate empirical risk minimiser),
//! its output is truncated to `[-M, M]` and the excess risk
//! `||pi_M f - f_rho||^2` is estimated by Monte Carlo. Training runs in
//! double precision.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::activation::{Activation, ActivationKind};
use crate::error::{Error, Result};
use crate::numeric::{loglog_fit, stream_rng, Precision};
use crate::target::RadialTarget;
use crate::tree::{weight_bound, BoundSpec, LeafParam, NodeParam, TreeArch, TreeNet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Noise {
    None,
    /// `U(-sigma, sigma)`.
    BoundedUniform { sigma: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Minimum number of Adam steps.
    pub steps: usize,
    /// Passes over the data; the run takes `max(steps, epochs m / batch)`
    /// steps so the optimisation effort grows with the sample.
    pub epochs: f64,
    pub restarts: usize,
    pub batch: usize,
    pub learning_rate: f64,
    /// Learning rate at the last step relative to the first.
    pub final_lr_ratio: f64,
    /// Scale of the random initialisation.
    pub init_scale: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            steps: 1000,
            epochs: 40.0,
            restarts: 4,
            batch: 64,
            learning_rate: 3e-2,
            final_lr_ratio: 0.02,
            init_scale: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearningConfig {
    pub m: usize,
    pub d: usize,
    /// Response bound `M`.
    pub response_bound: f64,
    pub noise: Noise,
    /// `C` in `n = floor(C m^(1/(2r+1)))`.
    pub n_constant: f64,
    pub optimizer: OptimizerConfig,
    pub activation: ActivationKind,
    pub n_test: usize,
    pub seed: u64,
}

impl OptimizerConfig {
    pub fn total_steps(&self, m: usize) -> usize {
        let by_epochs = (self.epochs.max(0.0) * m as f64 / self.batch.max(1) as f64).ceil() as usize;
        self.steps.max(by_epochs)
    }
}

impl Default for LearningConfig {
    fn default() -> Self {
        LearningConfig {
            m: 256,
            d: 2,
            response_bound: 2.0,
            noise: Noise::None,
            n_constant: 1.0,
            optimizer: OptimizerConfig::default(),
            activation: ActivationKind::Logistic,
            n_test: 4000,
            seed: 0,
        }
    }
}

impl LearningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::arg("m must be at least 1"));
        }
        if self.d == 0 {
            return Err(Error::arg("d must be at least 1"));
        }
        if !(self.response_bound > 0.0) {
            return Err(Error::arg("response bound M must be positive"));
        }
        if !(self.n_constant > 0.0) {
            return Err(Error::arg("n constant must be positive"));
        }
        if self.optimizer.restarts == 0 || self.optimizer.batch == 0 {
            return Err(Error::arg("restarts and batch must be positive"));
        }
        if self.n_test == 0 {
            return Err(Error::arg("n_test must be at least 1"));
        }
        if let Noise::BoundedUniform { sigma } = self.noise {
            if !(sigma >= 0.0) {
                return Err(Error::arg("noise level must be non-negative"));
            }
        }
        Ok(())
    }

    /// `floor(C m^(1/(2r+1)))`, at least 1.
    pub fn n_for(&self, m: usize, r: f64) -> usize {
        ((self.n_constant * (m as f64).powf(1.0 / (2.0 * r + 1.0))).floor() as usize).max(1)
    }
}

/// Widths `(d, 6, s+3, 3n+3)`.
pub fn learning_widths(d: usize, s: usize, n: usize) -> Vec<usize> {
    vec![d, 6, s + 3, 3 * n + 3]
}

/// Uniform point of the unit ball in `R^d`.
pub fn uniform_ball<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-300 {
            let radius = rng.random::<f64>().powf(1.0 / d as f64);
            return g.into_iter().map(|v| v / norm * radius).collect();
        }
    }
}

/// `sign(v) min(|v|, M)`.
pub fn truncate(v: f64, m: f64) -> f64 {
    v.clamp(-m, m)
}

pub fn sample_dataset(f_rho: &RadialTarget, cfg: &LearningConfig, stream: u64) -> Result<Vec<Sample>> {
    cfg.validate()?;
    let sup = f_rho.profile.sup_abs(0.0, 1.0, 2001);
    let sigma = match cfg.noise {
        Noise::None => 0.0,
        Noise::BoundedUniform { sigma } => sigma,
    };
    if sup + sigma > cfg.response_bound {
        return Err(Error::arg(format!(
            "noise level {sigma} with sup |f| = {sup:.4} exceeds the response bound {}",
            cfg.response_bound
        )));
    }
    let mut rng = stream_rng(cfg.seed, stream);
    Ok((0..cfg.m)
        .map(|_| {
            let x = uniform_ball(&mut rng, cfg.d);
            let mut y = f_rho.eval_f64(&x);
            if sigma > 0.0 {
                y += sigma * (2.0 * rng.random::<f64>() - 1.0);
            }
            Sample {
                x,
                y: truncate(y, cfg.response_bound),
            }
        })
        .collect())
}

/// Anything that maps a point of the ball to a value.
pub trait Predictor {
    fn predict(&self, x: &[f64]) -> Result<f64>;
}

impl Predictor for TreeNet {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_point(x)?.to_f64())
    }
}

impl<F: Fn(&[f64]) -> f64> Predictor for F {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self(x))
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// `E (pi_M net(x) - f_rho(x))^2` for `x` uniform on the ball.
pub fn excess_risk<P: Predictor + ?Sized>(
    net: &P,
    f_rho: &RadialTarget,
    d: usize,
    m_bound: f64,
    n_test: usize,
    seed: u64,
) -> Result<Estimate> {
    excess_risk_with(net, f_rho, d, n_test, seed, Some(m_bound))
}

/// As [`excess_risk`], optionally without truncation.
pub fn excess_risk_with<P: Predictor + ?Sized>(
    net: &P,
    f_rho: &RadialTarget,
    d: usize,
    n_test: usize,
    seed: u64,
    m_bound: Option<f64>,
) -> Result<Estimate> {
    if n_test == 0 {
        return Err(Error::arg("n_test must be at least 1"));
    }
    let mut rng = stream_rng(seed, 0x7465);
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..n_test {
        let x = uniform_ball(&mut rng, d);
        let mut v = net.predict(&x)?;
        if let Some(m) = m_bound {
            v = truncate(v, m);
        }
        let e = (v - f_rho.eval_f64(&x)).powi(2);
        sum += e;
        sum2 += e * e;
    }
    let n = n_test as f64;
    let mean = sum / n;
    let var = if n_test > 1 {
        ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(Estimate {
        value: mean,
        stderr: (var / n).sqrt(),
    })
}

/// A tree net in double precision with a flat parameter vector, laid out as
/// leaf `a`, leaf `w`, leaf `b`, then `a` and `b` of each node layer.
#[derive(Clone, Debug, PartialEq)]
pub struct F64Net {
    widths: Vec<usize>,
    counts: Vec<usize>,
    act: Activation,
    pub params: Vec<f64>,
}

/// Per-sample activations kept for the backward pass.
#[derive(Clone, Debug, Default)]
struct Cache {
    /// `phi(z)` per layer.
    phi: Vec<Vec<f64>>,
    /// `phi'(z)` per layer.
    dphi: Vec<Vec<f64>>,
}

impl F64Net {
    pub fn zeros(widths: &[usize], act: Activation) -> Result<Self> {
        let arch = TreeArch::uniform(widths.to_vec(), act)?;
        let counts = arch.layer_counts();
        let len = 3 * counts[0] + 2 * counts[1..].iter().sum::<usize>();
        Ok(F64Net {
            widths: widths.to_vec(),
            counts,
            act,
            params: vec![0.0; len],
        })
    }

    /// Random start: coefficients shrink with the number of siblings so
    /// every node sum stays of order one.
    pub fn random<R: Rng>(widths: &[usize], act: Activation, scale: f64, rng: &mut R) -> Result<Self> {
        let mut net = F64Net::zeros(widths, act)?;
        let mut normal = || -> f64 { StandardNormal.sample(rng) };
        let c0 = net.counts[0];
        let fan0 = 4.0 / (widths[0] as f64).sqrt();
        for i in 0..c0 {
            net.params[i] = scale * fan0 * normal();
            net.params[c0 + i] = 2.0 * normal();
            net.params[2 * c0 + i] = normal();
        }
        for k in 1..net.widths.len() {
            let (oa, ob) = net.node_offsets(k);
            let fan = 4.0 / (widths[k] as f64).sqrt();
            for p in 0..net.counts[k] {
                net.params[oa + p] = scale * fan * normal();
                net.params[ob + p] = normal();
            }
        }
        Ok(net)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }

    fn node_offsets(&self, k: usize) -> (usize, usize) {
        let mut off = 3 * self.counts[0];
        for j in 1..k {
            off += 2 * self.counts[j];
        }
        (off, off + self.counts[k])
    }

    fn forward(&self, x: &[f64], cache: &mut Cache) -> f64 {
        let l = self.depth();
        cache.phi.resize(l + 1, Vec::new());
        cache.dphi.resize(l + 1, Vec::new());
        let d = self.widths[0];
        let c0 = self.counts[0];
        let mut h: Vec<f64> = Vec::with_capacity(c0);
        {
            let (phi, dphi) = (&mut cache.phi[0], &mut cache.dphi[0]);
            phi.clear();
            dphi.clear();
            for i in 0..c0 {
                let z = self.params[c0 + i] * x[i % d] + self.params[2 * c0 + i];
                let (f, df) = self.phi_and_derivative(z);
                phi.push(f);
                dphi.push(df);
                h.push(self.params[i] * f);
            }
        }
        for k in 1..=l {
            let (oa, ob) = self.node_offsets(k);
            let fan = self.widths[k - 1];
            let mut next = Vec::with_capacity(self.counts[k]);
            let (phi, dphi) = (&mut cache.phi[k], &mut cache.dphi[k]);
            phi.clear();
            dphi.clear();
            for p in 0..self.counts[k] {
                let s: f64 = h[p * fan..(p + 1) * fan].iter().sum();
                let (f, df) = self.phi_and_derivative(s + self.params[ob + p]);
                phi.push(f);
                dphi.push(df);
                next.push(self.params[oa + p] * f);
            }
            h = next;
        }
        h.iter().sum()
    }

    fn phi_and_derivative(&self, z: f64) -> (f64, f64) {
        match self.act.kind {
            ActivationKind::Logistic => {
                let f = 1.0 / (1.0 + (-z).exp());
                (self.act.scale * f, self.act.scale * f * (1.0 - f))
            }
            _ => (
                self.act.eval_f64(z),
                self.act.derivative_f64(1, z).unwrap_or(0.0),
            ),
        }
    }

    /// Adds `dout * d(output)/d(params)` to `grad`.
    fn backward(&self, x: &[f64], cache: &Cache, dout: f64, grad: &mut [f64]) {
        let l = self.depth();
        let mut g = vec![dout; self.counts[l]];
        for k in (1..=l).rev() {
            let (oa, ob) = self.node_offsets(k);
            let fan = self.widths[k - 1];
            let mut below = vec![0.0; self.counts[k - 1]];
            for p in 0..self.counts[k] {
                grad[oa + p] += g[p] * cache.phi[k][p];
                let dz = g[p] * self.params[oa + p] * cache.dphi[k][p];
                grad[ob + p] += dz;
                below[p * fan..(p + 1) * fan].iter_mut().for_each(|v| *v = dz);
            }
            g = below;
        }
        let d = self.widths[0];
        let c0 = self.counts[0];
        for i in 0..c0 {
            grad[i] += g[i] * cache.phi[0][i];
            let dz = g[i] * self.params[i] * cache.dphi[0][i];
            grad[c0 + i] += dz * x[i % d];
            grad[2 * c0 + i] += dz;
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.forward(x, &mut Cache::default())
    }

    /// Mean squared error over `data`.
    pub fn loss(&self, data: &[Sample]) -> f64 {
        let mut cache = Cache::default();
        data.iter()
            .map(|s| (self.forward(&s.x, &mut cache) - s.y).powi(2))
            .sum::<f64>()
            / data.len().max(1) as f64
    }

    /// Gradient of the mean squared error over `batch`.
    pub fn gradient(&self, data: &[Sample], batch: &[usize], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut cache = Cache::default();
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for &i in batch {
            let s = &data[i];
            let r = self.forward(&s.x, &mut cache) - s.y;
            loss += r * r;
            self.backward(&s.x, &cache, 2.0 * r * scale, grad);
        }
        loss * scale
    }

    pub fn to_tree_net(&self) -> Result<TreeNet> {
        let p = Precision::DOUBLE;
        let arch = TreeArch::uniform(self.widths.clone(), self.act)?;
        let c0 = self.counts[0];
        let leaves = (0..c0)
            .map(|i| LeafParam {
                a: p.real(self.params[i]),
                w: p.real(self.params[c0 + i]),
                b: p.real(self.params[2 * c0 + i]),
            })
            .collect();
        let nodes = (1..=self.depth())
            .map(|k| {
                let (oa, ob) = self.node_offsets(k);
                (0..self.counts[k])
                    .map(|q| NodeParam {
                        a: p.real(self.params[oa + q]),
                        b: p.real(self.params[ob + q]),
                    })
                    .collect()
            })
            .collect();
        let mut net = TreeNet::from_parts(arch, p, 0.0, leaves, nodes)?;
        net.metadata.insert("builder".into(), "approximate-erm".into());
        Ok(net)
    }
}

impl Predictor for F64Net {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x))
    }
}

/// Result of one training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub net: F64Net,
    pub train_loss: f64,
    /// Training loss of every restart, `NaN` for diverged ones.
    pub restart_losses: Vec<f64>,
}

/// Box `R A^alpha` as an `f64`; saturates at `f64::MAX`.
fn clip_bound(widths: &[usize], spec: BoundSpec) -> f64 {
    let a_l = crate::tree::param_count(widths);
    let b = weight_bound(a_l, spec, Precision::new(64).expect("valid")).to_f64();
    if b.is_finite() {
        b
    } else {
        f64::MAX
    }
}

fn train_once(
    widths: &[usize],
    act: Activation,
    data: &[Sample],
    opt: &OptimizerConfig,
    bound: f64,
    seed: u64,
    stream: u64,
) -> Result<Option<(F64Net, f64)>> {
    let mut rng = stream_rng(seed, stream);
    let mut net = F64Net::random(widths, act, opt.init_scale, &mut rng)?;
    let n = net.params.len();
    let mut grad = vec![0.0; n];
    let mut m1 = vec![0.0; n];
    let mut m2 = vec![0.0; n];
    let (b1, b2, tiny) = (0.9f64, 0.999f64, 1e-8);
    let full: Vec<usize> = (0..data.len()).collect();
    let mut batch = Vec::with_capacity(opt.batch);
    let total = opt.total_steps(data.len());
    for step in 0..total {
        let idx: &[usize] = if data.len() <= opt.batch {
            &full
        } else {
            batch.clear();
            batch.extend((0..opt.batch).map(|_| rng.random_range(0..data.len())));
            &batch
        };
        let loss = net.gradient(data, idx, &mut grad);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Ok(None);
        }
        let frac = step as f64 / total.max(1) as f64;
        let lr = opt.learning_rate * opt.final_lr_ratio.powf(frac);
        let t = (step + 1) as i32;
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        for i in 0..n {
            m1[i] = b1 * m1[i] + (1.0 - b1) * grad[i];
            m2[i] = b2 * m2[i] + (1.0 - b2) * grad[i] * grad[i];
            let upd = lr * (m1[i] / c1) / ((m2[i] / c2).sqrt() + tiny);
            net.params[i] = (net.params[i] - upd).clamp(-bound, bound);
        }
    }
    let loss = net.loss(data);
    Ok(loss.is_finite().then_some((net, loss)))
}

/// Multi-restart approximate least squares; returns the restart with the
/// lowest training loss.
pub fn train_erm_f64(
    widths: &[usize],
    act: Activation,
    data: &[Sample],
    opt: &OptimizerConfig,
    bound: BoundSpec,
    seed: u64,
) -> Result<TrainOutcome> {
    if data.is_empty() {
        return Err(Error::arg("training data is empty"));
    }
    if opt.restarts == 0 {
        return Err(Error::arg("at least one restart is required"));
    }
    let clip = clip_bound(widths, bound);
    let mut best: Option<(F64Net, f64)> = None;
    let mut losses = Vec::with_capacity(opt.restarts);
    for r in 0..opt.restarts {
        match train_once(widths, act, data, opt, clip, seed, 0x1000 + r as u64)? {
            Some((net, loss)) => {
                losses.push(loss);
                if best.as_ref().is_none_or(|(_, b)| loss < *b) {
                    best = Some((net, loss));
                }
            }
            None => losses.push(f64::NAN),
        }
    }
    match best {
        Some((net, train_loss)) => Ok(TrainOutcome {
            net,
            train_loss,
            restart_losses: losses,
        }),
        None => Err(Error::Training(format!(
            "all {} restarts diverged (widths {:?}, {} samples)",
            opt.restarts,
            widths,
            data.len()
        ))),
    }
}

/// [`train_erm_f64`] returning the fitted net as a [`TreeNet`].
pub fn train_erm(
    arch: &TreeArch,
    act: Activation,
    data: &[Sample],
    opt: &OptimizerConfig,
    bound: BoundSpec,
    seed: u64,
) -> Result<TreeNet> {
    train_erm_f64(arch.widths(), act, data, opt, bound, seed)?.net.to_tree_net()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub m: usize,
    pub n: usize,
    pub trials: usize,
    pub median_excess_risk: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `log median` against `log m`.
    pub fitted_slope: f64,
    /// `-2r / (2r + 1)`.
    pub theory_slope: f64,
    /// Excess risk of every trial, row by row.
    pub per_trial: Vec<Vec<f64>>,
}

pub const RATE_CSV_HEADER: &str = "m,n,trials,median_excess_risk,stderr";

impl RateTable {
    /// Rows in the documented column order plus a trailing
    /// `fitted_slope` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(RATE_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:e},{:e}\n",
                r.m, r.n, r.trials, r.median_excess_risk, r.stderr
            ));
        }
        out.push_str(&format!("fitted_slope,,,{},\n", self.fitted_slope));
        out
    }

    /// Consecutive pairs whose median does not increase.
    pub fn nonincreasing_steps(&self) -> usize {
        self.rows
            .windows(2)
            .filter(|w| w[1].median_excess_risk <= w[0].median_excess_risk)
            .count()
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Excess risk of one trial at sample size `cfg.m`.
pub fn run_trial(f_rho: &RadialTarget, cfg: &LearningConfig, trial: u64) -> Result<(usize, f64)> {
    let r = f_rho.r();
    let n = cfg.n_for(cfg.m, r);
    let stream = (cfg.m as u64) << 16 | trial;
    let data = sample_dataset(f_rho, cfg, stream)?;
    let widths = learning_widths(cfg.d, f_rho.s, n);
    let act = Activation::new(cfg.activation);
    let alpha = crate::radial::weight_exponent(r, f_rho.s);
    let bound = BoundSpec { r: 1.0, alpha };
    let out = train_erm_f64(&widths, act, &data, &cfg.optimizer, bound, cfg.seed ^ stream.rotate_left(17))?;
    let risk = excess_risk(&out.net, f_rho, cfg.d, cfg.response_bound, cfg.n_test, cfg.seed ^ 0x5eed ^ stream)?;
    Ok((n, risk.value))
}

/// Sweep over `m_list` with `trials` independent trials per size.
pub fn rate_sweep(f_rho: &RadialTarget, m_list: &[usize], trials: usize, cfg: &LearningConfig) -> Result<RateTable> {
    if m_list.is_empty() {
        return Err(Error::arg("m list is empty"));
    }
    if m_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::arg("m list must be strictly increasing"));
    }
    if trials < 3 {
        return Err(Error::arg("at least three trials per size are required"));
    }
    let mut rows = Vec::with_capacity(m_list.len());
    let mut per_trial = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let mut c = cfg.clone();
        c.m = m;
        let mut risks = Vec::with_capacity(trials);
        let mut n = 0;
        for t in 0..trials {
            let (nn, risk) = run_trial(f_rho, &c, t as u64)?;
            n = nn;
            risks.push(risk);
        }
        let mean = risks.iter().sum::<f64>() / trials as f64;
        let var = risks.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        rows.push(RateRow {
            m,
            n,
            trials,
            median_excess_risk: median(&risks),
            stderr: (var / trials as f64).sqrt(),
        });
        per_trial.push(risks);
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.median_excess_risk).collect();
    let fitted_slope = if rows.len() >= 2 {
        loglog_fit(&xs, &ys).map(|f| f.slope).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    let r = f_rho.r();
    Ok(RateTable {
        rows,
        fitted_slope,
        theory_slope: -2.0 * r / (2.0 * r + 1.0),
        per_trial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logistic() -> Activation {
        Activation::new(ActivationKind::Logistic)
    }

    #[test]
    fn truncation() {
        assert_eq!(truncate(0.0, 1.0), 0.0);
        assert_eq!(truncate(2.0, 1.0), 1.0);
        assert_eq!(truncate(-1.5, 1.0), -1.0);
    }

    #[test]
    fn gradient_matches_differences() {
        let mut rng = stream_rng(3, 0);
        let widths = [2, 2, 3];
        let net = F64Net::random(&widths, logistic(), 1.0, &mut rng).unwrap();
        let data = vec![
            Sample { x: vec![0.3, -0.2], y: 0.7 },
            Sample { x: vec![-0.5, 0.1], y: -0.1 },
        ];
        let mut grad = vec![0.0; net.params.len()];
        net.gradient(&data, &[0, 1], &mut grad);
        let h = 1e-6;
        for i in 0..net.params.len() {
            let mut up = net.clone();
            up.params[i] += h;
            let mut dn = net.clone();
            dn.params[i] -= h;
            let fd = (up.loss(&data) - dn.loss(&data)) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-6 * (1.0 + fd.abs()), "param {i}: {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn tree_conversion_agrees() {
        let mut rng = stream_rng(5, 0);
        let net = F64Net::random(&[2, 2, 2, 3], logistic(), 1.0, &mut rng).unwrap();
        let tree = net.to_tree_net().unwrap();
        let x = [0.25, -0.5];
        assert!((tree.predict(&x).unwrap() - net.eval(&x)).abs() < 1e-12);
    }

    #[test]
    fn samples_respect_bounds() {
        let cfg = LearningConfig {
            m: 500,
            d: 3,
            response_bound: 1.2,
            noise: Noise::BoundedUniform { sigma: 0.1 },
            ..LearningConfig::default()
        };
        let data = sample_dataset(&RadialTarget::squared_norm(), &cfg, 0).unwrap();
        assert!(data.iter().all(|s| s.x.iter().map(|v| v * v).sum::<f64>() <= 1.0));
        assert!(data.iter().all(|s| s.y.abs() <= 1.2));
    }
}
