//! Packing families of radial functions used for lower bounds, and the
//! lower-bound curves they lead to.
//!
//! A family member is `f(x) = sum_j e_j N^-r g(N (|x|^2 - xi_j))` with signs
//! `e_j = +-1`, centres `xi_j = (j - 1/2) / N` and a bump `g` vanishing
//! outside `(-1/2, 1/2)`. Any two distinct members are exactly `c0 N^-r`
//! apart when the bump peaks at `c0 / 2`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{binomial_f64, stream_rng};

/// Largest `N*` for which the full family is enumerated.
pub const ENUMERATION_CAP: usize = 16;

/// Grid used for packing distances on `t = |x|^2 in [0, 1]`.
pub const DISTANCE_GRID: usize = 10_001;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum BumpShape {
    /// `(1 - 2|t|)_+^v`, used when `s = 0`.
    Tent { v: f64 },
    /// `(1 - 4t^2)_+^q`.
    Spline { q: u32 },
}

/// `scale * shape(t)`, supported in `[-1/2, 1/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub shape: BumpShape,
    pub scale: f64,
    pub s: usize,
    pub v: f64,
    pub c0: f64,
    /// Peak the construction aimed for, `c0 / 2`.
    pub target_peak: f64,
    /// Peak after any rescaling forced by the Hölder cap.
    pub peak: f64,
    /// Hölder constant of the `s`-th derivative, estimated on a dense grid.
    pub holder: f64,
    /// `c0 2^(v-1)`.
    pub holder_cap: f64,
}

impl Bump {
    pub fn r(&self) -> f64 {
        self.s as f64 + self.v
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    /// `k`-th derivative; zero outside the open support. For the tent only
    /// `k = 0` is smooth and higher orders use the one-sided formula.
    pub fn derivative(&self, k: usize, t: f64) -> f64 {
        if t.abs() >= 0.5 {
            return 0.0;
        }
        match self.shape {
            BumpShape::Tent { v } => {
                let base = 1.0 - 2.0 * t.abs();
                match k {
                    0 => self.scale * base.powf(v),
                    1 => -self.scale * 2.0 * v * t.signum() * base.powf(v - 1.0),
                    _ => f64::NAN,
                }
            }
            BumpShape::Spline { q } => {
                // (1 - 4t^2)^q = sum_i C(q,i) (-4)^i t^(2i)
                let mut acc = 0.0;
                for i in 0..=q as usize {
                    let p = 2 * i;
                    if p < k {
                        continue;
                    }
                    let c = binomial_f64(q as usize, i) * (-4f64).powi(i as i32);
                    let fall: f64 = (0..k).map(|j| (p - j) as f64).product();
                    acc += c * fall * t.powi((p - k) as i32);
                }
                self.scale * acc
            }
        }
    }
}

/// Largest `|h(t) - h(t')| / |t - t'|^v` over all pairs of `pts`.
fn holder_pairs(h: &dyn Fn(f64) -> f64, pts: &[f64], v: f64) -> f64 {
    let vals: Vec<f64> = pts.iter().map(|&t| h(t)).collect();
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let gap = (pts[j] - pts[i]).abs();
            if gap > 0.0 {
                best = best.max((vals[i] - vals[j]).abs() / gap.powf(v));
            }
        }
    }
    best
}

/// A compactly supported bump in `Lip^(r, c0 2^(v-1))` peaking at `c0 / 2`
/// where that is possible.
///
/// For `s = 0` the tent `(c0/2)(1 - 2|t|)^v` meets both requirements
/// exactly. For `s >= 1` the spline `(1 - 4t^2)^(s+2)` is scaled to the peak
/// and then shrunk until its Hölder constant fits under the cap; the peak
/// actually achieved is recorded.
pub fn make_bump(s: usize, v: f64, c0: f64) -> Result<Bump> {
    if !(v > 0.0 && v <= 1.0) || !(c0 > 0.0) {
        return Err(Error::arg("bump needs v in (0, 1] and c0 > 0"));
    }
    let cap = c0 * 2f64.powf(v - 1.0);
    let target_peak = c0 / 2.0;
    if s == 0 {
        return Ok(Bump {
            shape: BumpShape::Tent { v },
            scale: target_peak,
            s,
            v,
            c0,
            target_peak,
            peak: target_peak,
            holder: cap,
            holder_cap: cap,
        });
    }
    let q = s as u32 + 2;
    let mut bump = Bump {
        shape: BumpShape::Spline { q },
        scale: 1.0,
        s,
        v,
        c0,
        target_peak,
        peak: 1.0,
        holder: 0.0,
        holder_cap: cap,
    };
    // Unit-scale constant: sup |g^(s+1)| for v = 1, dense pairs otherwise.
    let raw = if v == 1.0 {
        let n = 20_001;
        (0..n)
            .map(|i| bump.derivative(s + 1, -0.5 + i as f64 / (n - 1) as f64).abs())
            .fold(0.0, f64::max)
    } else {
        let pts: Vec<f64> = (0..2001).map(|i| -0.5 + i as f64 / 2000.0).collect();
        holder_pairs(&|t| bump.derivative(s, t), &pts, v)
    };
    if !(raw > 0.0) || !raw.is_finite() {
        return Err(Error::Construction("bump Hölder constant is degenerate".into()));
    }
    let scale = target_peak.min(cap / raw * (1.0 - 1e-9));
    bump.scale = scale;
    bump.peak = scale;
    bump.holder = raw * scale;
    if bump.peak <= 0.0 {
        return Err(Error::Construction(format!(
            "no admissible bump: peak {} holder {}",
            bump.peak, bump.holder
        )));
    }
    Ok(bump)
}

/// Outcome of a sampled Hölder test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderAudit {
    pub estimate: f64,
    pub cap: f64,
    pub pairs: usize,
    pub passed: bool,
}

/// Random pairs, half uniform over `[lo, hi]^2` and half close together with
/// one point near a support edge from `edges`.
fn audit_pairs(lo: f64, hi: f64, edges: &[f64], pairs: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = stream_rng(seed, 0x686f);
    let span = hi - lo;
    (0..pairs)
        .map(|i| {
            if i % 2 == 0 || edges.is_empty() {
                (lo + span * rng.random::<f64>(), lo + span * rng.random::<f64>())
            } else {
                let e = edges[rng.random_range(0..edges.len())];
                let w = span * 10f64.powf(-1.0 - 4.0 * rng.random::<f64>());
                let a = (e + w * (2.0 * rng.random::<f64>() - 1.0)).clamp(lo, hi);
                let b = (a + w * (2.0 * rng.random::<f64>() - 1.0)).clamp(lo, hi);
                (a, b)
            }
        })
        .collect()
}

fn audit(h: &dyn Fn(f64) -> f64, pairs: &[(f64, f64)], v: f64, cap: f64) -> HolderAudit {
    let mut est = 0.0f64;
    for &(a, b) in pairs {
        let gap = (a - b).abs();
        if gap > 0.0 {
            est = est.max((h(a) - h(b)).abs() / gap.powf(v));
        }
    }
    HolderAudit {
        estimate: est,
        cap,
        pairs: pairs.len(),
        passed: est <= cap * (1.0 + 1e-3),
    }
}

/// Sampled Hölder test of `g^(s)` against `c0 2^(v-1)`.
pub fn audit_bump(bump: &Bump, pairs: usize, seed: u64) -> HolderAudit {
    let pts = audit_pairs(-0.5, 0.5, &[-0.5, 0.0, 0.5], pairs, seed);
    audit(&|t| bump.derivative(bump.s, t), &pts, bump.v, bump.holder_cap)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingFamily {
    pub n_star: usize,
    pub bump: Bump,
}

impl PackingFamily {
    pub fn new(n_star: usize, bump: Bump) -> Result<Self> {
        if n_star == 0 {
            return Err(Error::arg("N* must be at least 1"));
        }
        Ok(PackingFamily { n_star, bump })
    }

    pub fn r(&self) -> f64 {
        self.bump.r()
    }

    pub fn center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.n_star as f64
    }

    /// Distance any two distinct members should have, `2 peak N^-r`.
    pub fn predicted_distance(&self) -> f64 {
        2.0 * self.bump.peak * (self.n_star as f64).powf(-self.r())
    }

    fn check_signs(&self, signs: &[i8]) -> Result<()> {
        if signs.len() != self.n_star {
            return Err(Error::arg(format!(
                "expected {} signs, found {}",
                self.n_star,
                signs.len()
            )));
        }
        if signs.iter().any(|e| *e != 1 && *e != -1) {
            return Err(Error::arg("signs must be +1 or -1"));
        }
        Ok(())
    }

    /// `k`-th derivative of the profile `t -> sum_j e_j N^-r g(N (t - xi_j))`.
    pub fn profile_derivative(&self, signs: &[i8], k: usize, t: f64) -> Result<f64> {
        self.check_signs(signs)?;
        Ok(self.profile_unchecked(signs, k, t))
    }

    fn profile_unchecked(&self, signs: &[i8], k: usize, t: f64) -> f64 {
        let n = self.n_star as f64;
        let scale = n.powf(k as f64 - self.r());
        let mid = (t * n).floor() as i64;
        let mut acc = 0.0;
        for j in mid - 1..=mid + 1 {
            if j < 0 || j as usize >= self.n_star {
                continue;
            }
            let u = n * (t - self.center(j as usize));
            acc += signs[j as usize] as f64 * scale * self.bump.derivative(k, u);
        }
        acc
    }

    /// Member value at a point of the unit ball.
    pub fn member(&self, signs: &[i8], x: &[f64]) -> Result<f64> {
        let t: f64 = x.iter().map(|v| v * v).sum();
        if t > 1.0 + 1e-12 {
            return Err(Error::arg("point outside the unit ball"));
        }
        self.profile_derivative(signs, 0, t)
    }

    /// Grid sup distance on `t in [0, 1]`, which equals the sup over the ball.
    pub fn pairwise_distance(&self, a: &[i8], b: &[i8]) -> Result<f64> {
        self.check_signs(a)?;
        self.check_signs(b)?;
        if a == b {
            return Err(Error::arg("sign vectors are identical"));
        }
        let last = (DISTANCE_GRID - 1) as f64;
        Ok((0..DISTANCE_GRID)
            .map(|i| {
                let t = i as f64 / last;
                (self.profile_unchecked(a, 0, t) - self.profile_unchecked(b, 0, t)).abs()
            })
            .fold(0.0, f64::max))
    }

    /// Sampled Hölder test of the member profile against `c0`.
    pub fn audit_member(&self, signs: &[i8], pairs: usize, seed: u64) -> Result<HolderAudit> {
        self.check_signs(signs)?;
        let edges: Vec<f64> = (0..=self.n_star).map(|j| j as f64 / self.n_star as f64).collect();
        let pts = audit_pairs(0.0, 1.0, &edges, pairs, seed);
        let s = self.bump.s;
        Ok(audit(
            &|t| self.profile_unchecked(signs, s, t),
            &pts,
            self.bump.v,
            self.bump.c0,
        ))
    }

    /// Largest number of bumps active at any point of a dense grid.
    pub fn max_overlap(&self, samples: usize) -> usize {
        let n = self.n_star as f64;
        (0..samples)
            .map(|i| {
                let t = i as f64 / (samples.max(2) - 1) as f64;
                (0..self.n_star)
                    .filter(|&j| self.bump.eval(n * (t - self.center(j))) != 0.0)
                    .count()
            })
            .max()
            .unwrap_or(0)
    }

    /// All `2^N*` sign vectors; refused above [`ENUMERATION_CAP`].
    pub fn enumerate(&self) -> Result<Vec<Vec<i8>>> {
        if self.n_star > ENUMERATION_CAP {
            return Err(Error::arg(format!(
                "N* = {} exceeds the enumeration cap {ENUMERATION_CAP}; sample instead",
                self.n_star
            )));
        }
        Ok((0..1u32 << self.n_star).map(|m| signs_from_mask(m as u64, self.n_star)).collect())
    }

    /// `count` seeded random sign vectors.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<i8>> {
        let mut rng = stream_rng(seed, 0x7061);
        (0..count)
            .map(|_| (0..self.n_star).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
            .collect()
    }
}

/// Bit `j` of `mask` set means `e_j = -1`.
pub fn signs_from_mask(mask: u64, n: usize) -> Vec<i8> {
    (0..n).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect()
}

/// Constants of the covering-number argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundParams {
    pub r: f64,
    pub c0: f64,
    pub d: usize,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub depth: usize,
}

impl LowerBoundParams {
    /// `(c0/8)(beta + 2r + 4)^-r`.
    pub fn c3(&self) -> f64 {
        self.c0 / 8.0 * (self.beta + 2.0 * self.r + 4.0).powf(-self.r)
    }

    /// `2 C1 + 4 C2 (beta + 2r + 4)^r / c0`.
    pub fn c4(&self) -> f64 {
        2.0 * self.c1 + 4.0 * self.c2 * (self.beta + 2.0 * self.r + 4.0).powf(self.r) / self.c0
    }

    /// `floor((beta + 2r + 4) N log2(N + C4))`, at least 1.
    pub fn n_star(&self, n: usize) -> usize {
        let nf = n as f64;
        let v = (self.beta + 2.0 * self.r + 4.0) * nf * (nf + self.c4()).log2();
        (v.floor() as usize).max(1)
    }

    /// `C3 [N log2(N + C4)]^-r`.
    pub fn lemma_bound(&self, n: usize) -> f64 {
        let nf = n as f64;
        self.c3() * (nf * (nf + self.c4()).log2()).powf(-self.r)
    }

    /// `n^(-r/(d-1))`; for `d = 1` the exponent is taken as `-r`.
    pub fn shallow(&self, n: usize) -> f64 {
        let e = if self.d > 1 { self.r / (self.d - 1) as f64 } else { self.r };
        (n as f64).powf(-e)
    }

    /// `(L^2 n log2 n)^-r`.
    pub fn deep(&self, n: usize) -> f64 {
        let nf = n as f64;
        let l = self.depth as f64;
        (l * l * nf * nf.log2()).powf(-self.r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundRow {
    pub n: usize,
    pub shallow: f64,
    pub deep: f64,
    pub lemma: f64,
    pub n_star: usize,
}

pub fn lower_bound_curves(params: &LowerBoundParams, ns: &[usize]) -> Vec<LowerBoundRow> {
    ns.iter()
        .map(|&n| LowerBoundRow {
            n,
            shallow: params.shallow(n),
            deep: params.deep(n),
            lemma: params.lemma_bound(n),
            n_star: params.n_star(n),
        })
        .collect()
}
