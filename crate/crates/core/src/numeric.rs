//! Arbitrary-precision scalars and the small numeric toolbox shared by every
//! other module: sampling grids, sup-norm estimation, central differences,
//! composite Simpson quadrature, seeded random streams and log-log fits.
//!
//! Scalars are MPFR floats. A computation fixes one [`Precision`] up front and
//! creates all of its values through it; APIs that accept values from callers
//! check the precision at the boundary and reject mismatches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision real number.
pub type Real = Float;

/// Mantissa width in bits for one computation context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Precision(u32);

impl Precision {
    /// Width used when nothing else is requested.
    pub const DEFAULT: Precision = Precision(256);
    /// IEEE double width, useful for showing what rounding does to a build.
    pub const DOUBLE: Precision = Precision(53);

    pub fn new(bits: u32) -> Result<Self> {
        if !(2..=1 << 20).contains(&bits) {
            return Err(Error::arg(format!("precision of {bits} bits is out of range")));
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn real(self, v: f64) -> Real {
        Float::with_val(self.0, v)
    }

    pub fn zero(self) -> Real {
        Float::new(self.0)
    }

    pub fn int(self, v: i64) -> Real {
        Float::with_val(self.0, v)
    }

    /// `num / den` rounded once.
    pub fn ratio(self, num: i64, den: i64) -> Real {
        Float::with_val(self.0, num) / den
    }

    pub fn pi(self) -> Real {
        Float::with_val(self.0, rug::float::Constant::Pi)
    }

    /// Parses a decimal or hexadecimal (`0x`) literal.
    pub fn parse(self, s: &str) -> Result<Real> {
        let trimmed = s.trim();
        let parsed = if let Some(hex) = trimmed.strip_prefix("0x") {
            Float::parse_radix(hex, 16)
        } else if let Some(hex) = trimmed.strip_prefix("-0x") {
            Float::parse_radix(format!("-{hex}"), 16)
        } else {
            Float::parse(trimmed)
        };
        parsed
            .map(|p| Float::with_val(self.0, p))
            .map_err(|e| Error::parse(format!("literal {s:?}"), e.to_string()))
    }

    /// Returns `x` unchanged if it was created at this precision.
    pub fn check(self, x: &Real) -> Result<()> {
        if x.prec() != self.0 {
            return Err(Error::PrecisionMismatch {
                expected: self.0,
                found: x.prec(),
            });
        }
        Ok(())
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DEFAULT
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} bits", self.0)
    }
}

/// Unit in the last place of `x` at its own precision.
pub fn ulp(x: &Real) -> Real {
    let prec = x.prec();
    match x.get_exp() {
        Some(e) => {
            let mut u = Float::with_val(prec, 1);
            u <<= e - prec as i32;
            u
        }
        // zero and non-finite values get the ulp of one
        None => Float::with_val(prec, Float::i_exp(1, 1 - prec as i32)),
    }
}

/// `n!` as a real at the given precision.
pub fn factorial(n: usize, prec: Precision) -> Real {
    let mut f = prec.int(1);
    for i in 2..=n as u64 {
        f *= i;
    }
    f
}

/// `n!` in floating point; exact up to 22!.
pub fn factorial_f64(n: usize) -> f64 {
    (2..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Binomial coefficient in floating point.
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Positive power of a real with an integer exponent.
pub fn powi(x: &Real, k: u32) -> Real {
    Float::with_val(x.prec(), x.pow(k))
}

/// Sample layout on an interval: a uniform grid (endpoints included) plus
/// seeded uniform jitter points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub uniform: usize,
    pub jitter: usize,
    pub seed: u64,
}

impl GridSpec {
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Self {
        GridSpec {
            lo,
            hi,
            uniform: count,
            jitter: 0,
            seed: 0,
        }
    }

    /// 10^4 uniform points plus 10^3 jittered ones.
    pub fn standard(lo: f64, hi: f64, seed: u64) -> Self {
        GridSpec {
            lo,
            hi,
            uniform: 10_000,
            jitter: 1_000,
            seed,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let mut pts = Vec::with_capacity(self.uniform + self.jitter);
        match self.uniform {
            0 => {}
            1 => pts.push(self.lo),
            n => {
                let span = self.hi - self.lo;
                pts.extend((0..n).map(|i| {
                    if i + 1 == n {
                        self.hi
                    } else {
                        self.lo + span * i as f64 / (n - 1) as f64
                    }
                }));
            }
        }
        if self.jitter > 0 {
            let mut rng = stream_rng(self.seed, 0x6a17);
            pts.extend((0..self.jitter).map(|_| rng.random_range(self.lo..=self.hi)));
        }
        pts
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::arg(format!(
                "grid interval [{}, {}] is not a finite interval",
                self.lo, self.hi
            )));
        }
        if self.uniform + self.jitter == 0 {
            return Err(Error::arg("grid has no points"));
        }
        Ok(())
    }
}

/// Largest `|f(t) - g(t)|` over the grid, with the point where it occurs.
pub fn grid_sup_norm_at<F, G>(f: F, g: G, grid: &GridSpec, prec: Precision) -> Result<(Real, f64)>
where
    F: Fn(&Real) -> Result<Real>,
    G: Fn(&Real) -> Result<Real>,
{
    grid.validate()?;
    let mut best = prec.zero();
    let mut at = grid.lo;
    for t in grid.points() {
        let x = prec.real(t);
        let fv = f(&x)?;
        let gv = g(&x)?;
        if !fv.is_finite() || !gv.is_finite() {
            return Err(Error::NonFinite {
                point: format!("{t}"),
                detail: format!("f = {}, g = {}", fv.to_f64(), gv.to_f64()),
            });
        }
        let d = Float::with_val(prec.bits(), &fv - &gv).abs();
        if d > best {
            best = d;
            at = t;
        }
    }
    Ok((best, at))
}

/// Largest `|f(t) - g(t)|` over the grid.
pub fn grid_sup_norm<F, G>(f: F, g: G, grid: &GridSpec, prec: Precision) -> Result<Real>
where
    F: Fn(&Real) -> Result<Real>,
    G: Fn(&Real) -> Result<Real>,
{
    grid_sup_norm_at(f, g, grid, prec).map(|(v, _)| v)
}

/// Central difference of order `k` with step `h`; the truncation error is
/// `O(h^2)`. Odd orders sample at half steps.
pub fn finite_diff<F>(f: F, k: usize, t: &Real, h: &Real) -> Result<Real>
where
    F: Fn(&Real) -> Result<Real>,
{
    let prec = t.prec();
    if h.is_zero() || !h.is_finite() {
        return Err(Error::arg("finite-difference step must be finite and nonzero"));
    }
    let mut acc = Float::new(prec);
    let mut binom = Float::with_val(prec, 1);
    for i in 0..=k {
        // offset (k/2 - i) h
        let off = Float::with_val(prec, k as i64 - 2 * i as i64) / 2u32 * h;
        let x = Float::with_val(prec, t + &off);
        let v = f(&x)?;
        let term = Float::with_val(prec, &binom * &v);
        if i % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
        binom *= (k - i) as u64;
        binom /= (i + 1) as u64;
    }
    Ok(acc / Float::with_val(prec, h.pow(k as u32)))
}

/// Composite Simpson rule with `panels` panels (each panel uses its midpoint).
pub fn simpson<F>(f: F, a: &Real, b: &Real, panels: usize) -> Result<Real>
where
    F: Fn(&Real) -> Result<Real>,
{
    if panels == 0 {
        return Err(Error::arg("quadrature needs at least one panel"));
    }
    let prec = a.prec().max(b.prec());
    let h = Float::with_val(prec, b - a) / panels as u64;
    let half = Float::with_val(prec, &h / 2u32);
    let mut ends = Float::new(prec);
    let mut mids = Float::new(prec);
    for i in 0..=panels {
        let x = Float::with_val(prec, &h * i as u64) + a;
        let v = f(&x)?;
        if i == 0 || i == panels {
            ends += v;
        } else {
            ends += Float::with_val(prec, &v * 2u32);
        }
        if i < panels {
            let m = Float::with_val(prec, &x + &half);
            mids += f(&m)?;
        }
    }
    Ok((ends + mids * 4u32) * h / 6u32)
}

/// ChaCha stream for `(seed, stream)`; distinct streams never overlap.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Least-squares fit of `log y` against `log x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::arg("log-log fit needs at least two paired samples"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::arg("log-log fit needs positive finite samples"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("log-log fit needs at least two distinct abscissae"));
    }
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}
