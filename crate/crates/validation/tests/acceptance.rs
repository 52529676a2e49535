//! One test per acceptance criterion. Each writes a single
//! `acceptance <id>: PASS|FAIL | ...` line straight to stderr, so the line
//! shows up whether or not the harness captures output.

use std::io::Write;
use std::time::Instant;

use radnet::activation::{Activation, ActivationKind};
use radnet::hard::{self, PackingFamily};
use radnet::learning::{rate_sweep, LearningConfig};
use radnet::numeric::{grid_sup_norm, loglog_fit, stream_rng, GridSpec, Precision, Real};
use radnet::poly::{Poly, PolyBridge};
use radnet::radial::{build_radial_net, measure_radial_error, weight_exponent};
use radnet::target::{RadialTarget, TargetFn, UnivariateTarget};
use radnet::tree::{check_bounds, param_count, param_count_enumerated, BoundSpec};
use radnet::univariate::{build_univariate_net, BumpSystem, BuildConfig};
use rand::Rng;

fn report(id: &str, pass: bool, detail: String) {
    let line = format!(
        "acceptance {id}: {} | {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn logistic() -> Activation {
    Activation::new(ActivationKind::Logistic)
}

fn bridge(prec: Precision) -> PolyBridge {
    let act = logistic();
    let theta0 = act.find_theta0(3, 0.05).unwrap();
    PolyBridge::new(act, theta0, act.profile(3).unwrap(), prec).unwrap()
}

fn random_square(prec: Precision, pairs: usize, seed: u64) -> Vec<(Real, Real)> {
    let mut rng = stream_rng(seed, 0);
    (0..pairs)
        .map(|_| {
            (
                prec.real(rng.random_range(-1.0..=1.0)),
                prec.real(rng.random_range(-1.0..=1.0)),
            )
        })
        .collect()
}

/// Largest `|gate(u, v) - u v|` over the pairs, all at the gate's precision.
fn gate_error(eps: f64, prec: Precision, pairs: &[(Real, Real)]) -> f64 {
    let gate = bridge(prec).product_gate(&prec.real(eps)).unwrap();
    pairs
        .iter()
        .map(|(u, v)| {
            let exact = Real::with_val(prec.bits(), u * v);
            (gate.combine(u, v) - exact).abs().to_f64()
        })
        .fold(0.0, f64::max)
}

#[test]
fn c01_telescoping_identity() {
    let start = Instant::now();
    let prec = Precision::DEFAULT;
    let mut rng = stream_rng(1, 1);
    let mut worst = 0.0f64;
    for n in [2usize, 8, 32] {
        for power in 1..=3 {
            let a = prec.real((n as f64).powi(power));
            let sys = BumpSystem::new(n, a, logistic()).unwrap();
            for _ in 0..1000 {
                let t = prec.real(rng.random_range(0.0..=0.5));
                let tele = sys.telescoped(&t);
                let gap = Real::with_val(256, sys.sum(&t) - &tele).abs();
                let ulps = (gap / radnet::numeric::ulp(&tele)).to_f64();
                worst = worst.max(ulps);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 10.0 && secs < 10.0;
    report("1 telescoping", pass, format!("worst {worst:.1} ulp over 9000 points, {secs:.1}s"));
    assert!(pass);
}

#[test]
fn c02_product_gate() {
    let start = Instant::now();
    let prec = Precision::DEFAULT;
    let pairs = random_square(prec, 10_000, 2);
    let mut detail = Vec::new();
    let mut pass = true;
    for eps in [1e-1, 1e-2, 1e-3] {
        let err = gate_error(eps, prec, &pairs);
        pass &= err <= eps;
        detail.push(format!("eps {eps:e}: {err:.3e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 120.0;
    report("2 product gate", pass, format!("{}; {secs:.1}s", detail.join(", ")));
    assert!(pass);
}

#[test]
fn c03_polynomial_conversion() {
    let start = Instant::now();
    let prec = Precision::DEFAULT;
    let b = bridge(prec);
    let grid = GridSpec::standard(-1.0, 1.0, 3);
    let mut detail = Vec::new();
    let mut pass = true;
    for (name, k) in [("t^2", 2usize), ("t", 1)] {
        let p = Poly::monomial(k, prec);
        for eps in [1e-1, 1e-2, 1e-3] {
            let net = b.poly_to_shallow(&p, &prec.real(eps)).unwrap();
            let err = grid_sup_norm(|t| Ok(net.eval(t)), |t| Ok(p.eval(t)), &grid, prec)
                .unwrap()
                .to_f64();
            pass &= err <= eps;
            detail.push(format!("{name} eps {eps:e}: {err:.2e}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 60.0;
    report("3 polynomial conversion", pass, format!("{}; {secs:.1}s", detail.join(", ")));
    assert!(pass);
}

#[test]
fn c04_univariate_rate() {
    let start = Instant::now();
    let target = UnivariateTarget::new(TargetFn::identity(), 0, 1.0, 1.0, 0.0, 0.5).unwrap();
    let grid = GridSpec::standard(0.0, 0.5, 4);
    let (mut ns, mut errs) = (Vec::new(), Vec::new());
    let mut within_bound = true;
    for n in [4usize, 8, 16, 32, 64] {
        let nf = n as f64;
        let b = build_univariate_net(&target, n, nf * nf, nf.powi(-2), logistic(), &BuildConfig::default()).unwrap();
        let prec = b.net.precision();
        let err = grid_sup_norm(|t| b.net.eval(std::slice::from_ref(t)), |t| Ok(target.g.eval(t)), &grid, prec)
            .unwrap()
            .to_f64();
        within_bound &= err <= b.report.error_bound;
        ns.push(nf);
        errs.push(err);
    }
    let slope = loglog_fit(&ns, &errs).unwrap().slope;
    let secs = start.elapsed().as_secs_f64();
    let pass = slope <= -0.7 && secs < 600.0;
    report(
        "4 univariate rate",
        pass,
        format!("slope {slope:.3}, errors {}, within build bound {within_bound}; {secs:.1}s", sci(&errs)),
    );
    assert!(pass);
}

#[test]
fn c05_radial_rate_dimension_free() {
    let start = Instant::now();
    let target = RadialTarget::squared_norm();
    let ns = [4usize, 8, 16, 32];
    let mut slopes = Vec::new();
    let mut at16 = Vec::new();
    for d in [2usize, 4, 8] {
        let mut errs = Vec::new();
        for &n in &ns {
            let b = build_radial_net(&target, n, d, logistic(), &BuildConfig::default()).unwrap();
            let e = measure_radial_error(&b.net, &target, 64, 8, 5).unwrap().sup_error;
            if n == 16 {
                at16.push(e);
            }
            errs.push(e);
        }
        let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        slopes.push(loglog_fit(&xs, &errs).unwrap().slope);
    }
    let spread = at16.iter().cloned().fold(0.0, f64::max) / at16.iter().cloned().fold(f64::INFINITY, f64::min);
    let secs = start.elapsed().as_secs_f64();
    let pass = slopes.iter().all(|s| *s <= -0.7) && spread < 3.0 && secs < 1800.0;
    report(
        "5 radial rate",
        pass,
        format!("slopes (d=2,4,8) {slopes:.3?}, n=16 spread {spread:.3}x; {secs:.1}s"),
    );
    assert!(pass);
}

fn theorem_builds() -> Vec<(String, radnet::radial::RadialBuild)> {
    let lipschitz = RadialTarget::squared_norm();
    let smooth = RadialTarget::new(TargetFn::Polynomial { coeffs: vec![0.0, 0.0, 1.0] }, 1, 1.0, 2.0).unwrap();
    let mut out = Vec::new();
    for (t, d, n) in [(&lipschitz, 2, 4), (&lipschitz, 5, 8), (&lipschitz, 3, 16), (&smooth, 2, 4)] {
        let b = build_radial_net(t, n, d, logistic(), &BuildConfig::default()).unwrap();
        out.push((format!("s={} d={d} n={n}", t.s), b));
    }
    out
}

#[test]
fn c06_parameter_accounting() {
    let start = Instant::now();
    let mut rng = stream_rng(6, 0);
    let mut agree = 0;
    for _ in 0..20 {
        let depth = rng.random_range(1..=4);
        let widths: Vec<usize> = (0..=depth).map(|_| rng.random_range(1..=5)).collect();
        if param_count(&widths) == param_count_enumerated(&widths) {
            agree += 1;
        }
    }
    let count_secs = start.elapsed().as_secs_f64();
    let mut sandwich = Vec::new();
    for (name, b) in theorem_builds() {
        let (d, s, n) = (b.report.d as u128, b.report.s as u128, b.report.n as u128);
        let base = 6 * d * (s + 3) * (3 * n + 3);
        let a3 = b.report.param_count;
        sandwich.push((name, base <= a3 && a3 <= 9 * base, a3, base));
    }
    let pass = agree == 20 && sandwich.iter().all(|s| s.1) && count_secs < 1.0;
    let detail: Vec<String> = sandwich
        .iter()
        .map(|(n, ok, a3, base)| format!("{n}: {base} <= {a3} <= {} {ok}", 9 * base))
        .collect();
    report(
        "6 parameter accounting",
        pass,
        format!("{agree}/20 closed forms agree ({count_secs:.3}s); {}", detail.join("; ")),
    );
    assert!(pass);
}

#[test]
fn c07_weight_bounds() {
    let mut detail = Vec::new();
    let mut pass = true;
    for (name, b) in theorem_builds() {
        let start = Instant::now();
        let alpha = weight_exponent(b.report.r, b.report.s);
        let r = b.net.max_abs_param().to_f64();
        let check = check_bounds(&b.net, BoundSpec { r, alpha });
        let secs = start.elapsed().as_secs_f64();
        pass &= check.passed && b.report.bounds_ok && secs < 1.0;
        detail.push(format!(
            "{name}: alpha {alpha}, log2 max {:.1} vs bound {:.1}, {secs:.3}s",
            check.max_abs_log2, check.bound_log2
        ));
    }
    report("7 weight bounds", pass, detail.join("; "));
    assert!(pass);
}

fn packing(s: usize) -> (bool, String) {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for n_star in [2usize, 4, 8] {
        let bump = hard::make_bump(s, 1.0, 1.0).unwrap();
        let fam = PackingFamily::new(n_star, bump).unwrap();
        let predicted = (n_star as f64).powf(-fam.r());
        let members = if n_star <= 4 {
            fam.enumerate().unwrap()
        } else {
            fam.sample(16, 8)
        };
        let mut worst = 0.0f64;
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                if members[i] == members[j] {
                    continue;
                }
                let dist = fam.pairwise_distance(&members[i], &members[j]).unwrap();
                worst = worst.max((dist - predicted).abs() / predicted);
            }
        }
        let holder_ok = members
            .iter()
            .enumerate()
            .all(|(i, m)| fam.audit_member(m, 10_000, i as u64).unwrap().passed);
        pass &= worst <= 0.01 && holder_ok;
        detail.push(format!(
            "N*={n_star}: worst relative distance error {worst:.4}, Hölder {holder_ok}, peak {:.4}",
            bump.peak
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 300.0;
    (pass, format!("{}; {secs:.1}s", detail.join("; ")))
}

#[test]
fn c08_packing_distances_r1() {
    let (pass, detail) = packing(0);
    report("8 packing r=1", pass, detail);
    assert!(pass);
}

#[test]
fn c08_packing_distances_r2() {
    let (pass, detail) = packing(1);
    report("8 packing r=2", pass, detail);
    assert!(pass);
}

#[test]
fn c09_learning_sweep() {
    let start = Instant::now();
    let target = RadialTarget::new(TargetFn::Kink { center: 0.5, slope: 1.0 }, 0, 1.0, 1.0).unwrap();
    let cfg = LearningConfig::default();
    let ms: Vec<usize> = (8..=13).map(|k| 1usize << k).collect();
    let table = rate_sweep(&target, &ms, 5, &cfg).unwrap();
    let steps = table.nonincreasing_steps();
    let slope = table.fitted_slope;
    let secs = start.elapsed().as_secs_f64();
    let medians: Vec<f64> = table.rows.iter().map(|r| r.median_excess_risk).collect();
    let pass = steps >= 4 && (-1.1..=-0.30).contains(&slope) && secs < 7200.0;
    report(
        "9 learning sweep",
        pass,
        format!("{steps}/5 nonincreasing, slope {slope:.3}, medians {}; {secs:.1}s", sci(&medians)),
    );
    assert!(pass);
}

#[test]
fn c10_precision_necessity() {
    let start = Instant::now();
    let eps = 1e-3;
    let hi = gate_error(eps, Precision::DEFAULT, &random_square(Precision::DEFAULT, 10_000, 10));
    let lo = gate_error(eps, Precision::DOUBLE, &random_square(Precision::DOUBLE, 10_000, 10));
    let secs = start.elapsed().as_secs_f64();
    let pass = lo > eps && hi <= eps && secs < 60.0;
    report(
        "10 precision necessity",
        pass,
        format!("53-bit error {lo:.3e}, 256-bit error {hi:.3e}, bound {eps:e}; {secs:.1}s"),
    );
    assert!(pass);
}
