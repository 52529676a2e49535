use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use radnet::activation::Activation;
use radnet::document;
use radnet::hard::{self, LowerBoundParams, PackingFamily};
use radnet::learning::{rate_sweep, LearningConfig};
use radnet::numeric::{loglog_fit, stream_rng, Precision};
use radnet::radial::{self, build_radial_net, measure_radial_error, BuildReport, RadialError};
use radnet::tree::{check_bounds, BoundSpec, BoundsCheck};
use radnet::univariate::BuildConfig;
use rand::Rng;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn build_config(cfg: &ExperimentConfig) -> Result<BuildConfig, CliError> {
    Ok(BuildConfig {
        precision: Precision::new(cfg.precision_bits)?,
        precision_ceiling: cfg.precision_ceiling,
        ..BuildConfig::default()
    })
}

#[derive(Serialize)]
struct BuildOutput<'a> {
    config: &'a ExperimentConfig,
    report: &'a BuildReport,
    error: Option<RadialError>,
}

pub fn build(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let sec = &cfg.build;
    if sec.n == 0 || sec.d == 0 {
        return Err(CliError::Config("build.n and build.d must be positive".into()));
    }
    let target = sec.target.radial()?;
    let act = Activation::new(cfg.activation_kind()?);
    let built = build_radial_net(&target, sec.n, sec.d, act, &build_config(cfg)?)?;
    let error = if sec.n_radial > 0 {
        Some(measure_radial_error(&built.net, &target, sec.n_radial, sec.n_sphere.max(1), cfg.seed)?)
    } else {
        None
    };
    write(&cfg.out, "net.json", &document::to_json(&built.net)?)?;
    let out = BuildOutput {
        config: cfg,
        report: &built.report,
        error: error.clone(),
    };
    write(&cfg.out, "report.json", &json(&out)?)?;
    let r = &built.report;
    let mut msg = format!(
        "widths {:?}  params {}  precision {} bits  max|param| 2^{:.1}",
        r.widths, r.param_count, r.precision_bits, r.max_abs_param_log2
    );
    if let Some(e) = error {
        let _ = write!(msg, "  sup error {:.4e}", e.sup_error);
    }
    Ok(msg)
}

#[derive(Serialize)]
struct ApproxRow {
    n: usize,
    d: usize,
    r: f64,
    sup_error: f64,
    params: u128,
}

#[derive(Serialize)]
struct ApproxOutput<'a> {
    config: &'a ExperimentConfig,
    rows: &'a [ApproxRow],
    fitted_slope: f64,
}

pub const APPROX_CSV_HEADER: &str = "n,d,r,sup_error,params";

pub fn rate_approx(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let sec = &cfg.rate_approx;
    if sec.n_list.is_empty() {
        return Err(CliError::Config("rate_approx.n_list is empty".into()));
    }
    if sec.n_list.contains(&0) || sec.d == 0 {
        return Err(CliError::Config("rate_approx.n_list entries and d must be positive".into()));
    }
    let target = sec.target.radial()?;
    let act = Activation::new(cfg.activation_kind()?);
    let bcfg = build_config(cfg)?;
    let mut rows = Vec::with_capacity(sec.n_list.len());
    for &n in &sec.n_list {
        let built = build_radial_net(&target, n, sec.d, act, &bcfg)?;
        let e = measure_radial_error(&built.net, &target, sec.n_radial, sec.n_sphere, cfg.seed)?;
        rows.push(ApproxRow {
            n,
            d: sec.d,
            r: target.r(),
            sup_error: e.sup_error,
            params: built.report.param_count,
        });
    }
    let fitted_slope = if rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
        loglog_fit(&xs, &ys)?.slope
    } else {
        f64::NAN
    };
    let mut csv = format!("{APPROX_CSV_HEADER}\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{:e},{}", r.n, r.d, r.r, r.sup_error, r.params);
    }
    let _ = writeln!(csv, "fitted_slope,{},{},{},", sec.d, target.r(), fitted_slope);
    write(&cfg.out, "rate_approx.csv", &csv)?;
    write(
        &cfg.out,
        "rate_approx.json",
        &json(&ApproxOutput {
            config: cfg,
            rows: &rows,
            fitted_slope,
        })?,
    )?;
    Ok(format!("{} rows, fitted slope {fitted_slope:.3}", rows.len()))
}

pub fn rate_learn(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let sec = &cfg.rate_learn;
    if sec.m_list.is_empty() {
        return Err(CliError::Config("rate_learn.m_list is empty".into()));
    }
    let target = sec.target.radial()?;
    let lc = LearningConfig {
        m: sec.m_list[0],
        d: sec.d,
        response_bound: sec.response_bound,
        noise: sec.noise,
        n_constant: sec.n_constant,
        optimizer: sec.optimizer,
        activation: cfg.activation_kind()?,
        n_test: sec.n_test,
        seed: cfg.seed,
    };
    lc.validate()?;
    let table = rate_sweep(&target, &sec.m_list, sec.trials, &lc)?;
    write(&cfg.out, "rate_learn.csv", &table.to_csv())?;
    #[derive(Serialize)]
    struct Out<'a> {
        config: &'a ExperimentConfig,
        table: &'a radnet::learning::RateTable,
    }
    write(&cfg.out, "rate_learn.json", &json(&Out { config: cfg, table: &table })?)?;
    Ok(format!(
        "{} rows, fitted slope {:.3} (reference {:.3})",
        table.rows.len(),
        table.fitted_slope,
        table.theory_slope
    ))
}

#[derive(Serialize)]
struct PairRow {
    pair: usize,
    hamming: usize,
    distance: f64,
    predicted: f64,
    relative_error: f64,
    pass: bool,
}

#[derive(Serialize)]
struct PackOutput<'a> {
    config: &'a ExperimentConfig,
    family: &'a PackingFamily,
    bump_audit: hard::HolderAudit,
    member_audits: Vec<hard::HolderAudit>,
    pairs: &'a [PairRow],
    all_passed: bool,
}

pub const PACK_CSV_HEADER: &str = "pair,hamming,distance,predicted,relative_error,pass";

pub fn pack(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let sec = &cfg.pack;
    if sec.n_star == 0 {
        return Err(CliError::Config("pack.n_star must be at least 1".into()));
    }
    if sec.n_star > hard::ENUMERATION_CAP && !sec.sample {
        return Err(CliError::Config(format!(
            "pack.n_star = {} exceeds the enumeration cap {}; set pack.sample = true",
            sec.n_star,
            hard::ENUMERATION_CAP
        )));
    }
    let bump = hard::make_bump(sec.s, sec.v, sec.c0)?;
    let family = PackingFamily::new(sec.n_star, bump)?;
    let predicted = sec.c0 * (sec.n_star as f64).powf(-family.r());

    // All pairs of a small family, otherwise a member and a random
    // non-empty set of flipped signs.
    let mut pairs: Vec<(Vec<i8>, Vec<i8>)> = Vec::new();
    if sec.n_star <= 4 {
        let members = family.enumerate()?;
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                pairs.push((members[i].clone(), members[j].clone()));
            }
        }
    } else {
        let mut rng = stream_rng(cfg.seed, 0x7061_6972);
        let bases = family.sample(sec.pairs, cfg.seed);
        for a in bases {
            let mut b = a.clone();
            while b == a {
                for (bj, aj) in b.iter_mut().zip(&a) {
                    *bj = if rng.random::<bool>() { -aj } else { *aj };
                }
            }
            pairs.push((a, b));
        }
    }
    let mut rows = Vec::with_capacity(pairs.len());
    for (i, (a, b)) in pairs.iter().enumerate() {
        let dist = family.pairwise_distance(a, b)?;
        let rel = (dist - predicted).abs() / predicted;
        rows.push(PairRow {
            pair: i,
            hamming: a.iter().zip(b).filter(|(x, y)| x != y).count(),
            distance: dist,
            predicted,
            relative_error: rel,
            pass: rel <= 0.01,
        });
    }
    let members = if sec.n_star <= hard::ENUMERATION_CAP && (1usize << sec.n_star) <= sec.members {
        family.enumerate()?
    } else {
        family.sample(sec.members, cfg.seed ^ 0x6d)
    };
    let mut member_audits = Vec::with_capacity(members.len());
    for (i, m) in members.iter().enumerate() {
        member_audits.push(family.audit_member(m, sec.holder_pairs, cfg.seed + i as u64)?);
    }
    let bump_audit = hard::audit_bump(&bump, sec.holder_pairs, cfg.seed);
    let all_passed = rows.iter().all(|r| r.pass) && member_audits.iter().all(|a| a.passed) && bump_audit.passed;

    let mut csv = format!("{PACK_CSV_HEADER}\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{:e},{:e},{:e},{}",
            r.pair, r.hamming, r.distance, r.predicted, r.relative_error, r.pass
        );
    }
    write(&cfg.out, "pack.csv", &csv)?;
    write(
        &cfg.out,
        "pack.json",
        &json(&PackOutput {
            config: cfg,
            family: &family,
            bump_audit,
            member_audits,
            pairs: &rows,
            all_passed,
        })?,
    )?;
    Ok(format!(
        "{} pairs, predicted distance {predicted:.4e}, bump peak {:.4e}: {}",
        rows.len(),
        bump.peak,
        if all_passed { "PASS" } else { "FAIL" }
    ))
}

#[derive(Serialize)]
struct AuditOutput<'a> {
    config: &'a ExperimentConfig,
    activation: radnet::activation::AssumptionReport,
    lower_bounds: &'a [hard::LowerBoundRow],
    c3: f64,
    c4: f64,
    weight_bounds: Option<BoundsCheck>,
}

pub const LOWER_BOUND_CSV_HEADER: &str = "n,shallow,deep,lemma,n_star";

pub fn audit(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let sec = &cfg.audit;
    if sec.n_list.is_empty() {
        return Err(CliError::Config("audit.n_list is empty".into()));
    }
    let act = Activation::new(cfg.activation_kind()?);
    let report = act.validate_assumptions(sec.s0, sec.theta0_tol)?;
    let params = LowerBoundParams {
        r: sec.r,
        c0: sec.c0,
        d: sec.d,
        beta: sec.beta,
        c1: sec.c1,
        c2: sec.c2,
        depth: sec.depth,
    };
    let curves = hard::lower_bound_curves(&params, &sec.n_list);
    let weight_bounds = match &sec.net {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let net = document::from_json(&text)?;
            let alpha = sec.alpha.unwrap_or_else(|| radial::weight_exponent(sec.r, 0));
            let r = sec
                .bound_r
                .unwrap_or_else(|| net.max_abs_param().to_f64().max(f64::MIN_POSITIVE));
            Some(check_bounds(&net, BoundSpec { r, alpha }))
        }
        None => None,
    };
    let mut csv = format!("{LOWER_BOUND_CSV_HEADER}\n");
    for row in &curves {
        let _ = writeln!(
            csv,
            "{},{:e},{:e},{:e},{}",
            row.n, row.shallow, row.deep, row.lemma, row.n_star
        );
    }
    write(&cfg.out, "lower_bounds.csv", &csv)?;
    let ok = report.satisfied && weight_bounds.as_ref().is_none_or(|b| b.passed);
    write(
        &cfg.out,
        "audit.json",
        &json(&AuditOutput {
            config: cfg,
            activation: report.clone(),
            lower_bounds: &curves,
            c3: params.c3(),
            c4: params.c4(),
            weight_bounds,
        })?,
    )?;
    Ok(format!(
        "activation {}: {}; theta0 {:?}; {} lower-bound rows",
        act.name(),
        if ok { "PASS" } else { "FAIL" },
        report.theta0,
        curves.len()
    ))
}
