use radnet::activation::{Activation, ActivationKind};
use radnet::learning::{excess_risk, sample_dataset, train_erm_f64, F64Net, LearningConfig, OptimizerConfig, Sample};
use radnet::numeric::stream_rng;
use radnet::target::{RadialTarget, TargetFn};
use radnet::tree::BoundSpec;

fn zero_target() -> RadialTarget {
    RadialTarget::new(TargetFn::Polynomial { coeffs: vec![0.0] }, 0, 1.0, 1.0).unwrap()
}

const LOOSE: BoundSpec = BoundSpec { r: 1.0e3, alpha: 1.0 };

#[test]
fn excess_risk_of_exact_predictor_is_zero() {
    let f = RadialTarget::squared_norm();
    let exact = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let est = excess_risk(&exact, &f, 3, 2.0, 500, 1).unwrap();
    assert!(est.value < 1e-28);
}

#[test]
fn excess_risk_of_unit_offset_is_one() {
    let one = |_: &[f64]| 1.0;
    let est = excess_risk(&one, &zero_target(), 2, 2.0, 200, 2).unwrap();
    assert_eq!(est.value, 1.0);
    assert_eq!(est.stderr, 0.0);
}

#[test]
fn excess_risk_truncates_at_the_response_bound() {
    let big = |_: &[f64]| 10.0;
    let est = excess_risk(&big, &zero_target(), 2, 2.0, 200, 3).unwrap();
    assert_eq!(est.value, 4.0);
}

#[test]
fn a_single_sample_is_interpolated() {
    let act = Activation::new(ActivationKind::Logistic);
    let data = vec![Sample { x: vec![0.3, -0.4], y: 0.7 }];
    let out = train_erm_f64(&[2, 6, 3, 6], act, &data, &OptimizerConfig::default(), LOOSE, 4).unwrap();
    assert!(out.train_loss <= 1e-8, "loss {}", out.train_loss);
}

#[test]
fn a_realizable_sample_is_fitted() {
    let act = Activation::new(ActivationKind::Logistic);
    let widths = [2, 6, 3, 6];
    let teacher = F64Net::random(&widths, act, 1.0, &mut stream_rng(5, 0)).unwrap();
    let mut rng = stream_rng(5, 1);
    let data: Vec<Sample> = (0..64)
        .map(|_| {
            let x = radnet::learning::uniform_ball(&mut rng, 2);
            let y = teacher.eval(&x);
            Sample { x, y }
        })
        .collect();
    let opt = OptimizerConfig { steps: 4000, ..OptimizerConfig::default() };
    let out = train_erm_f64(&widths, act, &data, &opt, LOOSE, 6).unwrap();
    assert!(out.train_loss <= 1e-4, "loss {}", out.train_loss);
}

#[test]
fn more_restarts_never_raise_the_training_loss() {
    let act = Activation::new(ActivationKind::Logistic);
    let cfg = LearningConfig { m: 128, ..LearningConfig::default() };
    let data = sample_dataset(&RadialTarget::squared_norm(), &cfg, 7).unwrap();
    let mut prev = f64::INFINITY;
    for restarts in [1, 2, 4] {
        let opt = OptimizerConfig { steps: 300, epochs: 0.0, restarts, ..OptimizerConfig::default() };
        let loss = train_erm_f64(&[2, 6, 3, 6], act, &data, &opt, LOOSE, 8).unwrap().train_loss;
        assert!(loss <= prev, "{restarts} restarts: {loss} > {prev}");
        prev = loss;
    }
}

#[test]
fn noise_above_the_response_bound_is_rejected() {
    let cfg = LearningConfig {
        noise: radnet::learning::Noise::BoundedUniform { sigma: 1.5 },
        ..LearningConfig::default()
    };
    let err = sample_dataset(&RadialTarget::squared_norm(), &cfg, 0).unwrap_err();
    assert!(err.is_configuration());
}
