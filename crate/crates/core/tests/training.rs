use sfpate::data::{self, Dataset, SplitSpec, SynthParams};
use sfpate::fairness::{
    self, fairness_components, surrogate_components, violation_of_components, FairnessSpec, Notion,
};
use sfpate::model::{self, TrainConfig};
use sfpate::pate::{self, PipelineConfig};
use sfpate::Matrix;

fn quick() -> TrainConfig {
    TrainConfig {
        epochs: 15,
        batch_size: 64,
        learning_rate: 5e-3,
        seed: 3,
        hidden: (16, 16),
    }
}

fn split(gap: f64, n: usize, seed: u64) -> (Dataset, Dataset) {
    let all = data::synth_biased(&SynthParams { n, gap, seed, ..Default::default() }).unwrap();
    let (train, _, test) = data::split(&all, &SplitSpec::standard(seed)).unwrap();
    let (train, stats) = data::standardize(&train, None).unwrap();
    let (test, _) = data::standardize(&test, Some(&stats)).unwrap();
    (train, test)
}

#[test]
fn surrogate_tracks_hard_gap_on_confident_outputs() {
    let confident = [0.999, 0.001, 0.998, 0.002, 0.999, 0.003, 0.001, 0.997];
    let probs = Matrix::from_rows(&confident.iter().map(|&p| [1.0 - p, p]).collect::<Vec<_>>()).unwrap();
    let labels = [1, 0, 1, 1, 0, 0, 1, 0];
    let groups = [0, 0, 0, 0, 1, 1, 1, 1];
    for notion in [Notion::DemographicParity, Notion::EqualizedOdds, Notion::GeneralizedDp { moments: 2 }] {
        let hard = violation_of_components(&fairness_components(&probs, &labels, notion).unwrap(), &groups, 2).unwrap();
        let soft = violation_of_components(&surrogate_components(&probs, &labels, notion).unwrap(), &groups, 2).unwrap();
        assert!((hard - soft).abs() < 0.02, "{notion}: hard {hard} soft {soft}");
    }
}

#[test]
fn loose_constraint_reduces_to_erm() {
    let (train, _) = split(3.0, 800, 1);
    let cfg = quick();
    let erm = model::train_erm(&train, &cfg).unwrap();
    let (fair, multipliers) =
        fairness::train_fair_with_multipliers(&train, &FairnessSpec::new(Notion::DemographicParity, 1.0), &cfg, None, 0.0)
            .unwrap();
    assert_eq!(fair, erm);
    assert!(multipliers.values().iter().all(|&v| v == 0.0));
}

#[test]
fn multipliers_stay_nonnegative() {
    let (train, _) = split(3.0, 1500, 2);
    for notion in [
        Notion::DemographicParity,
        Notion::EqualizedOdds,
        Notion::AccuracyParity,
        Notion::GeneralizedDp { moments: 2 },
    ] {
        let (_, multipliers) =
            fairness::train_fair_with_multipliers(&train, &FairnessSpec::new(notion, 0.0), &quick(), None, 0.0).unwrap();
        assert_eq!(multipliers.values().len(), train.group_count() * notion.components());
        assert!(multipliers.values().iter().all(|&v| v >= 0.0 && v.is_finite()), "{notion}");
    }
}

#[test]
fn constraint_costs_little_without_bias() {
    let (train, test) = split(0.0, 4000, 4);
    let cfg = TrainConfig { epochs: 30, ..quick() };
    let erm = model::train_erm(&train, &cfg).unwrap();
    let fair = fairness::train_fair(&train, &FairnessSpec::new(Notion::DemographicParity, 0.0), &cfg, None, 0.0).unwrap();
    let erm_acc = model::accuracy(&erm, &test).unwrap();
    let fair_acc = model::accuracy(&fair, &test).unwrap();
    assert!(erm_acc - fair_acc <= 0.02, "erm {erm_acc} fair {fair_acc}");
}

#[test]
fn fair_training_is_deterministic() {
    let (train, _) = split(3.0, 1000, 5);
    let spec = FairnessSpec::new(Notion::EqualizedOdds, 0.02);
    let a = fairness::train_fair(&train, &spec, &quick(), None, 0.0).unwrap();
    let b = fairness::train_fair(&train, &spec, &quick(), None, 0.0).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
    let c = fairness::train_fair(&train, &spec, &quick().with_seed(99), None, 0.0).unwrap();
    assert_ne!(a, c);
}

fn small_pipeline() -> PipelineConfig {
    PipelineConfig {
        teachers: 5,
        pool_size: 60,
        train: quick(),
        teacher_train: TrainConfig { epochs: 5, ..quick() },
        ..Default::default()
    }
}

#[test]
fn pipelines_run_on_a_group_blind_pool() {
    let (train, test) = split(3.0, 1500, 6);
    let config = small_pipeline();
    let (pool, rest) = data::split_pool(&train, config.pool_size, 6).unwrap();
    assert!(pool.groups().is_err());

    let s = pate::run_sf_s(&rest, &pool, &test, &config).unwrap();
    assert!(s.epsilon <= 1.0 + 1e-9);
    assert_eq!(s.account.as_ref().unwrap().s, config.pool_size);

    let protected = PipelineConfig {
        label_protection: true,
        lambda: 0.0,
        ..config.clone()
    };
    let t = pate::run_sf_t(&rest, &pool.hide_labels(), &test, &protected).unwrap();
    assert!((0.0..=1.0).contains(&t.accuracy));

    let again = pate::run_sf_s(&rest, &pool, &test, &config).unwrap();
    assert_eq!((s.accuracy, s.xi), (again.accuracy, again.xi));
}
