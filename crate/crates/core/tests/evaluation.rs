mod support;

use std::collections::BTreeSet;
use std::sync::Arc;

use apirec_core::evaluation::{compute_aggregates, make_folds, split_project, SkipReason};
use apirec_core::synth::{generate, planted_clone_corpus, SynthConfig};
use apirec_core::{run_evaluation, Configuration, EvalConfig, EvalReport, FoldScheme, Recommender};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn synthetic(projects: usize, seed: u64) -> Recommender {
    Recommender::new(Arc::new(
        generate(&SynthConfig {
            projects,
            seed,
            ..SynthConfig::default()
        })
        .unwrap(),
    ))
}

#[test]
fn planted_clones_are_found() {
    let engine = Recommender::new(Arc::new(planted_clone_corpus(20, 5).unwrap()));
    let cfg = EvalConfig {
        configuration: Configuration::C21,
        k_values: vec![1],
        n_values: vec![1, 5],
        folds: FoldScheme::LeaveOneOut,
        ..EvalConfig::default()
    };
    let report = run_evaluation(&engine, &cfg).unwrap();
    assert_eq!(report.evaluated_projects, 40);
    let at1 = report.aggregate(1, 1).unwrap();
    assert_eq!(at1.success_rate, 100.0);
    assert_eq!(at1.mean_precision, 1.0);
}

#[test]
fn success_rate_grows_with_n() {
    let engine = synthetic(100, 4);
    let n_values: Vec<usize> = (1..=20).collect();
    for configuration in Configuration::ALL {
        let cfg = EvalConfig {
            configuration,
            k_values: vec![1, 2, 4, 8],
            n_values: n_values.clone(),
            ..EvalConfig::default()
        };
        let report = run_evaluation(&engine, &cfg).unwrap();
        for &k in &cfg.k_values {
            let rates: Vec<f64> = n_values.iter().map(|&n| report.aggregate(k, n).unwrap().success_rate).collect();
            assert!(rates.windows(2).all(|w| w[0] <= w[1]), "{configuration} k={k}: {rates:?}");
        }
    }
}

#[test]
fn output_does_not_depend_on_threads() {
    let engine = synthetic(60, 2);
    for folds in [FoldScheme::TenFold, FoldScheme::LeaveOneOut] {
        let run = |jobs| {
            let cfg = EvalConfig {
                k_values: vec![2, 4],
                folds,
                jobs,
                seed: 17,
                ..EvalConfig::default()
            };
            run_evaluation(&engine, &cfg).unwrap().to_json().unwrap()
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(1));
    }
}

#[test]
fn aggregates_are_recomputable_from_rows() {
    let engine = synthetic(50, 9);
    let cfg = EvalConfig {
        k_values: vec![1, 4],
        n_values: vec![1, 10],
        ..EvalConfig::default()
    };
    let json = run_evaluation(&engine, &cfg).unwrap().to_json().unwrap();
    let report: EvalReport = serde_json::from_str(&json).unwrap();
    let (aggregates, categories) = compute_aggregates(&report.rows);
    assert_eq!(aggregates, report.aggregates);
    assert_eq!(categories, report.categories);
    // independent recomputation of one cell
    let rows: Vec<_> = report.rows.iter().filter(|r| r.k == 4 && r.n == 10).collect();
    let hits = rows.iter().filter(|r| r.hit).count();
    let agg = report.aggregate(4, 10).unwrap();
    assert_eq!(agg.projects, rows.len());
    assert_eq!(agg.success_rate, 100.0 * hits as f64 / rows.len() as f64);
    assert_eq!(report.evaluated_projects + report.skipped.total, 50);
    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), report.rows.len() + 1);
}

#[test]
fn row_metrics_are_consistent() {
    let engine = synthetic(60, 3);
    let report = run_evaluation(&engine, &EvalConfig::default()).unwrap();
    for r in &report.rows {
        assert!(r.precision <= 1.0 && r.recall <= 1.0);
        assert_eq!(r.hit, r.precision > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn folds_partition_the_corpus(seed in any::<u64>(), projects in 10usize..80) {
        let corpus = generate(&SynthConfig { projects, seed, declarations: (1, 3), ..SynthConfig::default() }).unwrap();
        let folds = make_folds(&corpus, FoldScheme::TenFold, seed).unwrap();
        prop_assert_eq!(folds.len(), 10);
        let mut seen = BTreeSet::new();
        for f in &folds {
            let sizes = f.test.len();
            prop_assert!(sizes == projects / 10 || sizes == projects.div_ceil(10));
            for &p in &f.test {
                prop_assert!(seen.insert(p));
                prop_assert!(!f.train.contains(&p));
            }
            prop_assert_eq!(f.train.len() + f.test.len(), projects);
        }
        prop_assert_eq!(seen.len(), projects);
    }

    #[test]
    fn splits_partition_the_project(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus = support::random_corpus(&mut rng, 3, 20, 12);
        for project in corpus.projects() {
            for configuration in Configuration::ALL {
                match split_project(project, configuration) {
                    Ok(s) => {
                        prop_assert_eq!(s.context.len() + 1 + s.removed.len(), project.declarations.len());
                        prop_assert_eq!(s.query.len(), configuration.query_len());
                        prop_assert_eq!(&s.query[..], &s.active.invocations()[..s.query.len()]);
                        for g in &s.ground_truth {
                            prop_assert!(!s.query.contains(g));
                            prop_assert!(s.hidden_sequence().contains(g));
                        }
                    }
                    Err(SkipReason::TooFewDeclarations) => {
                        let min = if matches!(configuration, Configuration::C11 | Configuration::C12) { 4 } else { 2 };
                        prop_assert!(project.declarations.len() < min);
                    }
                    Err(_) => {}
                }
            }
        }
    }
}
