use std::collections::HashMap;

use proptest::prelude::*;
use sfpate::data::{self, Dataset, SynthParams};
use sfpate::fairness::{violation_of_predictions, Notion};
use sfpate::privacy::{self, noisy_argmax, VoteCounts};
use sfpate::rng::seeded;
use sfpate::theory::{bound_alpha_prime, bound_alpha_prime_variant, estimate_tv};
use sfpate::Matrix;

fn notion() -> impl Strategy<Value = Notion> {
    prop_oneof![
        Just(Notion::DemographicParity),
        Just(Notion::EqualizedOdds),
        Just(Notion::AccuracyParity),
        (1usize..4).prop_map(|moments| Notion::GeneralizedDp { moments }),
    ]
}

/// Rows of (prediction, label, group) with binary predictions and labels,
/// every group present.
fn rows(m: usize) -> impl Strategy<Value = Vec<(usize, usize, usize)>> {
    prop::collection::vec((0usize..2, 0usize..2, 0..m), 0..80).prop_map(move |mut rows| {
        rows.extend((0..m).map(|a| (a % 2, 1, a)));
        rows
    })
}

fn xi(rows: &[(usize, usize, usize)], m: usize, notion: Notion) -> f64 {
    let preds: Vec<usize> = rows.iter().map(|r| r.0).collect();
    let labels: Vec<usize> = rows.iter().map(|r| r.1).collect();
    let groups: Vec<usize> = rows.iter().map(|r| r.2).collect();
    violation_of_predictions(&preds, &labels, &groups, m, notion).unwrap()
}

proptest! {
    #[test]
    fn violation_is_bounded_and_invariant(
        (m, rows) in (2usize..4).prop_flat_map(|m| (Just(m), rows(m))),
        notion in notion(),
        shuffle_seed in any::<u64>(),
    ) {
        let base = xi(&rows, m, notion);
        prop_assert!((0.0..=1.0).contains(&base));

        let mut permuted = rows.clone();
        use rand::seq::SliceRandom;
        permuted.shuffle(&mut seeded(shuffle_seed));
        prop_assert!((xi(&permuted, m, notion) - base).abs() < 1e-12);

        let doubled: Vec<_> = rows.iter().chain(rows.iter()).copied().collect();
        prop_assert!((xi(&doubled, m, notion) - base).abs() < 1e-12);
    }

    #[test]
    fn bounds_are_monotone(
        eta in 0.0f64..0.5,
        d_eta in 0.0f64..0.2,
        p in 0.05f64..0.5,
        d_p in 0.0f64..0.3,
        b in 0.0f64..2.0,
        alpha in 0.0f64..0.5,
    ) {
        let lo = bound_alpha_prime(eta, b, p, alpha).unwrap();
        prop_assert!(bound_alpha_prime(eta + d_eta, b, p, alpha).unwrap() >= lo);
        prop_assert!(bound_alpha_prime(eta, b, p + d_p, alpha).unwrap() <= lo);

        // The variant needs the minimum probability to exceed eta.
        let q = eta + d_eta + p;
        if let Ok(v) = bound_alpha_prime_variant(eta, b, q, alpha) {
            prop_assert!(bound_alpha_prime_variant(eta + d_eta, b, q, alpha).unwrap() >= v);
            prop_assert!(bound_alpha_prime_variant(eta, b, q + d_p, alpha).unwrap() <= v);
        }
    }

    #[test]
    fn tv_is_a_metric_on_empiricals(
        x in prop::collection::vec(0u8..5, 1..60),
        y in prop::collection::vec(0u8..5, 1..60),
        z in prop::collection::vec(0u8..5, 1..60),
    ) {
        let xy = estimate_tv(&x, &y).unwrap();
        prop_assert!((0.0..=1.0).contains(&xy));
        prop_assert!((xy - estimate_tv(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!(estimate_tv(&x, &x).unwrap() < 1e-12);
        let xz = estimate_tv(&x, &z).unwrap();
        let zy = estimate_tv(&z, &y).unwrap();
        prop_assert!(xy <= xz + zy + 1e-12);
    }

    #[test]
    fn noiseless_vote_is_plurality(counts in prop::collection::vec(0usize..20, 1..6), seed in any::<u64>()) {
        let votes = VoteCounts::from_counts(counts.clone()).unwrap();
        let max = *counts.iter().max().unwrap();
        let first = counts.iter().position(|&c| c == max).unwrap();
        prop_assert_eq!(noisy_argmax(&votes, 0.0, &mut seeded(seed)), first);
    }

    #[test]
    fn composition_is_additive_and_rdp_linear(
        sigma in 0.5f64..200.0,
        s1 in 0usize..500,
        s2 in 0usize..500,
        gamma in 1.0f64..100.0,
    ) {
        let both = privacy::compose(sigma, s1 + s2, gamma);
        let parts = privacy::compose(sigma, s1, gamma) + privacy::compose(sigma, s2, gamma);
        prop_assert!((both - parts).abs() <= 1e-12 * both.max(1.0));
        let r1 = privacy::rdp_epsilon(sigma, gamma).unwrap();
        let r2 = privacy::rdp_epsilon(sigma, 2.0 * gamma).unwrap();
        prop_assert!((r2 - 2.0 * r1).abs() <= 1e-12 * r2);
    }

    /// Teachers that are arbitrary deterministic functions of their shard's
    /// group column still move a count vector by at most sqrt(2).
    #[test]
    fn probe_never_exceeds_sqrt2(
        (m, groups) in (2usize..4).prop_flat_map(|m| (Just(m), prop::collection::vec(0..m, 1..9))),
        teachers in 1usize..4,
        queries in 1usize..5,
        domain in 2usize..4,
        salt in any::<u64>(),
    ) {
        let shard_of: Vec<usize> = (0..groups.len()).map(|i| i % teachers).collect();
        let predict = |k: usize, g: &[usize]| -> Result<Vec<usize>, String> {
            let key: Vec<usize> = g.iter().zip(&shard_of).filter(|(_, &s)| s == k).map(|(a, _)| *a).collect();
            Ok((0..queries)
                .map(|q| {
                    let mut h = salt ^ (k as u64) << 8 ^ q as u64;
                    for &a in &key {
                        h = sfpate::rng::splitmix64(h ^ a as u64);
                    }
                    (h % domain as u64) as usize
                })
                .collect())
        };
        let worst = privacy::sensitivity_probe(&groups, m, &shard_of, teachers, domain, predict).unwrap();
        prop_assert!(worst <= std::f64::consts::SQRT_2 + 1e-12);
    }

    #[test]
    fn split_and_shards_partition_rows(
        n in 40usize..200,
        k in 1usize..6,
        min_per_group in 0usize..3,
        seed in any::<u64>(),
    ) {
        let d = data::synth_biased(&SynthParams { n, d: 2, seed, ..Default::default() }).unwrap();
        let (train, eval, test) = data::split(&d, &data::SplitSpec::standard(seed)).unwrap();
        let mut ids: Vec<usize> = [&train, &eval, &test].iter().flat_map(|p| p.row_ids().to_vec()).collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..n).collect::<Vec<_>>());

        if let Ok(shards) = data::shard_teachers(&train, k, seed, min_per_group) {
            prop_assert_eq!(shards.len(), k);
            let mut ids: Vec<usize> = shards.iter().flat_map(|s| s.row_ids().to_vec()).collect();
            ids.sort_unstable();
            let mut expected = train.row_ids().to_vec();
            expected.sort_unstable();
            prop_assert_eq!(ids, expected);
            for s in &shards {
                prop_assert!(s.group_sizes().iter().all(|&c| c >= min_per_group));
            }
            let sizes: Vec<usize> = shards.iter().map(Dataset::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn pool_and_rest_partition_source(n in 20usize..120, s in 1usize..20, seed in any::<u64>()) {
        let d = data::synth_biased(&SynthParams { n, d: 2, seed, ..Default::default() }).unwrap();
        let (pool, rest) = data::split_pool(&d, s, seed).unwrap();
        prop_assert_eq!(pool.len(), s);
        let mut ids: Vec<usize> = pool.row_ids().iter().chain(rest.row_ids()).copied().collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..n).collect::<Vec<_>>());
        prop_assert!(pool.groups().is_err());
    }
}

#[test]
fn vote_distribution_ignores_common_shift() {
    let draws = 100_000;
    let base = [3usize, 5, 4];
    let shifted: Vec<usize> = base.iter().map(|c| c + 100).collect();
    let freq = |counts: &[usize]| {
        let votes = VoteCounts::from_counts(counts.to_vec()).unwrap();
        let mut rng = seeded(11);
        let mut hist: HashMap<usize, usize> = HashMap::new();
        for _ in 0..draws {
            *hist.entry(noisy_argmax(&votes, 2.0, &mut rng)).or_default() += 1;
        }
        (0..counts.len())
            .map(|j| *hist.get(&j).unwrap_or(&0) as f64 / draws as f64)
            .collect::<Vec<_>>()
    };
    let (a, b) = (freq(&base), freq(&shifted));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 0.01, "{a:?} vs {b:?}");
    }
}

#[test]
fn probability_rows_are_distributions() {
    let arch = sfpate::model::Architecture::new(3, (4, 5), 3);
    let params = sfpate::model::MlpParams::init(arch, &mut seeded(5));
    let x = Matrix::from_vec(4, 3, vec![0.1, -2.0, 3.0, 0.0, 0.0, 0.0, 9.0, -9.0, 1.0, 0.5, 0.5, 0.5]).unwrap();
    let probs = sfpate::model::forward(&params, &x).unwrap();
    for row in probs.iter_rows() {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(row.iter().all(|&p| p >= 0.0));
    }
    assert!(sfpate::model::loss(&probs, &[0, 1, 2, 0]).unwrap() >= 0.0);
}
