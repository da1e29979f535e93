//! Property tests: structural invariants of storage and scoring, checked
//! against naive reference implementations.

use gbnn::{
    score, score_norm, score_som, score_sos, DynamicRule, FanalId, Message, Network,
    NetworkShape, SCORE_EPS,
};
use proptest::prelude::*;

/// A shape small enough to enumerate, together with a batch of storable
/// messages and an activity pattern.
#[derive(Debug, Clone)]
struct Instance {
    chi: usize,
    ell: usize,
    messages: Vec<Vec<u32>>,
    active: Vec<bool>,
}

fn instances() -> impl Strategy<Value = Instance> {
    // cluster sizes past 5 make rows span several words and put cluster
    // boundaries inside words, which is where the masked scoring loops
    // can go wrong
    (2usize..=5, prop_oneof![1usize..=5, 20usize..=40])
        .prop_flat_map(|(chi, ell)| {
            let message = proptest::collection::vec(0..=ell as u32, chi).prop_filter(
                "need at least 2 nonzero segments",
                |m| m.iter().filter(|&&s| s != 0).count() >= 2,
            );
            let messages = proptest::collection::vec(message, 1..8);
            let active = proptest::collection::vec(any::<bool>(), chi * ell);
            (Just(chi), Just(ell), messages, active)
        })
        .prop_map(|(chi, ell, messages, active)| Instance { chi, ell, messages, active })
}

fn build(instance: &Instance) -> Network {
    let shape = NetworkShape::new(instance.chi, instance.ell).unwrap();
    let mut net = Network::new(shape);
    for m in &instance.messages {
        net.store(&Message::new(m.clone())).unwrap();
    }
    for (flat, &on) in instance.active.iter().enumerate() {
        net.set_active(shape.fanal_at(flat), on).unwrap();
    }
    net
}

/// Reference scoring straight off the definitions, using only public
/// getters: a triple loop over fanal, cluster and in-cluster candidates.
fn naive_scores(net: &Network, rule: DynamicRule, gamma: f64) -> Vec<f64> {
    let shape = *net.shape();
    let mut out = Vec::with_capacity(shape.fanal_count());
    for flat in 0..shape.fanal_count() {
        let fanal = shape.fanal_at(flat);
        let mut lambda = if net.is_active(fanal).unwrap() { gamma } else { 0.0 };
        for cluster in 1..=shape.clusters() {
            let mut connected_active = 0usize;
            let mut cluster_active = 0usize;
            for index in 1..=shape.cluster_size() {
                let other = FanalId::new(cluster, index);
                if !net.is_active(other).unwrap() {
                    continue;
                }
                cluster_active += 1;
                if net.is_edge(fanal, other).unwrap() {
                    connected_active += 1;
                }
            }
            lambda += match rule {
                DynamicRule::SumOfSum => connected_active as f64,
                DynamicRule::SumOfMax => (connected_active > 0) as u8 as f64,
                DynamicRule::Normalization => {
                    if cluster_active == 0 {
                        0.0
                    } else {
                        connected_active as f64 / cluster_active as f64
                    }
                }
            };
        }
        out.push(lambda);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn weights_stay_symmetric_partite_and_loopless(instance in instances()) {
        let net = build(&instance);
        let shape = *net.shape();
        for a in 0..shape.fanal_count() {
            let fa = shape.fanal_at(a);
            prop_assert!(!net.is_edge(fa, fa).unwrap());
            for b in 0..a {
                let fb = shape.fanal_at(b);
                prop_assert_eq!(net.is_edge(fa, fb).unwrap(), net.is_edge(fb, fa).unwrap());
                if fa.cluster == fb.cluster {
                    prop_assert!(!net.is_edge(fa, fb).unwrap());
                }
            }
        }
    }

    #[test]
    fn storing_again_changes_nothing(instance in instances()) {
        let mut net = build(&instance);
        let before: Vec<bool> = edges_of(&net);
        for m in &instance.messages {
            prop_assert_eq!(net.store(&Message::new(m.clone())).unwrap(), 0);
        }
        prop_assert_eq!(edges_of(&net), before);
    }

    #[test]
    fn every_stored_message_induces_a_clique(instance in instances()) {
        let net = build(&instance);
        for m in &instance.messages {
            let fanals = Message::new(m.clone()).fanals(net.shape()).unwrap();
            for (i, &a) in fanals.iter().enumerate() {
                for &b in &fanals[i + 1..] {
                    prop_assert!(net.is_edge(a, b).unwrap());
                }
            }
        }
    }

    #[test]
    fn probe_insertion_ignores_prior_activity(instance in instances()) {
        let shape = NetworkShape::new(instance.chi, instance.ell).unwrap();
        let probe = Message::new(instance.messages[0].clone());
        let mut dirty = build(&instance);
        dirty.insert_probe(&probe).unwrap();
        let mut fresh = Network::new(shape);
        fresh.insert_probe(&probe).unwrap();
        prop_assert_eq!(dirty.active_fanals(), fresh.active_fanals());
    }

    #[test]
    fn optimized_rules_match_the_naive_oracle(instance in instances(), gamma in 0.0f64..4.0) {
        let net = build(&instance);
        for rule in [DynamicRule::SumOfSum, DynamicRule::Normalization, DynamicRule::SumOfMax] {
            let fast = score(&net, rule, gamma);
            let slow = naive_scores(&net, rule, gamma);
            for (a, b) in fast.values().iter().zip(&slow) {
                prop_assert!((a - b).abs() <= SCORE_EPS, "{rule:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn som_and_norm_are_bounded_by_sos(instance in instances()) {
        let net = build(&instance);
        let sos = score_sos(&net, 0.0);
        let som = score_som(&net, 0.0);
        let norm = score_norm(&net, 0.0);
        for i in 0..sos.len() {
            prop_assert!(som.values()[i] <= sos.values()[i] + SCORE_EPS);
            prop_assert!(norm.values()[i] <= sos.values()[i] + SCORE_EPS);
        }
    }

    #[test]
    fn rules_coincide_when_clusters_hold_at_most_one_active(instance in instances()) {
        let mut net = build(&instance);
        // thin the activity down to one fanal per cluster
        let shape = *net.shape();
        let mut seen = vec![false; shape.clusters()];
        for flat in net.active_fanals() {
            if seen[flat.cluster - 1] {
                net.set_active(flat, false).unwrap();
            }
            seen[flat.cluster - 1] = true;
        }
        let sos = score_sos(&net, 0.0);
        let som = score_som(&net, 0.0);
        let norm = score_norm(&net, 0.0);
        for i in 0..sos.len() {
            prop_assert!((som.values()[i] - sos.values()[i]).abs() <= SCORE_EPS);
            prop_assert!((norm.values()[i] - sos.values()[i]).abs() <= SCORE_EPS);
        }
    }

    #[test]
    fn scoring_is_pure(instance in instances(), gamma in 0.0f64..4.0) {
        let net = build(&instance);
        for rule in [DynamicRule::SumOfSum, DynamicRule::Normalization, DynamicRule::SumOfMax] {
            prop_assert_eq!(score(&net, rule, gamma), score(&net, rule, gamma));
        }
    }

    #[test]
    fn own_cluster_activity_never_feeds_a_score(instance in instances()) {
        let mut net = build(&instance);
        let shape = *net.shape();
        if shape.cluster_size() < 2 {
            return Ok(());
        }
        // toggling a same-cluster neighbor leaves a fanal's score alone
        let subject = FanalId::new(1, 1);
        let neighbor = FanalId::new(1, 2);
        for rule in [DynamicRule::SumOfSum, DynamicRule::Normalization, DynamicRule::SumOfMax] {
            net.set_active(neighbor, false).unwrap();
            let off = score(&net, rule, 1.0).value(subject);
            net.set_active(neighbor, true).unwrap();
            let on = score(&net, rule, 1.0).value(subject);
            prop_assert!((on - off).abs() <= SCORE_EPS);
        }
    }
}

fn edges_of(net: &Network) -> Vec<bool> {
    let shape = *net.shape();
    let mut out = Vec::new();
    for a in 0..shape.fanal_count() {
        for b in 0..shape.fanal_count() {
            if a != b {
                out.push(net.is_edge(shape.fanal_at(a), shape.fanal_at(b)).unwrap());
            }
        }
    }
    out
}

/// Within-cluster relabeling equivariance of GWsTA: permuting the score map
/// permutes the elected set the same way.
#[test]
fn gwsta_is_equivariant_under_fanal_relabeling() {
    use gbnn::activation::{apply_gwsta, GwstaParams};
    use gbnn::ScoreMap;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let shape = NetworkShape::new(3, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        use rand::Rng;
        let values: Vec<f64> = (0..12).map(|_| rng.gen_range(0..5) as f64).collect();
        // permute fanals within each cluster
        let mut perm: Vec<usize> = (0..12).collect();
        for c in 0..3 {
            perm[c * 4..(c + 1) * 4].shuffle(&mut rng);
        }
        let permuted: Vec<f64> = (0..12).map(|i| values[perm[i]]).collect();

        let alpha = rng.gen_range(1..=12);
        let mut base = Network::new(shape);
        let mut relabeled = Network::new(shape);
        apply_gwsta(&mut base, &ScoreMap::from_values(shape, values), &GwstaParams::new(alpha))
            .unwrap();
        apply_gwsta(
            &mut relabeled,
            &ScoreMap::from_values(shape, permuted),
            &GwstaParams::new(alpha),
        )
        .unwrap();

        let base_active: Vec<bool> =
            (0..12).map(|f| base.is_active(shape.fanal_at(f)).unwrap()).collect();
        for (i, &p) in perm.iter().enumerate() {
            assert_eq!(
                relabeled.is_active(shape.fanal_at(i)).unwrap(),
                base_active[p]
            );
        }
    }
}
