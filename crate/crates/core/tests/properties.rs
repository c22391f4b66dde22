use cat_core::attribution::AttributionMethod;
use cat_core::model::{
    AttributeScoreVector, ClassDistribution, KeywordAttribute, KeywordAttributeScorer, KeywordClassifier, KeywordRule,
    StaticFiller,
};
use cat_core::objective::{attribute_deltas, cat_objective, HyperParams, ObjectiveBreakdown, Scored};
use cat_core::reference::{max_negatives, subsample_negatives};
use cat_core::search::{run_search, SearchBackends};
use cat_core::text::{apply_edit, apply_edits, levenshtein_slices, tokenize, word_levenshtein, Edit, TokenizedText};
use proptest::prelude::*;

fn words() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(String::from), 0..8)
}

fn text() -> impl Strategy<Value = TokenizedText> {
    prop::collection::vec("[a-e]{1,3}", 1..8).prop_map(|w| TokenizedText::from_words(w).unwrap())
}

fn probs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|p| p / s).collect()
    })
}

proptest! {
    #[test]
    fn levenshtein_is_a_metric(a in words(), b in words(), c in words()) {
        let ab = levenshtein_slices(&a, &b);
        prop_assert_eq!(ab, levenshtein_slices(&b, &a));
        prop_assert_eq!(levenshtein_slices(&a, &a), 0);
        prop_assert!(ab <= levenshtein_slices(&a, &c) + levenshtein_slices(&c, &b));
        prop_assert!(ab >= a.len().abs_diff(b.len()));
        prop_assert!(ab <= a.len().max(b.len()));
    }

    #[test]
    fn one_edit_moves_distance_by_at_most_one(x in text(), pos in 0usize..8, w in "[a-e]{1,3}", kind in 0u8..3) {
        let edit = match kind {
            0 => Edit::substitute(pos % x.len(), x.words()[pos % x.len()].clone(), w),
            1 => Edit::insert(pos % (x.len() + 1), w),
            _ => Edit::delete(pos % x.len(), x.words()[pos % x.len()].clone()),
        };
        if let Ok(y) = apply_edit(&x, &edit) {
            prop_assert!(word_levenshtein(&x, &y) <= 1);
        }
    }

    #[test]
    fn tokenize_is_idempotent(s in "\\PC{0,40}") {
        if let Ok(x) = tokenize(&s) {
            let y = tokenize(&x.joined()).unwrap();
            prop_assert_eq!(y.words(), x.words());
        }
    }

    #[test]
    fn breakdown_total_is_its_weighted_parts(
        linf in 0.0f64..1.0, count in 0usize..10, gain in -1.0f64..1.0, lm in -20.0f64..0.0, lev in 0usize..6,
        lambda in 0.0f64..10.0, beta in 0.0f64..5.0,
    ) {
        let p = HyperParams { lambda, beta, ..HyperParams::default() };
        let b = ObjectiveBreakdown::from_parts(linf, count, gain, lm, lev, &p);
        let direct = linf - beta * count as f64 + lambda * gain + p.eta * lm - p.nu * lev as f64;
        prop_assert!((b.total - direct).abs() <= 1e-12);
    }

    #[test]
    fn objective_parts_follow_their_definitions(q in probs(3), r in probs(3), y in 0usize..3, lm in -5.0f64..0.0) {
        let labels: Vec<String> = ["x", "y", "z"].map(String::from).to_vec();
        let names = vec!["a".to_string()];
        let x = tokenize("one two").unwrap();
        let xp = tokenize("one three").unwrap();
        let a = AttributeScoreVector::new(vec![0.2], names.clone(), vec![0.3]).unwrap();
        let ap = AttributeScoreVector::new(vec![0.6], names, vec![0.3]).unwrap();
        let input = ClassDistribution::new(q, labels.clone()).unwrap();
        let params = HyperParams::default();
        let score = |d: &ClassDistribution| cat_objective(
            Scored { text: &x, dist: &input, attrs: &a },
            Scored { text: &xp, dist: d, attrs: &ap },
            y, lm, &params,
        ).unwrap();
        let c = ClassDistribution::new(r, labels).unwrap();
        let b = score(&c);
        prop_assert_eq!(b.attr_changed_count, 1);
        prop_assert!((b.attr_linf - 0.4).abs() < 1e-12);
        let other_max = (0..3).filter(|j| *j != y).map(|j| c.prob(j)).fold(0.0, f64::max);
        prop_assert!((b.contrast_gain - (other_max - input.prob(y))).abs() < 1e-15);
    }

    #[test]
    fn deltas_are_reported_past_the_threshold_only(before in prop::collection::vec(0.0f64..1.0, 1..6), shift in prop::collection::vec(-1.0f64..1.0, 6)) {
        let n = before.len();
        let names: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
        let after: Vec<f64> = before.iter().zip(&shift).map(|(b, s)| (b + s).clamp(0.0, 1.0)).collect();
        let vec = |s: Vec<f64>| AttributeScoreVector::new(s, names.clone(), vec![0.3; n]).unwrap();
        let deltas = attribute_deltas(&vec(before.clone()), &vec(after.clone())).unwrap();
        let expected = before.iter().zip(&after).filter(|(b, a)| (*a - *b).abs() > 0.3).count();
        prop_assert_eq!(deltas.len(), expected);
    }

    #[test]
    fn negative_cap_is_tight(p in 0usize..300, cap in 0.05f64..1.0) {
        let n = max_negatives(p, cap);
        prop_assert!(n as f64 <= cap * (p + n) as f64);
        prop_assert!((n + 1) as f64 > cap * (p + n + 1) as f64);
    }

    #[test]
    fn subsampling_keeps_positives_and_negative_order(p in 0usize..50, n in 0usize..200, seed: u64) {
        let pos: Vec<usize> = (0..p).collect();
        let neg: Vec<usize> = (1000..1000 + n).collect();
        let out = subsample_negatives(&pos, &neg, 0.8, seed);
        prop_assert_eq!(&out[..p], &pos[..]);
        prop_assert!(out[p..].windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(&out, &subsample_negatives(&pos, &neg, 0.8, seed));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn search_results_are_flipped_and_replayable(ws in prop::collection::vec(prop::sample::select(vec!["good", "bad", "fine", "meal", "the"]), 1..5)) {
        let classifier = KeywordClassifier::new(
            vec!["neg".into(), "pos".into()],
            vec![
                KeywordRule { word: "good".into(), label: "pos".into(), confidence: 0.9 },
                KeywordRule { word: "bad".into(), label: "neg".into(), confidence: 0.9 },
            ],
            None,
        ).unwrap();
        let attributes = KeywordAttributeScorer::new(vec![KeywordAttribute {
            name: "taste".into(),
            keywords: vec!["meal".into(), "fine".into()],
            tau: 0.3,
        }]).unwrap();
        let filler = StaticFiller::new([("good", -1.0), ("bad", -1.5), ("fine", -2.0), ("meal", -2.5)]);
        let backends = SearchBackends { classifier: &classifier, attributes: &attributes, filler: &filler };
        let x = TokenizedText::from_words(ws).unwrap();
        let outcome = run_search(&x, backends, AttributionMethod::Occlusion, &HyperParams::default()).unwrap();
        for c in &outcome.flipped {
            prop_assert_ne!(c.dist.argmax(), outcome.predicted);
            let replayed = apply_edits(&x, &c.path).unwrap();
            prop_assert_eq!(replayed.words(), c.text.words());
            prop_assert!(c.path.len() <= 3);
        }
        if let Some(best) = &outcome.best {
            prop_assert!(outcome.flipped.iter().all(|c| c.breakdown.total <= best.breakdown.total));
        }
    }
}
