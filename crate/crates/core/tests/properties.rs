use std::collections::BTreeSet;
use std::path::Path;

use emodist::category::{EmotionCategory, ProbDist};
use emodist::classifiers::{softmax, ClassifierKind, ClassifierParams, MaxFeatures, RandomForest};
use emodist::corpus::{format_corpus, parse_corpus};
use emodist::ensemble::{combine, CombineRule};
use emodist::eval::{compute_metrics, make_folds_indices, stratified_split_indices};
use emodist::features::Vocabulary;
use emodist::labeler::{auto_label, build_auto_corpus, score_text, Document};
use emodist::lexicon::{extract_emojis, strip_emojis, EmojiEntry, Lexicon};
use emodist::preprocess::{
    collapse_repeats, normalize, preprocess, remove_trailing_hashtags, tokenize, PreprocessConfig,
};
use emodist::{train, SparseVector};
use proptest::prelude::*;
use proptest::sample::select;

use EmotionCategory::*;

const ARABIC: &str = "ابتثجحخدذرزسشصضطظعغفقكلمنهويءةىأإآ";

fn category() -> impl Strategy<Value = EmotionCategory> {
    select(EmotionCategory::ALL.to_vec())
}

/// Single-codepoint emojis from the bundled lexicon.
fn simple_emojis() -> Vec<String> {
    Lexicon::bundled()
        .entries()
        .iter()
        .filter(|e| e.codepoints.len() == 1)
        .map(|e| e.as_string())
        .collect()
}

fn simple_lexicon() -> Lexicon {
    let entries = Lexicon::bundled()
        .entries()
        .iter()
        .filter(|e| e.codepoints.len() == 1)
        .cloned()
        .collect();
    Lexicon::from_entries(entries).unwrap()
}

/// Arabic letters, spaces, punctuation, hashtags and emojis, including
/// modifiers and joiners.
fn tweet_text() -> impl Strategy<Value = String> {
    let mut pieces: Vec<String> = ARABIC.chars().map(String::from).collect();
    pieces.extend(simple_emojis());
    for s in [
        " ", " ", " ", "#", "_", "!", ".", "،", "ـ", "\u{064E}", "\u{200D}", "\u{FE0F}",
        "\u{1F3FD}", "😤\u{200D}💨", "👨\u{200D}👩\u{200D}👧", "a", "7",
    ] {
        pieces.push(s.to_string());
    }
    prop::collection::vec(select(pieces), 0..40).prop_map(|v| v.concat())
}

/// Text over Arabic letters and spaces only.
fn arabic_text() -> impl Strategy<Value = String> {
    let mut chars: Vec<char> = ARABIC.chars().collect();
    chars.extend([' ', ' ', 'ـ', '\u{064F}']);
    prop::collection::vec(select(chars), 0..60).prop_map(|v| v.into_iter().collect())
}

fn prob_dist() -> impl Strategy<Value = ProbDist> {
    prop::array::uniform4(0u32..=100).prop_filter_map("all zero", |w| {
        let s: u32 = w.iter().sum();
        (s > 0).then(|| ProbDist::from_weights(w.map(f64::from)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn strip_leaves_nothing_to_extract(text in tweet_text()) {
        let lex = Lexicon::bundled();
        let stripped = strip_emojis(&text, &lex);
        prop_assert!(extract_emojis(&stripped, &lex).is_empty());
    }

    #[test]
    fn text_without_emojis_is_untouched_by_strip(text in arabic_text()) {
        prop_assert_eq!(strip_emojis(&text, &Lexicon::bundled()), text);
    }

    #[test]
    fn reversing_text_reverses_occurrences(
        parts in prop::collection::vec(
            prop_oneof![select(simple_emojis()), arabic_text()], 0..12)
    ) {
        let lex = simple_lexicon();
        let text: String = parts.concat();
        let reversed: String = text.chars().rev().collect();
        let mut forward: Vec<String> =
            extract_emojis(&text, &lex).iter().map(|e| e.as_string()).collect();
        let backward: Vec<String> =
            extract_emojis(&reversed, &lex).iter().map(|e| e.as_string()).collect();
        forward.reverse();
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn lexicon_tsv_round_trips(
        rows in prop::collection::btree_map(
            prop::collection::vec(select(simple_emojis()), 1..3).prop_map(|v| v.concat()),
            (category(), 1i8..=5),
            0..20)
    ) {
        let entries: Vec<EmojiEntry> = rows
            .iter()
            .map(|(e, (c, s))| {
                let score = if *c == Joy { *s } else { -*s };
                EmojiEntry::new(e.chars().collect(), *c, score).unwrap()
            })
            .collect();
        let lex = Lexicon::from_entries(entries).unwrap();
        let again = Lexicon::parse(&lex.to_tsv(), Path::new("mem")).unwrap();
        prop_assert_eq!(&again, &lex);
        prop_assert_eq!(again.to_tsv(), lex.to_tsv());
    }

    #[test]
    fn collapse_repeats_is_idempotent(text in tweet_text()) {
        let once = collapse_repeats(&text);
        prop_assert_eq!(collapse_repeats(&once), once.clone());
        let chars: Vec<char> = once.chars().collect();
        prop_assert!(chars.windows(3).all(|w| !(w[0] == w[1] && w[1] == w[2])));
    }

    #[test]
    fn normalize_is_idempotent_and_never_grows(text in tweet_text()) {
        let once = normalize(&text);
        prop_assert_eq!(normalize(&once), once.clone());
        prop_assert!(once.chars().count() <= text.chars().count());
    }

    #[test]
    fn inner_hashtags_keep_their_words(
        words in prop::collection::vec(
            (any::<bool>(), prop::collection::vec("[ب-غ]{1,4}", 1..3)), 1..8)
    ) {
        let tokens: Vec<String> = words
            .iter()
            .map(|(tag, parts)| if *tag { format!("#{}", parts.join("_")) } else { parts.join("") })
            .collect();
        let text = tokens.join(" ");
        let out = remove_trailing_hashtags(&text);
        let out_words: Vec<&str> = out.split_whitespace().collect();
        let trailing_start = tokens
            .iter()
            .rposition(|t| !t.starts_with('#'))
            .map_or(0, |i| i + 1);
        for (tag, parts) in &words[..trailing_start] {
            if *tag {
                for p in parts {
                    prop_assert!(out_words.contains(&p.as_str()), "{} lost from {}", p, text);
                }
            }
        }
    }

    #[test]
    fn pipeline_with_every_step_off_is_tokenize(text in tweet_text()) {
        prop_assert_eq!(preprocess(&text, &PreprocessConfig::disabled()), tokenize(&text));
    }

    #[test]
    fn no_step_produces_an_empty_token(text in tweet_text()) {
        for cfg in [PreprocessConfig::default(), PreprocessConfig::disabled()] {
            for t in preprocess(&text, &cfg) {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_whitespace));
            }
        }
    }

    /// Idempotence holds once normalization cannot create new letter runs
    /// (no alef variants or tatweel) and stems are not restemmed.
    #[test]
    fn preprocess_without_stemming_is_idempotent(
        text in prop::collection::vec(
            select("ابتثجحخدذرزسشصضطعغفقكلمنهوي #_!".chars().collect::<Vec<_>>()), 0..60)
            .prop_map(|v| v.into_iter().collect::<String>())
    ) {
        let mut cfg = PreprocessConfig::default();
        cfg.light_stem = false;
        let once = preprocess(&text, &cfg);
        prop_assert_eq!(preprocess(&once.join(" "), &cfg), once);
    }

    #[test]
    fn emoji_order_never_changes_scores(
        emojis in prop::collection::vec(select(simple_emojis()), 1..8),
        seed in any::<u64>()
    ) {
        let lex = Lexicon::bundled();
        let mut shuffled = emojis.clone();
        shuffled.reverse();
        shuffled.rotate_left((seed % emojis.len() as u64) as usize);
        prop_assert_eq!(score_text(&emojis.join(" x "), &lex), score_text(&shuffled.concat(), &lex));
    }

    #[test]
    fn appending_an_emoji_only_raises_its_category(
        emojis in prop::collection::vec(select(simple_emojis()), 0..6),
        extra in select(simple_emojis())
    ) {
        let lex = Lexicon::bundled();
        let before = score_text(&emojis.concat(), &lex);
        let after = score_text(&format!("{}{extra}", emojis.concat()), &lex);
        let c = lex.get(&extra).unwrap().category;
        for k in EmotionCategory::ALL {
            if k == c {
                prop_assert!(after.get(k) > before.get(k));
            } else {
                prop_assert_eq!(after.get(k), before.get(k));
            }
        }
    }

    #[test]
    fn strict_leader_wins_for_every_seed(
        emojis in prop::collection::vec(select(simple_emojis()), 1..6),
        seed in any::<u64>()
    ) {
        let lex = Lexicon::bundled();
        let doc = Document::unlabeled("d", emojis.concat());
        let table = score_text(&doc.raw_text, &lex);
        let leaders = table.leaders();
        let label = auto_label(&doc, &lex, seed).unwrap();
        prop_assert!(leaders.contains(&label));
        if leaders.len() == 1 {
            prop_assert_eq!(label, leaders[0]);
        }
    }

    #[test]
    fn auto_corpus_has_no_emojis_and_is_reproducible(
        texts in prop::collection::vec(tweet_text(), 0..12),
        seed in any::<u64>(),
        single in any::<bool>()
    ) {
        let lex = Lexicon::bundled();
        let docs: Vec<Document> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document::unlabeled(format!("d{i}"), t.clone()))
            .collect();
        let out = build_auto_corpus(&docs, &lex, seed, single);
        for d in &out {
            prop_assert!(extract_emojis(&d.raw_text, &lex).is_empty());
            prop_assert!(d.auto_label.is_some());
        }
        let again = build_auto_corpus(&docs, &lex, seed, single);
        prop_assert_eq!(format_corpus(&out), format_corpus(&again));
    }

    #[test]
    fn tfidf_vectors_are_unit_nonnegative_and_order_free(
        docs in prop::collection::vec(prop::collection::vec("[a-f]{1,2}", 0..10), 1..8),
        pick in any::<prop::sample::Index>()
    ) {
        let vocab = Vocabulary::fit(&docs, 1).unwrap();
        for d in &docs {
            let v = vocab.transform(d);
            prop_assert_eq!(v.dim(), vocab.len());
            prop_assert!(v.entries().iter().all(|&(i, w)| w > 0.0 && (i as usize) < vocab.len()));
            let norm = v.norm();
            prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-9);
            prop_assert_eq!(v.is_empty(), d.is_empty());
            let mut rev = d.clone();
            rev.reverse();
            prop_assert_eq!(vocab.transform(&rev), v);
        }
        let d = pick.get(&docs);
        let mut with_oov = d.clone();
        with_oov.push("zzz".into());
        prop_assert_eq!(vocab.transform(&with_oov), vocab.transform(d));
    }

    #[test]
    fn combine_is_order_invariant(dists in prop::collection::vec(prob_dist(), 1..6), rot in 0usize..6) {
        let mut other = dists.clone();
        other.reverse();
        let len = other.len();
        other.rotate_left(rot % len);
        for rule in CombineRule::ALL {
            prop_assert_eq!(combine(&dists, rule).unwrap(), combine(&other, rule).unwrap());
        }
    }

    #[test]
    fn unanimous_winner_is_chosen_by_every_rule(
        c in category(),
        raw in prop::collection::vec(prop::array::uniform4(1u32..50), 1..5)
    ) {
        // make class c strictly largest in every distribution
        let dists: Vec<ProbDist> = raw
            .iter()
            .map(|w| {
                let mut w = w.map(f64::from);
                let top = w.iter().cloned().fold(0.0, f64::max);
                w[c.index()] = top + 1.0;
                ProbDist::from_weights(w)
            })
            .collect();
        for rule in CombineRule::ALL {
            prop_assert_eq!(combine(&dists, rule).unwrap().label, c);
        }
    }

    #[test]
    fn single_distribution_is_identity(d in prob_dist()) {
        for rule in CombineRule::ALL {
            prop_assert_eq!(combine(&[d], rule).unwrap().label, d.argmax());
        }
    }

    #[test]
    fn zero_probability_zeroes_the_product(
        dists in prop::collection::vec(prob_dist(), 1..5),
        c in category(),
        at in any::<prop::sample::Index>()
    ) {
        let mut dists = dists;
        let i = at.index(dists.len());
        let mut w = dists[i].0;
        w[c.index()] = 0.0;
        if w.iter().sum::<f64>() > 0.0 {
            dists[i] = ProbDist::from_weights(w);
            prop_assert_eq!(combine(&dists, CombineRule::Product).unwrap().scores[c.index()], 0.0);
        }
    }

    #[test]
    fn split_sizes_round_per_class(
        counts in prop::array::uniform4(2usize..60),
        frac in 0.05f64..0.95,
        seed in any::<u64>()
    ) {
        let labels: Vec<EmotionCategory> = EmotionCategory::ALL
            .iter()
            .flat_map(|&c| std::iter::repeat_n(c, counts[c.index()]))
            .collect();
        let (train, test) = stratified_split_indices(&labels, frac, seed).unwrap();
        for c in EmotionCategory::ALL {
            let n = test.iter().filter(|&&i| labels[i] == c).count();
            prop_assert_eq!(n, (counts[c.index()] as f64 * frac).round() as usize);
        }
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        prop_assert_eq!(stratified_split_indices(&labels, frac, seed).unwrap(), (train, test));
    }

    #[test]
    fn folds_partition_and_stay_stratified(
        counts in prop::array::uniform4(5usize..80),
        k in 2usize..6,
        seed in any::<u64>()
    ) {
        let labels: Vec<EmotionCategory> = EmotionCategory::ALL
            .iter()
            .flat_map(|&c| std::iter::repeat_n(c, counts[c.index()]))
            .collect();
        let plan = make_folds_indices(&labels, k, seed).unwrap();
        prop_assert_eq!(plan.len(), k);
        let mut seen = vec![0; labels.len()];
        for f in &plan.folds {
            prop_assert_eq!(f.train.len() + f.test.len(), labels.len());
            for &i in &f.test {
                seen[i] += 1;
            }
            for c in EmotionCategory::ALL {
                let n = f.test.iter().filter(|&&i| labels[i] == c).count() as f64;
                let expected = counts[c.index()] as f64 / k as f64;
                prop_assert!((n - expected).abs() <= 1.0);
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn metric_identities(pairs in prop::collection::vec((category(), category()), 1..60)) {
        let (gold, pred): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let m = compute_metrics(&gold, &pred).unwrap();
        prop_assert_eq!(m.total(), gold.len() as u64);
        prop_assert!((m.weighted_recall - m.accuracy).abs() < 1e-12);
        for c in &m.per_class {
            for v in [c.precision, c.recall, c.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let h = if c.precision + c.recall == 0.0 {
                0.0
            } else {
                2.0 * c.precision * c.recall / (c.precision + c.recall)
            };
            prop_assert!((c.f1 - h).abs() < 1e-12);
        }
    }

    #[test]
    fn corpus_files_round_trip(
        rows in prop::collection::vec(
            (prop::option::of(category()), any::<bool>(), "[^\t\n\r]{0,20}[ء-ي😊]"), 0..20)
    ) {
        let docs: Vec<Document> = rows
            .iter()
            .enumerate()
            .map(|(i, (label, auto, text))| match (label, auto) {
                (None, _) => Document::unlabeled(format!("id{i}"), text.clone()),
                (Some(l), false) => Document::manual(format!("id{i}"), text.clone(), *l),
                (Some(l), true) => Document {
                    auto_label: Some(*l),
                    gold_label: None,
                    provenance: emodist::Provenance::Auto,
                    ..Document::unlabeled(format!("id{i}"), text.clone())
                },
            })
            .collect();
        let text = format_corpus(&docs);
        let back = parse_corpus(&text, Path::new("mem")).unwrap();
        prop_assert_eq!(&back, &docs);
        prop_assert_eq!(format_corpus(&back), text);
    }
}

fn random_dataset(
    rows: &[(Vec<(u32, u8)>, EmotionCategory)],
    dim: usize,
) -> (Vec<SparseVector>, Vec<EmotionCategory>) {
    let x = rows
        .iter()
        .map(|(pairs, _)| {
            SparseVector::from_pairs(dim, pairs.iter().map(|&(j, v)| (j, f64::from(v))).collect())
                .unwrap()
                .l2_normalized()
        })
        .collect();
    (x, rows.iter().map(|r| r.1).collect())
}

fn dataset() -> impl Strategy<Value = Vec<(Vec<(u32, u8)>, EmotionCategory)>> {
    prop::collection::vec(
        (prop::collection::vec((0u32..12, 1u8..5), 0..6), category()),
        2..30,
    )
    .prop_filter("needs two classes", |rows| {
        rows.iter().map(|r| r.1).collect::<BTreeSet<_>>().len() >= 2
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn every_classifier_outputs_valid_distributions(
        rows in dataset(),
        probes in prop::collection::vec(prop::collection::vec((0u32..12, 1u8..5), 0..6), 1..8),
        seed in any::<u64>()
    ) {
        let (x, y) = random_dataset(&rows, 12);
        let params = ClassifierParams { rf_trees: 8, svm_epochs: 3, ..ClassifierParams::default() };
        for kind in ClassifierKind::ALL {
            let model = train(kind, &x, &y, 12, &params, seed).unwrap();
            let again = train(kind, &x, &y, 12, &params, seed).unwrap();
            prop_assert_eq!(&model, &again);
            for p in &probes {
                let v = SparseVector::from_pairs(12, p.iter().map(|&(j, w)| (j, f64::from(w))).collect())
                    .unwrap()
                    .l2_normalized();
                let d = model.predict_proba(&v).unwrap();
                prop_assert!(d.is_valid(), "{kind}: {d:?}");
            }
        }
    }

    #[test]
    fn forest_trees_give_distributions(rows in dataset(), seed in any::<u64>()) {
        let (x, y) = random_dataset(&rows, 12);
        let rf = RandomForest::fit(&x, &y, 12, 6, MaxFeatures::Sqrt, seed).unwrap();
        prop_assert!(rf.is_well_formed());
        for xi in &x {
            for t in rf.trees() {
                let p = t.predict_proba(xi);
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }

    #[test]
    fn scaling_margins_keeps_the_argmax(m in prop::array::uniform4(-20.0f64..20.0), k in 0.01f64..100.0) {
        prop_assert_eq!(softmax(m).argmax(), softmax(m.map(|v| v * k)).argmax());
    }
}
