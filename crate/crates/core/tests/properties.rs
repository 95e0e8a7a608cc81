use std::collections::BTreeMap;

use itermine::align::{best_chain, gale_church, SimilarityMatrix};
use itermine::bleu::{corpus_bleu, sentence_bleu, Smoothing};
use itermine::pipeline::{bridge_multiparallel, pairs_to_tsv, run_iteration, IterationConfig};
use itermine::subword::{detokenize, train_unigram, UnigramConfig};
use itermine::synth::{generate, SynthConfig};
use itermine::translate::DictionaryTranslator;
use itermine::{AlignMethod, LangCode, SentencePair};
use proptest::prelude::*;

use LangCode::*;

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec("[a-e]{1,3}", 1..12).prop_map(|w| w.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bleu_of_self_is_100(h in sentence()) {
        let s = sentence_bleu(&h, &h, 4, Smoothing::Exp).unwrap();
        prop_assert!((s.score - 100.0).abs() < 1e-9);
    }

    #[test]
    fn bleu_is_bounded(h in sentence(), r in sentence()) {
        let s = sentence_bleu(&h, &r, 4, Smoothing::Exp).unwrap().score;
        prop_assert!((0.0..=100.0 + 1e-9).contains(&s));
    }

    #[test]
    fn gale_church_tiles(
        s in prop::collection::vec(1usize..300, 0..25),
        t in prop::collection::vec(1usize..300, 0..25),
    ) {
        let path = gale_church(&s, &t).unwrap();
        prop_assert!(path.tiles(s.len(), t.len()));
        prop_assert!(path.cost >= 0.0);
    }

    #[test]
    fn chains_are_monotone(
        (rows, cols, cells) in (1usize..12, 1usize..12)
            .prop_flat_map(|(r, c)| (Just(r), Just(c), prop::collection::vec(0.0f64..1.0, r * c))),
        min in 0.0f64..1.0,
    ) {
        let m = SimilarityMatrix::from_fn(rows, cols, |i, j| cells[i * cols + j]);
        let chain = best_chain(&m, min);
        prop_assert!(chain.windows(2).all(|w| w[0].src < w[1].src && w[0].tgt < w[1].tgt));
        prop_assert!(chain.iter().all(|l| l.score >= min));
    }

    #[test]
    fn bridge_is_symmetric(
        rows in prop::collection::vec((0usize..3, 0usize..4, 0usize..5), 0..30),
    ) {
        let langs = [Hi, Ta, Bn];
        let mut corpora: BTreeMap<LangCode, Vec<SentencePair>> = BTreeMap::new();
        for (l, s, e) in rows {
            corpora.entry(langs[l]).or_default().push(SentencePair {
                src_lang: langs[l],
                tgt_lang: En,
                src_sentence: format!("{}{s}", langs[l]),
                tgt_sentence: format!("e{e}"),
                score: 1.0,
                src_doc: "a".into(),
                tgt_doc: "b".into(),
                method: AlignMethod::Bleualign,
            });
        }
        let table = bridge_multiparallel(&corpora);
        for x in langs {
            prop_assert!(table.get(x, x).is_empty());
            for y in langs {
                let back: std::collections::BTreeSet<_> =
                    table.get(y, x).into_iter().map(|(a, b)| (b, a)).collect();
                prop_assert_eq!(table.get(x, y), back);
            }
        }
    }
}

#[test]
fn corpus_bleu_is_not_mean_of_sentences() {
    let hyps = ["the cat sat on the mat", "a b"];
    let refs = ["the cat sat on the mat", "c d e f g h"];
    let corpus = corpus_bleu(&hyps, &refs, 4, Smoothing::Exp).unwrap().score;
    let mean = hyps
        .iter()
        .zip(refs)
        .map(|(h, r)| sentence_bleu(h, r, 4, Smoothing::Exp).unwrap().score)
        .sum::<f64>()
        / 2.0;
    assert!((corpus - mean).abs() > 1.0, "{corpus} vs {mean}");
}

fn fixture() -> itermine::synth::Fixture {
    generate(&SynthConfig::new(En, vec![Hi, Ur], 60, 12))
}

#[test]
fn lower_thresholds_never_lose_pairs() {
    let fx = fixture();
    let dict = DictionaryTranslator::parse(&fx.dictionary)
        .unwrap()
        .with_noise(0.5, 1);
    let mut last: Option<BTreeMap<LangCode, usize>> = None;
    for t in [0.9, 0.7, 0.51, 0.3, 0.1, 0.0] {
        let mut cfg = IterationConfig::new(En);
        cfg.default_threshold = t;
        let counts = run_iteration(&cfg, &fx.store, &dict, 1, None)
            .unwrap()
            .report
            .doc_pairs_per_lang();
        if let Some(prev) = &last {
            for (lang, n) in &counts {
                assert!(*n >= prev[lang], "{lang} at {t}: {n} < {}", prev[lang]);
            }
        }
        last = Some(counts);
    }
}

#[test]
fn cleaner_translation_never_loses_pairs() {
    let fx = fixture();
    let dict = DictionaryTranslator::parse(&fx.dictionary).unwrap();
    let cfg = IterationConfig::new(En);
    let mut last: Option<BTreeMap<LangCode, usize>> = None;
    for p in [1.0, 0.8, 0.6, 0.4, 0.2, 0.0] {
        let out = run_iteration(&cfg, &fx.store, &dict.clone().with_noise(p, 5), 1, None).unwrap();
        let counts = out.report.doc_pairs_per_lang();
        if let Some(prev) = &last {
            for (lang, n) in &counts {
                assert!(*n >= prev[lang], "{lang} at p={p}");
            }
        }
        if p == 1.0 {
            assert_eq!(out.report.total_doc_pairs, 0);
        }
        last = Some(counts);
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let fx = fixture();
    let dict = DictionaryTranslator::parse(&fx.dictionary)
        .unwrap()
        .with_noise(0.3, 9);
    let cfg = IterationConfig::new(En);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let out = run_iteration(&cfg, &fx.store, &dict, 1, None).unwrap();
                let pairs: Vec<String> = out.corpora.values().map(|p| pairs_to_tsv(p)).collect();
                (out.report.to_json(), pairs)
            })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn segmentation_round_trips_unseen_text() {
    let fx = fixture();
    let text: Vec<&str> = fx
        .store
        .documents(Hi)
        .flat_map(|d| d.sentences.iter().map(String::as_str))
        .collect();
    let vocab = train_unigram(
        Hi,
        &text,
        &UnigramConfig {
            target_size: 500,
            ..Default::default()
        },
    )
    .unwrap();
    for s in ["नया वाक्य zebra 42!", "क", "mixed शब्द and words।", "ঙ অজানা"]
    {
        assert_eq!(detokenize(&vocab.segment(s)), s);
    }
}
