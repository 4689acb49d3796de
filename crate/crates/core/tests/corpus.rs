use std::io::Cursor;

use longtail::corpus::{quantile_boundaries, Bucket, BucketAssignment, ClassStats, CooccurrenceMatrix, Corpus, SplitFractions};
use longtail::synth::SyntheticSpec;

#[test]
fn cooccurrence_joint_counts_are_symmetric() {
    let corpus = SyntheticSpec {
        documents: 800,
        ..Default::default()
    }
    .generate(2)
    .unwrap();
    let m = CooccurrenceMatrix::from_corpus(&corpus);
    let c = m.num_classes();
    for i in 0..c {
        for j in 0..c {
            assert_eq!(m.joint(i, j), m.joint(j, i));
            let p = m.prob(i, j);
            assert!((0.0..=1.0).contains(&p));
            if m.count(j) > 0 {
                // p(i|j) n_j = p(j|i) n_i
                let lhs = p * m.count(j) as f64;
                let rhs = m.prob(j, i) * m.count(i) as f64;
                assert!((lhs - rhs).abs() < 1e-9);
            }
        }
        if m.count(i) > 0 {
            assert_eq!(m.prob(i, i), 1.0);
        }
    }
}

#[test]
fn train_stats_match_hand_count_after_split() {
    let text = (0..10)
        .map(|k| {
            let labels = match k % 3 {
                0 => r#"["a"]"#,
                1 => r#"["a", "b"]"#,
                _ => r#"["c"]"#,
            };
            format!(r#"{{"id": "d{k}", "text": "t{k}", "labels": {labels}}}"#)
        })
        .collect::<Vec<_>>()
        .join("\n");
    let corpus = Corpus::read_jsonl(Cursor::new(text)).unwrap().corpus;
    let (train, val, test) = corpus.split(SplitFractions::default(), 3).unwrap();
    assert_eq!((train.len(), val.len(), test.len()), (8, 1, 1));
    let stats = ClassStats::from_corpus(&train).unwrap();
    let mut hand = vec![0; corpus.num_classes()];
    for d in &train.documents {
        for &l in &d.labels {
            hand[l] += 1;
        }
    }
    assert_eq!(stats.counts, hand);
    assert_eq!(stats.total, 8);
}

#[test]
fn jsonl_round_trip_preserves_corpus() {
    let corpus = SyntheticSpec {
        documents: 200,
        ..Default::default()
    }
    .generate(4)
    .unwrap();
    let mut buf = Vec::new();
    corpus.write_jsonl(&mut buf).unwrap();
    let back = Corpus::read_jsonl(Cursor::new(buf)).unwrap();
    assert_eq!(back.dropped_empty, 0);
    assert_eq!(back.corpus.len(), corpus.len());
    for (a, b) in corpus.documents.iter().zip(&back.corpus.documents) {
        assert_eq!(a.text, b.text);
        let names = |c: &Corpus, d: &[usize]| d.iter().map(|&l| c.vocab.name(l).unwrap().to_owned()).collect::<Vec<_>>();
        let mut x = names(&corpus, &a.labels);
        let mut y = names(&back.corpus, &b.labels);
        x.sort();
        y.sort();
        assert_eq!(x, y);
    }
}

#[test]
fn default_synthetic_corpus_has_three_populated_buckets() {
    let spec = SyntheticSpec::default();
    for seed in 0..3 {
        let corpus = spec.generate(seed).unwrap();
        let stats = ClassStats::from_corpus(&corpus).unwrap();
        let b = BucketAssignment::new(&stats, quantile_boundaries(&stats, 3).unwrap()).unwrap();
        assert!(b.sizes().iter().all(|&n| n > 0));
        for r in spec.head + spec.medium..spec.classes() {
            assert_eq!(spec.declared_bucket(r), Bucket::Tail);
            assert!(stats.counts[r] <= 15, "seed {seed}: tail label {r} has {}", stats.counts[r]);
        }
    }
}
