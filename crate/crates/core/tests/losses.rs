use longtail::corpus::ClassStats;
use longtail::losses::{loss_and_grad, weight_matrix, Batch, LossCache, LossKind, LossSpec};
use longtail::Matrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const B: usize = 8;
const C: usize = 12;

fn random_case(seed: u64) -> (Matrix<f64>, Vec<Vec<usize>>, ClassStats) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Matrix::from_fn(B, C, |_, _| rng.gen_range(-4.0..4.0));
    let positives = (0..B)
        .map(|_| {
            let mut row: Vec<usize> = (0..C).filter(|_| rng.gen_bool(0.25)).collect();
            if row.is_empty() {
                row.push(rng.gen_range(0..C));
            }
            row
        })
        .collect();
    let counts = (0..C).map(|_| rng.gen_range(1..400)).collect();
    (z, positives, ClassStats::from_counts(counts, 1000).unwrap())
}

fn evaluate(spec: &LossSpec<f64>, z: &Matrix<f64>, pos: &[Vec<usize>], stats: &ClassStats) -> (f64, Matrix<f64>) {
    let cache = LossCache::build(stats, spec).unwrap();
    let batch = Batch::new(z.clone(), pos.to_vec()).unwrap();
    let r = loss_and_grad(spec, &batch, &cache).unwrap();
    (r.value, r.grad)
}

#[test]
fn analytic_gradients_match_central_differences() {
    // Relative error with a floor on the denominator: the mean over 96
    // entries puts typical gradient entries near 1e-3, and entries under
    // 1e-6 are dominated by the rounding error of the summed loss.
    const H: f64 = 1e-5;
    const FLOOR: f64 = 1e-6;
    const TOL: f64 = 1e-4;
    for kind in LossKind::ALL {
        let spec = LossSpec::new(kind);
        let mut worst = 0.0f64;
        for seed in 0..100 {
            let (z, pos, stats) = random_case(seed);
            let (_, grad) = evaluate(&spec, &z, &pos, &stats);
            for k in 0..B {
                for i in 0..C {
                    let mut plus = z.clone();
                    plus.set(k, i, z.get(k, i) + H);
                    let mut minus = z.clone();
                    minus.set(k, i, z.get(k, i) - H);
                    let numeric = (evaluate(&spec, &plus, &pos, &stats).0 - evaluate(&spec, &minus, &pos, &stats).0) / (2.0 * H);
                    let analytic = grad.get(k, i);
                    let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR);
                    worst = worst.max(rel);
                }
            }
        }
        assert!(worst < TOL, "{kind}: max relative error {worst:e}");
    }
}

fn assert_same(a: &LossSpec<f64>, b: &LossSpec<f64>, what: &str) {
    for seed in 0..20 {
        let (z, pos, stats) = random_case(seed);
        let (va, ga) = evaluate(a, &z, &pos, &stats);
        let (vb, gb) = evaluate(b, &z, &pos, &stats);
        assert!((va - vb).abs() <= 1e-12, "{what}: value {va} vs {vb}");
        assert!(ga.max_abs_diff(&gb).unwrap() <= 1e-12, "{what}: gradient differs");
    }
}

#[test]
fn reduction_identities() {
    let base = LossSpec::<f64>::default();
    let with = |kind: LossKind, f: &dyn Fn(&mut LossSpec<f64>)| {
        let mut s = base.with_kind(kind);
        f(&mut s);
        s
    };
    assert_same(
        &with(LossKind::Fl, &|s| s.gamma = 0.0),
        &with(LossKind::Bce, &|_| {}),
        "FL(gamma=0) = BCE",
    );
    assert_same(
        &with(LossKind::Cb, &|s| s.beta_cb = 0.0),
        &with(LossKind::Fl, &|_| {}),
        "CB(beta=0) = FL",
    );
    assert_same(
        &with(LossKind::NtrFl, &|s| {
            s.lambda = 1.0;
            s.kappa = 0.0
        }),
        &with(LossKind::Fl, &|_| {}),
        "NTR-FL(lambda=1, kappa=0) = FL",
    );
    assert_same(
        &with(LossKind::Db, &|s| {
            s.lambda = 1.0;
            s.kappa = 0.0
        }),
        &with(LossKind::RFl, &|_| {}),
        "DB(lambda=1, kappa=0) = R-FL",
    );
    assert_same(
        &with(LossKind::Db0Fl, &|_| {}),
        &with(LossKind::Db, &|s| s.gamma = 0.0),
        "DB-0FL = DB(gamma=0)",
    );
    assert_same(
        &with(LossKind::CbNtr, &|s| s.beta_cb = 0.0),
        &with(LossKind::NtrFl, &|_| {}),
        "CB-NTR(r_cb=1) = NTR-FL",
    );
}

/// Direct transcription of the per-entry terms with naive sigmoid and logs.
fn naive_term(y: bool, z: f64, w: f64, gamma: f64, lambda: f64, v: f64) -> f64 {
    let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
    if y {
        let q = sig(z - v);
        -w * (1.0 - q).powf(gamma) * q.ln()
    } else {
        let q = sig(lambda * (z - v));
        -(w / lambda) * q.powf(gamma) * (1.0 - q).ln()
    }
}

#[test]
fn values_match_naive_formula() {
    for kind in LossKind::ALL {
        let spec = LossSpec::new(kind);
        for seed in 0..10 {
            let (z, pos, stats) = random_case(seed);
            let cache = LossCache::build(&stats, &spec).unwrap();
            let batch = Batch::new(z.clone(), pos.clone()).unwrap();
            let w = weight_matrix(&spec, &batch, &cache).unwrap();
            let lambda = if kind.uses_ntr() { spec.lambda } else { 1.0 };
            let mut expected = 0.0;
            for k in 0..B {
                for i in 0..C {
                    let y = pos[k].contains(&i);
                    expected += naive_term(y, z.get(k, i), w.get(k, i), spec.effective_gamma(), lambda, cache.v[i]);
                }
            }
            expected /= (B * C) as f64;
            let got = loss_and_grad(&spec, &batch, &cache).unwrap().value;
            assert!((got - expected).abs() < 1e-12, "{kind}: {got} vs {expected}");
        }
    }
}

#[test]
fn raw_db_weights_sum_to_one_over_positives() {
    use longtail::losses::compute_r_db;
    for seed in 0..50 {
        let (_, pos, stats) = random_case(seed);
        for row in &pos {
            let r: Vec<f64> = compute_r_db(row, &stats.counts).unwrap();
            let s: f64 = row.iter().map(|&i| r[i]).sum();
            assert!((s - 1.0).abs() <= 1e-12, "sum {s}");
        }
    }
}

fn single_entry(kind: LossKind, y: bool, z: f64) -> (f64, f64) {
    let spec = LossSpec::new(kind);
    let stats = ClassStats::from_counts(vec![5, 300], 400).unwrap();
    let cache = LossCache::build(&stats, &spec).unwrap();
    let pos = if y { vec![0] } else { vec![1] };
    let batch = Batch::new(Matrix::from_vec(1, 2, vec![z, 0.0]).unwrap(), vec![pos]).unwrap();
    // The second entry is held fixed, so the total moves only with `z`.
    let r = loss_and_grad(&spec, &batch, &cache).unwrap();
    (r.value, r.grad.get(0, 0))
}

fn kind_strategy() -> impl Strategy<Value = LossKind> {
    prop::sample::select(LossKind::ALL.to_vec())
}

proptest! {
    #[test]
    fn loss_is_nonnegative_and_gradient_finite(kind in kind_strategy(), seed in 0u64..1000, scale in 1.0f64..125.0) {
        let (z, pos, stats) = random_case(seed);
        let z = z.map(|x| x * scale);
        let (value, grad) = evaluate(&LossSpec::new(kind), &z, &pos, &stats);
        prop_assert!(value >= 0.0 && value.is_finite());
        prop_assert!(grad.all_finite());
    }

    #[test]
    fn positive_entries_decrease_and_negative_entries_increase_in_z(kind in kind_strategy(), a in -30.0f64..30.0, d in 0.01f64..5.0) {
        let (lo_p, g_p) = single_entry(kind, true, a);
        let (hi_p, _) = single_entry(kind, true, a + d);
        prop_assert!(hi_p <= lo_p, "positive term rose: {lo_p} -> {hi_p}");
        prop_assert!(g_p <= 0.0);
        let (lo_n, g_n) = single_entry(kind, false, a);
        let (hi_n, _) = single_entry(kind, false, a + d);
        prop_assert!(hi_n >= lo_n, "negative term fell: {lo_n} -> {hi_n}");
        prop_assert!(g_n >= 0.0);
    }
}

#[test]
fn extreme_logits_stay_finite() {
    for kind in LossKind::ALL {
        for &z in &[-500.0, -40.0, 0.0, 40.0, 500.0] {
            for y in [true, false] {
                let (v, g) = single_entry(kind, y, z);
                assert!(v.is_finite() && g.is_finite(), "{kind} y={y} z={z}");
            }
        }
    }
}

#[test]
fn f32_agrees_with_f64() {
    let (z, pos, stats) = random_case(3);
    for kind in LossKind::ALL {
        let (v64, g64) = evaluate(&LossSpec::new(kind), &z, &pos, &stats);
        let spec32 = LossSpec::<f32>::new(kind);
        let cache = LossCache::build(&stats, &spec32).unwrap();
        let z32 = Matrix::from_fn(B, C, |k, i| z.get(k, i) as f32);
        let r = loss_and_grad(&spec32, &Batch::new(z32, pos.clone()).unwrap(), &cache).unwrap();
        assert!((r.value as f64 - v64).abs() < 1e-5 * v64.max(1.0), "{kind}");
        for k in 0..B {
            for i in 0..C {
                assert!((r.grad.get(k, i) as f64 - g64.get(k, i)).abs() < 1e-5);
            }
        }
    }
}
