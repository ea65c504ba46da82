//! Acceptance criteria, one pass/fail line each. Runs under a plain `main`
//! so the lines appear in `cargo test` output.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use tbsa::corpus::{
    load_embeddings, parse_conll, sentiment_counts, split_dev, synthetic, Dataset, OpinionLexicon,
    Sentence, Vocabulary,
};
use tbsa::evaluator::{evaluate_corpus, exact_match, Counts, Prf};
use tbsa::experiment::{run_config, sweep, SweepGrid, Variant, DEFAULT_WINDOWS};
use tbsa::model::checkpoint::Checkpoint;
use tbsa::model::{boundary_confidence, Model, ModelConfig, ParamId};
use tbsa::numcore::AdamState;
use tbsa::tagscheme::{
    decode_unified, encode_unified, transition_mask, validate_spans, BoundaryTag, Sentiment,
    TargetSpan, UnifiedTag,
};
use tbsa::trainer::{grad_check, instances, train, TrainConfig};
use tbsa::{seeded_rng, Model64, SeededRng};

type Outcome = Result<String, String>;
type Criterion = Box<dyn Fn() -> Option<Outcome>>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn synthetic_model(config: ModelConfig, vocab: &Vocabulary) -> Model64 {
    let table = load_embeddings(None, vocab, config.embedding_dim, 7).unwrap();
    Model::new(config, table).unwrap()
}

fn synthetic_vocab(d: &Dataset) -> Vocabulary {
    Vocabulary::from_sentences([d.train.as_slice(), d.dev.as_slice()])
}

/// Widths and rate used for the overfit runs.
fn overfit_config() -> (ModelConfig, TrainConfig) {
    (
        ModelConfig {
            embedding_dim: 24,
            boundary_hidden: 48,
            unified_hidden: 48,
            ..ModelConfig::default()
        },
        TrainConfig {
            epochs: 200,
            learning_rate: 0.01,
            ..TrainConfig::default()
        },
    )
}

fn small_config() -> ModelConfig {
    ModelConfig {
        embedding_dim: 8,
        boundary_hidden: 8,
        unified_hidden: 8,
        ..ModelConfig::default()
    }
}

// 1 ---------------------------------------------------------------------------

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let d = synthetic::dataset().unwrap();
    let lex = synthetic::lexicon();
    let config = ModelConfig {
        embedding_dim: 4,
        boundary_hidden: 4,
        unified_hidden: 4,
        ..ModelConfig::default()
    };
    let model = synthetic_model(config, &synthetic_vocab(&d));
    let mut worst: f64 = 0.0;
    for sentence in [&d.train[2], &d.train[12], &d.train[19]] {
        let inst = model.instance(sentence, Some(&lex)).map_err(|e| e.to_string())?;
        let report = grad_check(&model, &inst, 1e-4).map_err(|e| e.to_string())?;
        check(report.groups.len() == ParamId::ALL.len(), || "missing parameter groups".into())?;
        if !report.passed() {
            let g = report
                .groups
                .iter()
                .max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error))
                .unwrap();
            return Err(format!("{}: rel error {:.3e} on `{}`", sentence.id, g.max_rel_error, g.name));
        }
        worst = worst.max(report.max_rel_error());
    }
    let t = start.elapsed();
    check(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!("max rel error {worst:.2e} < 1e-4 over all {} groups, {t:.1?}", ParamId::ALL.len()))
}

// 2 ---------------------------------------------------------------------------

fn transition_invariants() -> Outcome {
    let d = synthetic::dataset().unwrap();
    let lex = synthetic::lexicon();
    let mut model = synthetic_model(small_config(), &synthetic_vocab(&d));
    let mask = transition_mask();

    let w = model.transition().realize();
    for b in BoundaryTag::ALL {
        let row = &w[b.index() * UnifiedTag::COUNT..(b.index() + 1) * UnifiedTag::COUNT];
        for u in UnifiedTag::all() {
            let expect = if u.boundary() == b {
                if b == BoundaryTag::O {
                    1.0
                } else {
                    1.0 / 3.0
                }
            } else {
                0.0
            };
            check(row[u.index()] == expect, || format!("initial W[{b}][{u}] = {}", row[u.index()]))?;
        }
    }

    let data = instances(&model, &d.train, Some(&lex)).unwrap();
    let mut adam = AdamState::new(&model.params, 0.9, 0.9, 1e-8);
    let mut rng = seeded_rng(11);
    for step in 0..100 {
        let (_, g) = model.loss_and_gradients(&data[step % data.len()], true, &mut rng).unwrap();
        adam.step(&mut model.params, &g, 1e-2).unwrap();
    }
    let logits = model.param(ParamId::TransitionLogits).data();
    let moved = logits.iter().any(|&x| x != 0.0);
    check(moved, || "transition logits never moved".into())?;
    let w = model.transition().realize();
    let mut worst: f64 = 0.0;
    for b in BoundaryTag::ALL {
        let row = &w[b.index() * UnifiedTag::COUNT..(b.index() + 1) * UnifiedTag::COUNT];
        for (k, &v) in row.iter().enumerate() {
            if !mask[b.index()][k] {
                check(v == 0.0, || format!("masked W[{b}][{k}] = {v}"))?;
                let l = logits[b.index() * UnifiedTag::COUNT + k];
                check(l == 0.0, || format!("masked logit [{b}][{k}] moved to {l}"))?;
            }
        }
        worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
    }
    check(worst <= 1e-9, || format!("row sum off by {worst:e}"))?;
    Ok(format!("initial rows exact; after 100 steps masked = 0, |row sum - 1| <= {worst:.1e}"))
}

// 3 ---------------------------------------------------------------------------

fn random_tokens(vocab: &Vocabulary, rng: &mut SeededRng) -> Vec<String> {
    let n = rng.gen_range(1..=16);
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.1) {
                format!("unseen{}", rng.gen_range(0..100))
            } else {
                vocab.tokens()[rng.gen_range(1..vocab.len())].clone()
            }
        })
        .collect()
}

fn distribution_invariants() -> Outcome {
    const SUM_TOL: f64 = 1e-9;
    // Slack for rounding in eps * sum(p^2) at the lower bound eps / 5.
    const ALPHA_SLACK: f64 = 1e-12;
    let d = synthetic::dataset().unwrap();
    let vocab = synthetic_vocab(&d);
    let mut rng = seeded_rng(33);
    let epsilons = [0.5, 0.3, 1.0, 0.7, 0.05];
    let mut tokens_seen = 0;
    for pass in 0..1000 {
        let eps = epsilons[(pass / 100) % epsilons.len()];
        let model = synthetic_model(
            ModelConfig {
                epsilon: eps,
                seed: (pass / 100) as u64,
                ..small_config()
            },
            &vocab,
        );
        let toks = random_tokens(&vocab, &mut rng);
        let training = pass % 2 == 0;
        let tr = model.forward(&toks, training, &mut rng).map_err(|e| e.to_string())?;
        let zt = tr.z_transition.as_ref().ok_or("no transition scores")?;
        let zo = tr.z_opinion.as_ref().ok_or("no opinion scores")?;
        for t in 0..tr.len() {
            for (name, z) in [
                ("z_T", &tr.z_boundary[t]),
                ("z_S", &tr.z_unified[t]),
                ("z'", &zt[t]),
                ("z~", &tr.z_mixed[t]),
                ("z_O", &zo[t]),
            ] {
                let s: f64 = z.iter().sum();
                check((s - 1.0).abs() <= SUM_TOL, || format!("pass {pass} t {t}: sum {name} = {s}"))?;
            }
            let a = tr.alpha[t];
            check(a >= eps / 5.0 - ALPHA_SLACK && a <= eps + ALPHA_SLACK, || {
                format!("pass {pass} t {t}: alpha {a} outside [{}, {eps}]", eps / 5.0)
            })?;
            tokens_seen += 1;
        }
    }
    for eps in [0.0, 0.05, 0.3, 0.5, 0.7, 1.0] {
        for k in 0..BoundaryTag::COUNT {
            let mut z = [0.0f64; BoundaryTag::COUNT];
            z[k] = 1.0;
            let (_, a) = boundary_confidence(&z, eps);
            check(a == eps, || format!("one-hot alpha {a} != {eps}"))?;
        }
    }
    Ok(format!("1000 passes, {tokens_seen} tokens: five sums within 1e-9, eps/5 <= alpha <= eps, one-hot alpha = eps"))
}

// 4 ---------------------------------------------------------------------------

fn random_spans(rng: &mut SeededRng) -> (usize, Vec<TargetSpan>) {
    let len = rng.gen_range(1..=30);
    let mut spans = Vec::new();
    let mut t = 0;
    while t < len {
        if rng.gen_bool(0.3) {
            let end = (t + rng.gen_range(0..4)).min(len - 1);
            let s = *Sentiment::ALL.choose(rng).unwrap();
            spans.push(TargetSpan::new(t, end, s));
            t = end + 1;
        } else {
            t += 1;
        }
    }
    (len, spans)
}

fn tagscheme_roundtrip() -> Outcome {
    let mut rng = seeded_rng(44);
    for i in 0..10_000 {
        let (len, spans) = random_spans(&mut rng);
        let tags = encode_unified(len, &spans).map_err(|e| e.to_string())?;
        let back = decode_unified(&tags);
        check(back == spans, || format!("case {i}: {spans:?} -> {back:?}"))?;
    }
    let all: Vec<UnifiedTag> = UnifiedTag::all().collect();
    let mut total = 0usize;
    let mut seq = [UnifiedTag::O; 5];
    for code in 0..13usize.pow(5) {
        let mut c = code;
        for slot in seq.iter_mut() {
            *slot = all[c % 13];
            c /= 13;
        }
        let outcome = catch_unwind(|| decode_unified(&seq));
        let spans = outcome.map_err(|_| format!("decode panicked on {seq:?}"))?;
        validate_spans(5, &spans).map_err(|e| format!("{seq:?}: {e}"))?;
        check(spans.iter().all(|s| s.sentiment.is_some()), || format!("{seq:?}: span without sentiment"))?;
        total += 1;
    }
    Ok(format!("10000 random span sets round-trip; {total} length-5 sequences decode to valid spans"))
}

// 5 ---------------------------------------------------------------------------

/// Quadratic matcher: each prediction takes the first unused equal gold span.
fn naive_counts(gold: &[TargetSpan], pred: &[TargetSpan]) -> Counts {
    let mut used = vec![false; gold.len()];
    let mut tp = 0;
    for p in pred {
        for (j, g) in gold.iter().enumerate() {
            if !used[j] && g.start == p.start && g.end == p.end && g.sentiment == p.sentiment {
                used[j] = true;
                tp += 1;
                break;
            }
        }
    }
    Counts {
        tp,
        n_pred: pred.len(),
        n_gold: gold.len(),
    }
}

fn naive_prf(c: Counts) -> (f64, f64, f64) {
    let p = if c.n_pred > 0 { c.tp as f64 / c.n_pred as f64 } else { 0.0 };
    let r = if c.n_gold > 0 { c.tp as f64 / c.n_gold as f64 } else { 0.0 };
    let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f)
}

fn scorer_oracle() -> Outcome {
    let mut rng = seeded_rng(55);
    let mut micro = Counts::default();
    let mut naive_micro = Counts::default();
    for i in 0..1000 {
        let (len, gold) = random_spans(&mut rng);
        // Predictions perturb gold: keep, shift, relabel or drop, plus extras.
        let mut pred: Vec<TargetSpan> = Vec::new();
        for g in &gold {
            match rng.gen_range(0..4) {
                0 | 1 => pred.push(*g),
                2 => pred.push(TargetSpan::new(g.start, g.end, *Sentiment::ALL.choose(&mut rng).unwrap())),
                _ => {}
            }
        }
        if rng.gen_bool(0.3) {
            let s = rng.gen_range(0..len);
            pred.push(TargetSpan::new(s, s, Sentiment::Neu));
        }
        pred.shuffle(&mut rng);
        let fast = exact_match(&gold, &pred);
        let slow = naive_counts(&gold, &pred);
        check(fast == slow, || format!("pair {i}: {fast:?} vs {slow:?}"))?;
        let p = fast.prf();
        check((p.precision, p.recall, p.f1) == naive_prf(slow), || format!("pair {i}: PRF differs"))?;
        let swapped = exact_match(&pred, &gold).prf();
        check(swapped.precision == p.recall && swapped.recall == p.precision, || {
            format!("pair {i}: swap symmetry")
        })?;
        micro = micro + fast;
        naive_micro = naive_micro + slow;
    }
    check(micro == naive_micro, || "micro totals differ".into())?;
    let p: Prf = micro.prf();
    check((p.precision, p.recall, p.f1) == naive_prf(naive_micro), || "micro PRF differs".into())?;
    Ok(format!(
        "1000 pairs match the naive matcher exactly; micro tp={} pred={} gold={}",
        micro.tp, micro.n_pred, micro.n_gold
    ))
}

// 6 ---------------------------------------------------------------------------

fn overfit() -> Outcome {
    let start = Instant::now();
    let d = synthetic::dataset().unwrap();
    let lex = synthetic::lexicon();
    let vocab = synthetic_vocab(&d);
    let (base, tc) = overfit_config();
    let mut firsts = Vec::new();
    for v in Variant::ALL {
        let model = synthetic_model(v.apply(&base), &vocab);
        let (best, hist) = train(model, &d.train, &d.train, Some(&lex), &tc).map_err(|e| e.to_string())?;
        let f1 = evaluate_corpus(&best, &d.train).unwrap().unified.f1;
        check(f1 == 1.0, || format!("{v}: training F1 {f1:.4} after {} epochs", tc.epochs))?;
        let first = hist.epochs.iter().position(|r| r.dev.f1 == 1.0).unwrap();
        firsts.push(format!("{v}@{}", first + 1));
    }
    let t = start.elapsed();
    check(t < Duration::from_secs(300), || format!("took {t:?}"))?;
    Ok(format!("training F1 = 1.0 for all five ({}), {t:.1?}", firsts.join(" ")))
}

// 7 ---------------------------------------------------------------------------

fn bits(m: &Model64) -> Vec<u64> {
    m.params.iter().flat_map(|t| t.data().iter().map(|x| x.to_bits())).collect()
}

fn ablation_coherence() -> Outcome {
    let d = synthetic::dataset().unwrap();
    let vocab = synthetic_vocab(&d);
    let tc = TrainConfig {
        epochs: 4,
        learning_rate: 0.01,
        ..TrainConfig::default()
    };
    let off = small_config().base();
    let equivalent = ModelConfig {
        boundary_guidance: true,
        epsilon: 0.0,
        sentiment_consistency: false,
        opinion_enhanced: false,
        ..small_config()
    };
    let (ma, ha) = train(synthetic_model(off, &vocab), &d.train, &d.dev, None, &tc).map_err(|e| e.to_string())?;
    let (mb, hb) =
        train(synthetic_model(equivalent, &vocab), &d.train, &d.dev, None, &tc).map_err(|e| e.to_string())?;
    check(bits(&ma) == bits(&mb), || "parameters differ".into())?;
    let hbits = |h: &tbsa::trainer::TrainHistory| {
        h.epochs
            .iter()
            .map(|r| (r.loss_boundary.to_bits(), r.loss_unified.to_bits(), r.dev))
            .collect::<Vec<_>>()
    };
    check(hbits(&ha) == hbits(&hb), || "histories differ".into())?;
    for s in &d.dev {
        let ta = ma.forward(&s.tokens, false, &mut seeded_rng(0)).unwrap();
        let tb = mb.forward(&s.tokens, false, &mut seeded_rng(0)).unwrap();
        let zb = |z: &Vec<Vec<f64>>| z.iter().flatten().map(|x| x.to_bits()).collect::<Vec<_>>();
        check(zb(&ta.z_mixed) == zb(&tb.z_mixed), || format!("{}: scores differ", s.id))?;
    }
    Ok(format!(
        "components off == (eps=0, gate bypassed, no opinion loss): {} parameters and {} epochs bit-identical",
        bits(&ma).len(),
        ha.epochs.len()
    ))
}

// 8 ---------------------------------------------------------------------------

fn determinism() -> Outcome {
    let d = synthetic::dataset().unwrap();
    let lex = synthetic::lexicon();
    let vocab = synthetic_vocab(&d);
    let tc = TrainConfig {
        epochs: 3,
        learning_rate: 0.01,
        ..TrainConfig::default()
    };
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let (m, h) = train(synthetic_model(small_config(), &vocab), &d.train, &d.dev, Some(&lex), &tc)
            .map_err(|e| e.to_string())?;
        let ckpt = dir.path().join(format!("run{run}.json"));
        let tc_json = serde_json::to_value(&tc).unwrap();
        tbsa::model::checkpoint::save(&m, Some(tc_json.clone()), &ckpt).map_err(|e| e.to_string())?;
        let hist = h.to_jsonl(&tc_json).map_err(|e| e.to_string())?;
        outputs.push((std::fs::read(&ckpt).unwrap(), hist));
    }
    check(outputs[0].0 == outputs[1].0, || "checkpoints differ".into())?;
    check(outputs[0].1 == outputs[1].1, || "histories differ".into())?;
    let reloaded: Model64 = Checkpoint::from_json(std::str::from_utf8(&outputs[0].0).unwrap())
        .and_then(|c| c.into_model())
        .map_err(|e| e.to_string())?;
    let (m, _) = train(synthetic_model(small_config(), &vocab), &d.train, &d.dev, Some(&lex), &tc).unwrap();
    check(bits(&reloaded) == bits(&m), || "reloaded checkpoint differs from trained weights".into())?;
    Ok(format!(
        "two runs: checkpoints ({} bytes) and histories byte-identical; reload is bit-exact",
        outputs[0].0.len()
    ))
}

// 9 ---------------------------------------------------------------------------

/// Set to a directory holding `train.txt`, `test.txt` and optionally
/// `dev.txt` (tab-separated unified tags) to run the full-data check.
const DATA_ENV: &str = "TBSA_LAPTOP_DIR";
const EMBEDDINGS_ENV: &str = "TBSA_EMBEDDINGS";
const LEXICON_ENV: &str = "TBSA_LEXICON";

fn full_data() -> Option<Outcome> {
    let dir = PathBuf::from(std::env::var_os(DATA_ENV)?);
    Some((|| {
        let read = |name: &str| -> Result<Vec<Sentence>, String> {
            let text = std::fs::read_to_string(dir.join(name)).map_err(|e| format!("{name}: {e}"))?;
            parse_conll(&text).map_err(|e| format!("{name}: {e}"))
        };
        let train_all = read("train.txt")?;
        let test = read("test.txt")?;
        let (train_set, dev) = if dir.join("dev.txt").exists() {
            (train_all, read("dev.txt")?)
        } else {
            let pooled = sentiment_counts(&train_all);
            check(pooled == [987, 860, 450], || format!("train+dev sentiment counts {pooled:?}"))?;
            split_dev(&train_all, 0.1, 1).map_err(|e| e.to_string())?
        };
        let tc = sentiment_counts(&test);
        check(tc == [339, 130, 165], || format!("test sentiment counts {tc:?}"))?;
        let emb_path = std::env::var_os(EMBEDDINGS_ENV).map(PathBuf::from);
        let lex_path = std::env::var_os(LEXICON_ENV).ok_or(format!("{LEXICON_ENV} not set"))?;
        let lex = OpinionLexicon::load(lex_path.as_ref()).map_err(|e| e.to_string())?;
        let dataset = Dataset {
            name: "laptop".into(),
            train: train_set,
            dev,
            test,
        };
        let vocab = Vocabulary::from_sentences([
            dataset.train.as_slice(),
            dataset.dev.as_slice(),
            dataset.test.as_slice(),
        ]);
        let config = ModelConfig::default();
        let table: tbsa::EmbeddingTable64 =
            load_embeddings(emb_path.as_deref(), &vocab, config.embedding_dim, 1).map_err(|e| e.to_string())?;
        let tc = TrainConfig::default();
        let (_, full_dev, full_test, _) =
            run_config(&dataset, Some(&lex), &table, Variant::Full.apply(&config), &tc).map_err(|e| e.to_string())?;
        let (_, base_dev, _, _) =
            run_config(&dataset, None, &table, Variant::Base.apply(&config), &tc).map_err(|e| e.to_string())?;
        let f1 = 100.0 * full_test.unwrap().f1;
        check(f1 >= 55.0, || format!("test F1 {f1:.2} < 55.0"))?;
        check(full_dev.f1 > base_dev.f1, || {
            format!("dev F1 Full {:.4} <= Base {:.4}", full_dev.f1, base_dev.f1)
        })?;
        Ok(format!(
            "test F1 {f1:.2} >= 55.0; dev F1 Full {:.2} > Base {:.2}",
            100.0 * full_dev.f1,
            100.0 * base_dev.f1
        ))
    })())
}

// 10 --------------------------------------------------------------------------

fn sweep_sanity() -> Outcome {
    let d = synthetic::dataset().unwrap();
    let lex = synthetic::lexicon();
    let vocab = synthetic_vocab(&d);
    let table = load_embeddings::<f64>(None, &vocab, 8, 7).unwrap();
    let tc = TrainConfig {
        epochs: 3,
        learning_rate: 0.01,
        ..TrainConfig::default()
    };
    let grid = SweepGrid {
        no_bg_reference: true,
        ..SweepGrid::default()
    };
    let recs = sweep(&d, Some(&lex), &table, &small_config(), &tc, &grid).map_err(|e| e.to_string())?;
    let guided: Vec<_> = recs.iter().filter(|r| r.boundary_guidance).collect();
    check(guided.len() == 35, || format!("{} grid records", guided.len()))?;
    let keys: Vec<_> = guided.iter().map(|r| (r.epsilon, r.window)).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    check(keys == sorted, || "records not sorted by (eps, s)".into())?;
    for s in DEFAULT_WINDOWS {
        let at = |bg: bool| {
            recs.iter()
                .find(|r| r.epsilon == 0.0 && r.window == s && r.boundary_guidance == bg)
                .map(|r| r.dev)
        };
        let (with, without) = (at(true).ok_or("missing eps=0")?, at(false).ok_or("missing no-bg")?);
        check(with == without, || format!("s={s}: eps=0 {with:?} vs no-bg {without:?}"))?;
    }
    Ok("35 records sorted by (eps, s); eps=0 column equals guidance-off runs for s = 1..5".into())
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: Vec<(&str, Criterion)> = vec![
        ("gradient check", Box::new(|| Some(gradient_check()))),
        ("transition-matrix invariants", Box::new(|| Some(transition_invariants()))),
        ("distribution and alpha invariants", Box::new(|| Some(distribution_invariants()))),
        ("tagscheme roundtrip and totality", Box::new(|| Some(tagscheme_roundtrip()))),
        ("scorer oracle equivalence", Box::new(|| Some(scorer_oracle()))),
        ("overfit synthetic corpus", Box::new(|| Some(overfit()))),
        ("ablation coherence", Box::new(|| Some(ablation_coherence()))),
        ("determinism", Box::new(|| Some(determinism()))),
        ("full-data check", Box::new(full_data)),
        ("sweep sanity", Box::new(|| Some(sweep_sanity()))),
    ];
    let only: Option<usize> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|k| k != n) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Some(Err(format!("panicked: {msg}")))
        });
        match outcome {
            Some(Ok(detail)) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Some(Err(detail)) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {detail}");
            }
            None => println!("criterion {n:>2} SKIP  {name}: set {DATA_ENV}, {EMBEDDINGS_ENV} and {LEXICON_ENV} to run"),
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
