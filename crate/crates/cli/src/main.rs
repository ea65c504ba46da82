mod config_file;

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tbsa::corpus::{
    convert_spans_to_conll, load_embeddings, parse_conll, parse_joint_conll, parse_span_records,
    split_dev, synthetic, write_span_records, Dataset, OpinionLexicon, Sentence, TagScheme, Vocabulary,
};
use tbsa::evaluator::{evaluate_corpus, format_table, records_to_jsonl, EvalRecord};
use tbsa::experiment::{ablation_table, sweep, SweepGrid};
use tbsa::model::{checkpoint, Model, ModelConfig};
use tbsa::trainer::{grad_check, train, TrainConfig};
use tbsa::{Error, Scalar};

#[derive(Parser)]
#[command(name = "tbsa", version, about = "Unified target-based sentiment tagging", args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write a checkpoint plus a per-epoch history.
    Train(TrainCmd),
    /// Score a checkpoint on a tagged corpus.
    Eval(EvalCmd),
    /// Tag pre-tokenised text, one sentence per line.
    Tag(TagCmd),
    /// Convert between corpus formats.
    Convert(ConvertCmd),
    /// Compare analytic gradients with finite differences.
    Gradcheck(GradcheckCmd),
    /// Train over an epsilon x window grid and record dev F1.
    Sweep(SweepCmd),
    /// Train and score the five component configurations.
    Ablation(AblationCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// token<TAB>unified-tag
    Conll,
    /// token<TAB>boundary<TAB>sentiment
    Joint,
    /// token<TAB>boundary-tag (output only)
    Boundary,
    /// one JSON span record per line
    Jsonl,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Precision {
    F64,
    F32,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, default_value_t = 300)]
    embedding_dim: usize,
    /// Concatenated width of the boundary BiLSTM.
    #[arg(long, default_value_t = 50)]
    boundary_hidden: usize,
    /// Concatenated width of the unified BiLSTM.
    #[arg(long, default_value_t = 50)]
    unified_hidden: usize,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Opinion-word window on each side of a token.
    #[arg(long, default_value_t = 3)]
    window: usize,
    #[arg(long, default_value_t = 0.5)]
    dropout: f64,
    /// Disable boundary guidance.
    #[arg(long)]
    no_bg: bool,
    /// Disable the sentiment-consistency gate.
    #[arg(long)]
    no_sc: bool,
    /// Disable the opinion-enhanced auxiliary head.
    #[arg(long)]
    no_oe: bool,
    /// Keep the transition matrix at its initial value.
    #[arg(long)]
    freeze_transition: bool,
}

impl ModelArgs {
    fn config(&self, seed: u64) -> ModelConfig {
        ModelConfig {
            embedding_dim: self.embedding_dim,
            boundary_hidden: self.boundary_hidden,
            unified_hidden: self.unified_hidden,
            epsilon: self.epsilon,
            window: self.window,
            dropout: self.dropout,
            boundary_guidance: !self.no_bg,
            sentiment_consistency: !self.no_sc,
            opinion_enhanced: !self.no_oe,
            train_transition: !self.freeze_transition,
            seed,
        }
    }
}

#[derive(Args, Clone)]
struct TrainArgs {
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    learning_rate: f64,
    /// Learning-rate decay per epoch.
    #[arg(long, default_value_t = 0.05)]
    decay: f64,
    #[arg(long, default_value_t = 1)]
    batch_size: usize,
    /// Max gradient norm; unclipped when absent.
    #[arg(long)]
    clip_norm: Option<f64>,
    /// Seeds initialisation, shuffling, dropout and dev splitting.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl TrainArgs {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            decay: self.decay,
            batch_size: self.batch_size,
            clip_norm: self.clip_norm,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Training corpus.
    #[arg(long, required_unless_present = "synthetic")]
    train: Option<PathBuf>,
    /// Dev corpus; without it a fraction of training is held out.
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    dev_fraction: f64,
    #[arg(long, value_enum, default_value = "conll")]
    format: Format,
    /// Pre-trained vectors (`word v1 .. vd` per line); random when absent.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Opinion words, one per line. Required unless --no-oe.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Use the bundled 20-sentence corpus and lexicon.
    #[arg(long, conflicts_with_all = ["train", "dev", "test"])]
    synthetic: bool,
}

#[derive(Args)]
struct TrainCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    training: TrainArgs,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
    /// Checkpoint path.
    #[arg(long)]
    out: PathBuf,
    /// History path; defaults to `<out>.history.jsonl`.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Read further flags from a `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvalCmd {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_enum, default_value = "conll")]
    format: Format,
    /// Machine-readable report path.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TagCmd {
    #[arg(long)]
    model: PathBuf,
    /// Input file; standard input when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ConvertCmd {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    from: Format,
    #[arg(long, value_enum)]
    to: Format,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GradcheckCmd {
    /// Embedding and hidden width.
    #[arg(long, default_value_t = 4)]
    dims: usize,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long)]
    no_bg: bool,
    #[arg(long)]
    no_sc: bool,
    #[arg(long)]
    no_oe: bool,
    #[arg(long)]
    freeze_transition: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Index of the bundled training sentence to differentiate.
    #[arg(long, default_value_t = 2)]
    sentence: usize,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SweepCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    training: TrainArgs,
    /// Comma-separated epsilon values.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Comma-separated window sizes.
    #[arg(long, value_delimiter = ',')]
    windows: Option<Vec<usize>>,
    /// Also run boundary guidance off for each window.
    #[arg(long)]
    no_bg_reference: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct AblationCmd {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    training: TrainArgs,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            Error::NonFiniteLoss { .. } => Failure::Numeric(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn read_text(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn read_corpus(path: &Path, format: Format) -> Outcome<Vec<Sentence>> {
    let text = read_text(path)?;
    let parsed = match format {
        Format::Conll => parse_conll(&text),
        Format::Joint => parse_joint_conll(&text),
        Format::Jsonl => parse_span_records(&text),
        Format::Boundary => return Err(Failure::Usage("boundary tags carry no sentiment; not an input format".into())),
    };
    parsed.map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn require_file(path: &Path) -> Outcome {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{}: no such file", path.display())))
    }
}

struct Loaded {
    dataset: Dataset,
    lexicon: Option<OpinionLexicon>,
}

fn load_data(data: &DataArgs, opinion: bool, seed: u64) -> Outcome<Loaded> {
    for p in [&data.train, &data.dev, &data.test, &data.embeddings, &data.lexicon].into_iter().flatten() {
        require_file(p)?;
    }
    if data.synthetic {
        let lexicon = match &data.lexicon {
            Some(p) => OpinionLexicon::load(p)?,
            None => synthetic::lexicon(),
        };
        return Ok(Loaded {
            dataset: synthetic::dataset()?,
            lexicon: opinion.then_some(lexicon),
        });
    }
    if opinion && data.lexicon.is_none() {
        return Err(Failure::Usage("the opinion-enhanced head needs --lexicon (or pass --no-oe)".into()));
    }
    let train_path = data.train.as_ref().expect("clap enforces --train");
    let train_all = read_corpus(train_path, data.format)?;
    let (train, dev) = match &data.dev {
        Some(p) => (train_all, read_corpus(p, data.format)?),
        None => split_dev(&train_all, data.dev_fraction, seed)?,
    };
    let test = match &data.test {
        Some(p) => read_corpus(p, data.format)?,
        None => Vec::new(),
    };
    let lexicon = match (&data.lexicon, opinion) {
        (Some(p), true) => Some(OpinionLexicon::load(p)?),
        _ => None,
    };
    let name = train_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Loaded {
        dataset: Dataset { name, train, dev, test },
        lexicon,
    })
}

fn vocabulary(d: &Dataset) -> Vocabulary {
    Vocabulary::from_sentences([d.train.as_slice(), d.dev.as_slice(), d.test.as_slice()])
}

fn resolved(command: &str, data: &DataArgs, model: &ModelConfig, training: &TrainConfig) -> Value {
    json!({
        "command": command,
        "train": data.train,
        "dev": data.dev,
        "test": data.test,
        "dev_fraction": data.dev_fraction,
        "embeddings": data.embeddings,
        "lexicon": data.lexicon,
        "synthetic": data.synthetic,
        "model": model,
        "training": training,
    })
}

fn run_train<T: Scalar>(cmd: &TrainCmd) -> Outcome {
    let tc = cmd.training.config();
    tc.validate()?;
    let mc = cmd.model.config(tc.seed);
    mc.validate()?;
    let loaded = load_data(&cmd.data, mc.opinion_enhanced, tc.seed)?;
    let d = &loaded.dataset;
    let table = load_embeddings::<T>(cmd.data.embeddings.as_deref(), &vocabulary(d), mc.embedding_dim, tc.seed)?;
    let model = Model::new(mc.clone(), table)?;
    let (best, history) = train(model, &d.train, &d.dev, loaded.lexicon.as_ref(), &tc)?;
    let run = resolved("train", &cmd.data, &mc, &tc);
    checkpoint::save(&best, Some(run.clone()), &cmd.out)?;
    let history_path = cmd
        .history
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.history.jsonl", cmd.out.display())));
    write_text(&history_path, &history.to_jsonl(&run)?)?;
    let best_rec = history.best().expect("one record per epoch");
    println!(
        "best epoch {} of {}: dev P {:.2} R {:.2} F1 {:.2}",
        history.best_epoch + 1,
        history.epochs.len(),
        100.0 * best_rec.dev.precision,
        100.0 * best_rec.dev.recall,
        100.0 * best_rec.dev.f1
    );
    if !d.test.is_empty() {
        let s = evaluate_corpus(&best, &d.test)?;
        let rec = EvalRecord::new("test", "trained", &s.unified);
        print!("{}", format_table(&[rec]));
    }
    println!("checkpoint: {}", cmd.out.display());
    println!("history:    {}", history_path.display());
    Ok(())
}

fn eval_with<T: Scalar>(ckpt: checkpoint::Checkpoint, cmd: &EvalCmd) -> Outcome {
    let train_config = ckpt.train_config.clone();
    let model: Model<T> = ckpt.into_model()?;
    let test = read_corpus(&cmd.test, cmd.format)?;
    let scores = evaluate_corpus(&model, &test)?;
    let dataset = cmd.test.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let label = cmd.model.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let records = [
        EvalRecord::new(&dataset, &label, &scores.unified),
        EvalRecord::new(&dataset, format!("{label} (boundary only)"), &scores.boundary),
    ];
    print!("{}", format_table(&records));
    if let Some(path) = &cmd.report {
        let header = json!({
            "command": "eval",
            "model": cmd.model,
            "test": cmd.test,
            "model_config": model.config,
            "train_config": train_config,
        });
        let mut text = serde_json::to_string(&header)?;
        text.push('\n');
        text.push_str(&records_to_jsonl(&records)?);
        write_text(path, &text)?;
    }
    Ok(())
}

fn run_eval(cmd: &EvalCmd) -> Outcome {
    require_file(&cmd.model)?;
    require_file(&cmd.test)?;
    let ckpt = checkpoint::read(&cmd.model)?;
    match ckpt.precision.as_str() {
        "f32" => eval_with::<f32>(ckpt, cmd),
        _ => eval_with::<f64>(ckpt, cmd),
    }
}

fn tag_with<T: Scalar>(ckpt: checkpoint::Checkpoint, cmd: &TagCmd) -> Outcome {
    let model: Model<T> = ckpt.into_model()?;
    let input: Box<dyn BufRead> = match &cmd.input {
        Some(p) => {
            require_file(p)?;
            Box::new(io::BufReader::new(fs::File::open(p)?))
        }
        None => Box::new(io::stdin().lock()),
    };
    let mut out: Box<dyn Write> = match &cmd.output {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    };
    for line in input.lines() {
        let line = line?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            writeln!(out)?;
            continue;
        }
        let p = model.predict(&tokens)?;
        let tags: Vec<String> = p.unified.iter().map(|t| t.to_string()).collect();
        let spans: Vec<String> = p.spans.iter().map(|s| s.to_string()).collect();
        writeln!(out, "{}\t{}", tags.join(" "), spans.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

fn run_tag(cmd: &TagCmd) -> Outcome {
    require_file(&cmd.model)?;
    let ckpt = checkpoint::read(&cmd.model)?;
    match ckpt.precision.as_str() {
        "f32" => tag_with::<f32>(ckpt, cmd),
        _ => tag_with::<f64>(ckpt, cmd),
    }
}

fn run_convert(cmd: &ConvertCmd) -> Outcome {
    require_file(&cmd.input)?;
    let sentences = read_corpus(&cmd.input, cmd.from)?;
    let text = match cmd.to {
        Format::Conll => convert_spans_to_conll(&sentences, TagScheme::Unified)?,
        Format::Joint => convert_spans_to_conll(&sentences, TagScheme::Joint)?,
        Format::Boundary => convert_spans_to_conll(&sentences, TagScheme::Boundary)?,
        Format::Jsonl => write_span_records(&sentences)?,
    };
    match &cmd.output {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_gradcheck(cmd: &GradcheckCmd) -> Outcome {
    if cmd.dims == 0 || !cmd.dims.is_multiple_of(2) {
        return Err(Failure::Usage("--dims must be a positive even number".into()));
    }
    let config = ModelConfig {
        embedding_dim: cmd.dims,
        boundary_hidden: cmd.dims,
        unified_hidden: cmd.dims,
        epsilon: cmd.epsilon,
        boundary_guidance: !cmd.no_bg,
        sentiment_consistency: !cmd.no_sc,
        opinion_enhanced: !cmd.no_oe,
        train_transition: !cmd.freeze_transition,
        seed: cmd.seed,
        ..ModelConfig::default()
    };
    config.validate()?;
    let d = synthetic::dataset()?;
    let sentence = d
        .train
        .get(cmd.sentence)
        .ok_or_else(|| Failure::Usage(format!("--sentence must be below {}", d.train.len())))?;
    let table = load_embeddings::<f64>(None, &vocabulary(&d), cmd.dims, cmd.seed)?;
    let model = Model::new(config, table)?;
    let inst = model.instance(sentence, Some(&synthetic::lexicon()))?;
    let report = grad_check(&model, &inst, cmd.tol)?;
    println!("sentence: {}", sentence.tokens.join(" "));
    for g in &report.groups {
        let mark = if g.max_rel_error < cmd.tol { "ok" } else { "FAIL" };
        println!("{:<28} {:>5} entries  max rel error {:.3e}  {mark}", g.name, g.entries, g.max_rel_error);
    }
    if report.passed() {
        println!("PASS: max rel error {:.3e} < {:e}", report.max_rel_error(), cmd.tol);
        Ok(())
    } else {
        Err(Failure::Numeric(format!(
            "gradient check failed: max rel error {:.3e} >= {:e}",
            report.max_rel_error(),
            cmd.tol
        )))
    }
}

fn emit(path: Option<&Path>, header: &Value, lines: impl IntoIterator<Item = Value>) -> Outcome {
    let mut text = serde_json::to_string(header)?;
    text.push('\n');
    for l in lines {
        text.push_str(&serde_json::to_string(&l)?);
        text.push('\n');
    }
    match path {
        Some(p) => write_text(p, &text),
        None => Ok(()),
    }
}

fn run_sweep(cmd: &SweepCmd) -> Outcome {
    let tc = cmd.training.config();
    tc.validate()?;
    let mc = cmd.model.config(tc.seed);
    mc.validate()?;
    let defaults = SweepGrid::default();
    let grid = SweepGrid {
        epsilons: cmd.epsilons.clone().unwrap_or(defaults.epsilons),
        windows: cmd.windows.clone().unwrap_or(defaults.windows),
        no_bg_reference: cmd.no_bg_reference,
    };
    if grid.epsilons.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(Failure::Usage("epsilon values must lie in [0, 1]".into()));
    }
    if grid.windows.contains(&0) {
        return Err(Failure::Usage("window sizes must be at least 1".into()));
    }
    let loaded = load_data(&cmd.data, mc.opinion_enhanced, tc.seed)?;
    let d = &loaded.dataset;
    let table = load_embeddings::<f64>(cmd.data.embeddings.as_deref(), &vocabulary(d), mc.embedding_dim, tc.seed)?;
    let recs = sweep(d, loaded.lexicon.as_ref(), &table, &mc, &tc, &grid)?;
    println!("{:>7}  {:>6}  {:>3}  {:>7}", "epsilon", "window", "bg", "dev F1");
    for r in &recs {
        let bg = if r.boundary_guidance { "on" } else { "off" };
        println!("{:>7.2}  {:>6}  {:>3}  {:>7.2}", r.epsilon, r.window, bg, 100.0 * r.dev.f1);
    }
    let header = resolved("sweep", &cmd.data, &mc, &tc);
    emit(cmd.output.as_deref(), &header, recs.iter().map(|r| serde_json::to_value(r).unwrap()))
}

fn run_ablation(cmd: &AblationCmd) -> Outcome {
    let tc = cmd.training.config();
    tc.validate()?;
    let mc = cmd.model.config(tc.seed);
    mc.validate()?;
    // Rows with the opinion head need the lexicon even if the base config disables it.
    let loaded = load_data(&cmd.data, true, tc.seed)?;
    let d = &loaded.dataset;
    let table = load_embeddings::<f64>(cmd.data.embeddings.as_deref(), &vocabulary(d), mc.embedding_dim, tc.seed)?;
    let rows = ablation_table(d, loaded.lexicon.as_ref(), &table, &mc, &tc)?;
    let mut records = Vec::new();
    for r in &rows {
        records.push(EvalRecord::new("dev", r.variant.label(), &r.dev));
        if let Some(t) = &r.test {
            records.push(EvalRecord::new("test", r.variant.label(), t));
        }
    }
    print!("{}", format_table(&records));
    let header = resolved("ablation", &cmd.data, &mc, &tc);
    emit(cmd.output.as_deref(), &header, records.iter().map(|r| serde_json::to_value(r).unwrap()))
}

fn dispatch(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Train(c) => match c.precision {
            Precision::F64 => run_train::<f64>(c),
            Precision::F32 => run_train::<f32>(c),
        },
        Command::Eval(c) => run_eval(c),
        Command::Tag(c) => run_tag(c),
        Command::Convert(c) => run_convert(c),
        Command::Gradcheck(c) => run_gradcheck(c),
        Command::Sweep(c) => run_sweep(c),
        Command::Ablation(c) => run_ablation(c),
    }
}

fn main() -> ExitCode {
    let argv = match config_file::splice(std::env::args().collect()) {
        Ok(a) => a,
        Err(m) => {
            eprintln!("error: {m}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
