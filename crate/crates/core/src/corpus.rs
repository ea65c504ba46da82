//! Annotated sentences, the CoNLL-style corpus format, pre-trained
//! embeddings, the opinion lexicon and distant opinion-proximity labels.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::Tensor;
use crate::scalar::Scalar;
use crate::tagscheme::{
    decode_unified, encode_boundary, encode_unified, validate_spans, BoundaryTag, Sentiment,
    TargetSpan, UnifiedTag,
};
use crate::seeded_rng;

/// Half-width of the uniform distribution used for words without a pre-trained vector.
pub const OOV_RANGE: f64 = 0.25;

pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub tokens: Vec<String>,
    pub spans: Vec<TargetSpan>,
}

impl Sentence {
    pub fn new(id: impl Into<String>, tokens: Vec<String>, spans: Vec<TargetSpan>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptySequence);
        }
        validate_spans(tokens.len(), &spans)?;
        Ok(Sentence {
            id: id.into(),
            tokens,
            spans,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn unified_tags(&self) -> Result<Vec<UnifiedTag>> {
        encode_unified(self.len(), &self.spans)
    }

    pub fn boundary_tags(&self) -> Result<Vec<BoundaryTag>> {
        encode_boundary(self.len(), &self.spans)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub train: Vec<Sentence>,
    pub dev: Vec<Sentence>,
    pub test: Vec<Sentence>,
}

/// Per-sentiment span totals, used to sanity-check ingested corpora.
pub fn sentiment_counts(sentences: &[Sentence]) -> [usize; 3] {
    let mut counts = [0; 3];
    for s in sentences.iter().flat_map(|s| &s.spans) {
        if let Some(sent) = s.sentiment {
            counts[sent.index()] += 1;
        }
    }
    counts
}

fn split_columns(line: &str, expected: usize, lineno: usize) -> Result<Vec<&str>> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != expected {
        return Err(Error::parse(
            lineno,
            format!("expected {expected} tab-separated columns, found {}", cols.len()),
        ));
    }
    Ok(cols)
}

fn read_blocks<F>(text: &str, mut on_line: F) -> Result<Vec<Vec<(usize, String)>>>
where
    F: FnMut(usize, &str) -> Result<()>,
{
    let mut blocks = Vec::new();
    let mut current = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            continue;
        }
        on_line(lineno, line)?;
        current.push((lineno, line.to_string()));
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    Ok(blocks)
}

/// Parses `token<TAB>unified-tag` lines; blank lines separate sentences.
pub fn parse_conll(text: &str) -> Result<Vec<Sentence>> {
    let blocks = read_blocks(text, |_, _| Ok(()))?;
    blocks
        .into_iter()
        .enumerate()
        .map(|(n, block)| {
            let mut tokens = Vec::with_capacity(block.len());
            let mut tags = Vec::with_capacity(block.len());
            for (lineno, line) in &block {
                let cols = split_columns(line, 2, *lineno)?;
                let tag: UnifiedTag = cols[1]
                    .parse()
                    .map_err(|_| Error::parse(*lineno, format!("unknown tag `{}`", cols[1])))?;
                tokens.push(cols[0].to_string());
                tags.push(tag);
            }
            let spans = decode_unified(&tags);
            Ok(Sentence {
                id: format!("s{n}"),
                tokens,
                spans,
            })
        })
        .collect()
}

/// Parses the three-column joint format `token<TAB>boundary<TAB>sentiment`.
pub fn parse_joint_conll(text: &str) -> Result<Vec<Sentence>> {
    let blocks = read_blocks(text, |_, _| Ok(()))?;
    blocks
        .into_iter()
        .enumerate()
        .map(|(n, block)| {
            let mut tokens = Vec::with_capacity(block.len());
            let mut tags = Vec::with_capacity(block.len());
            for (lineno, line) in &block {
                let cols = split_columns(line, 3, *lineno)?;
                let b: BoundaryTag = cols[1]
                    .parse()
                    .map_err(|_| Error::parse(*lineno, format!("unknown tag `{}`", cols[1])))?;
                let tag = match (b, cols[2]) {
                    (BoundaryTag::O, "O") => UnifiedTag::O,
                    (BoundaryTag::O, other) | (_, other @ "O") => {
                        return Err(Error::parse(
                            *lineno,
                            format!("boundary `{}` with sentiment `{other}`", cols[1]),
                        ))
                    }
                    (b, s) => {
                        let s: Sentiment = s
                            .parse()
                            .map_err(|_| Error::parse(*lineno, format!("unknown tag `{s}`")))?;
                        UnifiedTag::new(b, s)
                    }
                };
                tokens.push(cols[0].to_string());
                tags.push(tag);
            }
            Ok(Sentence {
                id: format!("s{n}"),
                tokens,
                spans: decode_unified(&tags),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagScheme {
    Unified,
    Boundary,
    Joint,
}

/// Writes sentences back out in the chosen column layout, blank-line separated.
pub fn convert_spans_to_conll(sentences: &[Sentence], scheme: TagScheme) -> Result<String> {
    let mut out = String::new();
    for (i, s) in sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match scheme {
            TagScheme::Unified => {
                for (tok, tag) in s.tokens.iter().zip(s.unified_tags()?) {
                    writeln!(out, "{tok}\t{tag}").unwrap();
                }
            }
            TagScheme::Boundary => {
                for (tok, tag) in s.tokens.iter().zip(s.boundary_tags()?) {
                    writeln!(out, "{tok}\t{tag}").unwrap();
                }
            }
            TagScheme::Joint => {
                for (tok, tag) in s.tokens.iter().zip(s.unified_tags()?) {
                    let sent = tag.sentiment().map_or("O", Sentiment::as_str);
                    writeln!(out, "{tok}\t{}\t{sent}", tag.boundary()).unwrap();
                }
            }
        }
    }
    Ok(out)
}

/// One JSON object per line: `{"id", "tokens", "spans": [{"start","end","sentiment"}]}`.
pub fn parse_span_records(text: &str) -> Result<Vec<Sentence>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let s: Sentence =
                serde_json::from_str(line).map_err(|e| Error::parse(i + 1, e.to_string()))?;
            Sentence::new(s.id, s.tokens, s.spans).map_err(|e| Error::parse(i + 1, e.to_string()))
        })
        .collect()
}

pub fn write_span_records(sentences: &[Sentence]) -> Result<String> {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&serde_json::to_string(s)?);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpinionLexicon {
    pub words: BTreeSet<String>,
}

impl OpinionLexicon {
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        OpinionLexicon {
            words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
        }
    }

    /// One word per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        Self::from_words(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(&token.to_lowercase())
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Distant target-word labels: token `t` gets 1 iff a lexicon word occurs
/// within `window` tokens on either side of it (the token itself excluded).
pub fn generate_oe_labels(sentence: &Sentence, lexicon: &OpinionLexicon, window: usize) -> Vec<u8> {
    opinion_labels(&sentence.tokens, lexicon, window)
}

pub fn opinion_labels<S: AsRef<str>>(tokens: &[S], lexicon: &OpinionLexicon, window: usize) -> Vec<u8> {
    let is_opinion: Vec<bool> = tokens.iter().map(|t| lexicon.contains(t.as_ref())).collect();
    (0..tokens.len())
        .map(|t| {
            let lo = t.saturating_sub(window);
            let hi = (t + window).min(tokens.len().saturating_sub(1));
            (lo..=hi).any(|u| u != t && is_opinion[u]) as u8
        })
        .collect()
}

/// Token vocabulary with `<unk>` at index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::from_tokens(std::iter::empty::<String>())
    }
}

impl Vocabulary {
    /// Builds a vocabulary in first-seen order; `<unk>` is always index 0.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary {
            tokens: vec![UNK.to_string()],
            index: HashMap::from([(UNK.to_string(), 0)]),
        };
        for tok in tokens {
            let tok = tok.into();
            if !vocab.index.contains_key(&tok) {
                vocab.index.insert(tok.clone(), vocab.tokens.len());
                vocab.tokens.push(tok);
            }
        }
        vocab
    }

    pub fn from_sentences<'a>(sets: impl IntoIterator<Item = &'a [Sentence]>) -> Self {
        Self::from_tokens(
            sets.into_iter()
                .flat_map(|s| s.iter())
                .flat_map(|s| s.tokens.iter().cloned()),
        )
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Exact match, then lowercase, then `<unk>`.
    pub fn lookup(&self, token: &str) -> usize {
        self.get(token)
            .or_else(|| self.get(&token.to_lowercase()))
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    pub vocabulary: Vocabulary,
    /// `|V| x d`
    pub vectors: Tensor<T>,
    pub oov_range: f64,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn vector(&self, token: &str) -> &[T] {
        self.vectors.row(self.vocabulary.lookup(token))
    }
}

/// Builds an embedding table for `vocabulary`. Tokens found in the file
/// (exactly, else lowercased) take the file vector; every other row,
/// including `<unk>`, is drawn from `U(-0.25, 0.25)` with the seeded generator.
pub fn load_embeddings<T: Scalar>(
    path: Option<&Path>,
    vocabulary: &Vocabulary,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingTable<T>> {
    let found = match path {
        Some(p) => read_embedding_file(BufReader::new(File::open(p)?), vocabulary, dim)?,
        None => HashMap::new(),
    };
    Ok(build_table(found, vocabulary, dim, seed))
}

/// Like [`load_embeddings`] but reads the vectors from any buffered source.
pub fn load_embeddings_from<T: Scalar, R: BufRead>(
    reader: R,
    vocabulary: &Vocabulary,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingTable<T>> {
    let found = read_embedding_file(reader, vocabulary, dim)?;
    Ok(build_table(found, vocabulary, dim, seed))
}

fn read_embedding_file<R: BufRead>(
    reader: R,
    vocabulary: &Vocabulary,
    dim: usize,
) -> Result<HashMap<String, Vec<f64>>> {
    let wanted: HashSet<String> = vocabulary
        .tokens()
        .iter()
        .skip(1)
        .flat_map(|t| [t.clone(), t.to_lowercase()])
        .collect();
    let mut found = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(' ').collect();
        if lineno == 1 && fields.len() == 2 && fields.iter().all(|f| f.parse::<u64>().is_ok()) {
            continue;
        }
        if fields.len() != dim + 1 {
            return Err(Error::parse(
                lineno,
                format!("expected {dim} values, found {}", fields.len() - 1),
            ));
        }
        if !wanted.contains(fields[0]) || found.contains_key(fields[0]) {
            continue;
        }
        let values = fields[1..]
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("bad number `{v}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        found.insert(fields[0].to_string(), values);
    }
    Ok(found)
}

fn build_table<T: Scalar>(
    found: HashMap<String, Vec<f64>>,
    vocabulary: &Vocabulary,
    dim: usize,
    seed: u64,
) -> EmbeddingTable<T> {
    let mut rng = seeded_rng(seed);
    let mut data = Vec::with_capacity(vocabulary.len() * dim);
    for (i, tok) in vocabulary.tokens().iter().enumerate() {
        let hit = if i == 0 {
            None
        } else {
            found.get(tok).or_else(|| found.get(&tok.to_lowercase()))
        };
        match hit {
            Some(v) => data.extend(v.iter().map(|&x| T::lit(x))),
            None => {
                use rand::Rng;
                data.extend((0..dim).map(|_| T::lit(rng.gen_range(-OOV_RANGE..OOV_RANGE))))
            }
        }
    }
    EmbeddingTable {
        vocabulary: vocabulary.clone(),
        vectors: Tensor::matrix(vocabulary.len(), dim, data).expect("consistent shape"),
        oov_range: OOV_RANGE,
    }
}

/// Bundled 20-sentence training corpus with its dev split and lexicon.
pub mod synthetic {
    use super::{parse_conll, Dataset, OpinionLexicon};
    use crate::error::Result;

    pub const TRAIN: &str = include_str!("../data/synthetic/train.txt");
    pub const DEV: &str = include_str!("../data/synthetic/dev.txt");
    pub const LEXICON: &str = include_str!("../data/synthetic/lexicon.txt");

    pub fn dataset() -> Result<Dataset> {
        Ok(Dataset {
            name: "synthetic".into(),
            train: parse_conll(TRAIN)?,
            dev: parse_conll(DEV)?,
            test: Vec::new(),
        })
    }

    pub fn lexicon() -> OpinionLexicon {
        OpinionLexicon::parse(LEXICON)
    }
}

/// Seeded shuffle; the first `ceil(fraction * n)` sentences become the dev split.
pub fn split_dev(
    train: &[Sentence],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<Sentence>, Vec<Sentence>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("dev fraction {fraction} not in (0, 1)")));
    }
    let n = train.len();
    if n < 2 {
        return Err(Error::Config(format!("cannot split {n} sentence(s)")));
    }
    let n_dev = (fraction * n as f64).ceil() as usize;
    if n_dev >= n {
        return Err(Error::Config(format!(
            "dev fraction {fraction} leaves no training data out of {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(seed));
    let dev = order[..n_dev].iter().map(|&i| train[i].clone()).collect();
    let rest = order[n_dev..].iter().map(|&i| train[i].clone()).collect();
    Ok((rest, dev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sentiment::*;

    const PROCESSOR_TOKENS: [&str; 13] = [
        "The", "AMD", "Turin", "Processor", "seems", "to", "always", "perform", "much", "better",
        "than", "Intel", ".",
    ];

    fn processor_sentence() -> Sentence {
        Sentence::new(
            "t1",
            PROCESSOR_TOKENS.iter().map(|s| s.to_string()).collect(),
            vec![TargetSpan::new(1, 3, Pos), TargetSpan::new(11, 11, Neg)],
        )
        .unwrap()
    }

    #[test]
    fn parse_small_sentence() {
        let s = parse_conll("The\tO\nIntel\tS-NEG\n.\tO\n\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].tokens, vec!["The", "Intel", "."]);
        assert_eq!(s[0].spans, vec![TargetSpan::new(1, 1, Neg)]);
        assert!(parse_conll("").unwrap().is_empty());
    }

    #[test]
    fn parse_processor_sentence() {
        let tags = "O B-POS I-POS E-POS O O O O O O O S-NEG O";
        let text: String = PROCESSOR_TOKENS
            .iter()
            .zip(tags.split(' '))
            .map(|(t, g)| format!("{t}\t{g}\n"))
            .collect();
        let s = parse_conll(&text).unwrap();
        assert_eq!(s[0].spans, processor_sentence().spans);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_conll("a\tO\nb\tO\tX\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_conll("a\tO\n\nb\tB-FOO\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn joint_and_unified_export() {
        let s = vec![processor_sentence()];
        let joint = convert_spans_to_conll(&s, TagScheme::Joint).unwrap();
        let boundary: Vec<&str> = joint.lines().filter(|l| !l.is_empty()).map(|l| l.split('\t').nth(1).unwrap()).collect();
        let sentiment: Vec<&str> = joint.lines().filter(|l| !l.is_empty()).map(|l| l.split('\t').nth(2).unwrap()).collect();
        assert_eq!(boundary.join(" "), "O B I E O O O O O O O S O");
        assert_eq!(sentiment.join(" "), "O POS POS POS O O O O O O O NEG O");
        let unified = convert_spans_to_conll(&s, TagScheme::Unified).unwrap();
        let tags: Vec<&str> = unified.lines().filter(|l| !l.is_empty()).map(|l| l.split('\t').nth(1).unwrap()).collect();
        assert_eq!(tags.join(" "), "O B-POS I-POS E-POS O O O O O O O S-NEG O");
        assert_eq!(convert_spans_to_conll(&[], TagScheme::Joint).unwrap(), "");
        assert_eq!(parse_joint_conll(&joint).unwrap()[0].spans, s[0].spans);
    }

    #[test]
    fn export_requires_sentiment() {
        let s = Sentence::new("x", vec!["a".into()], vec![TargetSpan::boundary(0, 0)]).unwrap();
        assert!(matches!(
            convert_spans_to_conll(std::slice::from_ref(&s), TagScheme::Unified),
            Err(Error::MissingSentiment { .. })
        ));
        assert!(convert_spans_to_conll(&[s], TagScheme::Boundary).is_ok());
    }

    #[test]
    fn oe_labels_processor_sentence() {
        let lex = OpinionLexicon::from_words(["better"]);
        let labels = generate_oe_labels(&processor_sentence(), &lex, 3);
        // opinion word at index 9: neighbours 6..=8 and 10..=12, centre excluded
        assert_eq!(labels, vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 0, 1, 1, 1]);
        assert!(generate_oe_labels(&processor_sentence(), &OpinionLexicon::default(), 3)
            .iter()
            .all(|&l| l == 0));
        let toks = ["x", "y", "z"];
        let all = OpinionLexicon::from_words(toks);
        assert_eq!(opinion_labels(&toks, &all, 1), vec![1, 1, 1]);
    }

    #[test]
    fn lexicon_format() {
        let lex = OpinionLexicon::parse("# comment\nGood\n\n  bad \n");
        assert_eq!(lex.words.len(), 2);
        assert!(lex.contains("GOOD") && lex.contains("bad"));
    }

    #[test]
    fn embeddings_from_file_and_oov() {
        let vocab = Vocabulary::from_tokens(["a", "Bee", "zzz"]);
        let text = "2 2\na 0.1 0.2\nbee 0.5 -0.5\n";
        let t: EmbeddingTable<f64> = load_embeddings_from(text.as_bytes(), &vocab, 2, 7).unwrap();
        assert_eq!(t.vector("a"), &[0.1, 0.2]);
        assert_eq!(t.vector("Bee"), &[0.5, -0.5]);
        assert!(t.vector("zzz").iter().all(|v| v.abs() < 0.25));
        let again: EmbeddingTable<f64> = load_embeddings_from(text.as_bytes(), &vocab, 2, 7).unwrap();
        assert_eq!(t, again);
        let none: EmbeddingTable<f64> = load_embeddings(None, &vocab, 3, 1).unwrap();
        assert_eq!(none.vectors.shape(), &[4, 3]);
        assert!(none.vectors.data().iter().all(|v| v.abs() < 0.25));
    }

    #[test]
    fn embedding_dimension_mismatch() {
        let vocab = Vocabulary::from_tokens(["a"]);
        let err = load_embeddings_from::<f64, _>("a 0.1 0.2\nb 0.3\n".as_bytes(), &vocab, 2, 0)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn bundled_corpus() {
        let d = synthetic::dataset().unwrap();
        assert_eq!(d.train.len(), 20);
        assert!(!d.dev.is_empty());
        let counts = sentiment_counts(&d.train);
        assert!(counts.iter().all(|&c| c > 0));
        assert!(d.train.iter().flat_map(|s| &s.spans).any(|s| s.len() >= 3));
        assert!(synthetic::lexicon().contains("great"));
    }

    #[test]
    fn vocabulary_lookup_fallbacks() {
        let v = Vocabulary::from_tokens(["apple", "Pie"]);
        assert_eq!(v.lookup("apple"), 1);
        assert_eq!(v.lookup("APPLE"), 1);
        assert_eq!(v.lookup("Pie"), 2);
        assert_eq!(v.lookup("pie"), 0);
        assert_eq!(v.lookup("missing"), 0);
    }

    fn sentences(n: usize) -> Vec<Sentence> {
        (0..n)
            .map(|i| Sentence::new(format!("s{i}"), vec![format!("w{i}")], vec![]).unwrap())
            .collect()
    }

    #[test]
    fn dev_split_sizes_and_determinism() {
        let (tr, dev) = split_dev(&sentences(10), 0.1, 3).unwrap();
        assert_eq!((tr.len(), dev.len()), (9, 1));
        let (tr, dev) = split_dev(&sentences(4), 0.5, 3).unwrap();
        assert_eq!((tr.len(), dev.len()), (2, 2));
        assert_eq!(split_dev(&sentences(10), 0.3, 9).unwrap(), split_dev(&sentences(10), 0.3, 9).unwrap());
        let ids: HashSet<_> = tr.iter().map(|s| &s.id).collect();
        assert!(dev.iter().all(|s| !ids.contains(&s.id)));
        assert!(split_dev(&sentences(1), 0.5, 0).is_err());
        assert!(split_dev(&sentences(5), 1.0, 0).is_err());
    }

    #[test]
    fn span_records_roundtrip() {
        let s = vec![processor_sentence()];
        let text = write_span_records(&s).unwrap();
        assert_eq!(parse_span_records(&text).unwrap(), s);
        assert!(parse_span_records("{\"id\":\"x\",\"tokens\":[\"a\"],\"spans\":[{\"start\":0,\"end\":2}]}").is_err());
    }
}
