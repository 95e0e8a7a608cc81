mod config;

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use itermine::align::{align_document_pair, align_document_pair_by_length, DEFAULT_MIN_SCORE};
use itermine::bleu::{corpus_bleu, sentence_bleu, Smoothing, MAX_ORDER};
use itermine::corpus::ingest_jsonl;
use itermine::filter::apply_filters;
use itermine::io::write_atomic;
use itermine::pipeline::{
    bridge_multiparallel, corpus_grid, read_pairs, run_iteration, should_stop, write_iteration,
    write_pairs, MultiParallelTable,
};
use itermine::retrieval::{
    pseudo_retrieval_accuracy, read_doc_pairs, select_pairs, tentative_pairs, threshold_sweep,
    write_doc_pairs, RetrievalParams, RetrievalTokenizer, DEFAULT_THRESHOLD, DEFAULT_WINDOW_DAYS,
};
use itermine::subword::{train_unigram, union_vocabs, SubwordVocab, UnigramConfig};
use itermine::synth::{generate, Rendering, SynthConfig};
use itermine::translate::{build_cache, Memo, DEFAULT_BATCH_SIZE};
use itermine::{FilterConfig, GroundTruth, LangCode, SentencePair, TranslatorSpec};

use config::{translator_spec, CliConfig};

/// Mine sentence-aligned parallel corpora from multilingual article collections.
#[derive(Parser)]
#[command(name = "itermine", version)]
struct Cli {
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize and validate a JSONL document file.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train one unigram vocabulary per language and their union.
    TrainSubwords {
        #[arg(long)]
        store: PathBuf,
        /// Directory for vocab.<xx>.tsv and union.tsv.
        #[arg(long)]
        out_dir: PathBuf,
        /// Tokens per language.
        #[arg(long, default_value_t = 4000)]
        vocab_size: usize,
        /// Longest seed piece, in characters.
        #[arg(long, default_value_t = 8)]
        seed_max_len: usize,
        /// Languages to train (default: all in the store).
        #[arg(long, value_delimiter = ',')]
        langs: Vec<LangCode>,
    },
    /// Translate text lines, or build a translation cache for a store.
    Translate {
        #[arg(long)]
        src: LangCode,
        #[arg(long)]
        tgt: LangCode,
        /// Build a cache for every sentence of this store instead of reading lines.
        #[arg(long)]
        store: Option<PathBuf>,
        /// Input lines (default: standard input).
        #[arg(long, conflicts_with = "store")]
        input: Option<PathBuf>,
        /// Output file (required with --store; default standard output).
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Retrieve document pairs between a language and the pivot.
    AlignDocs {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        src: LangCode,
        #[arg(long)]
        pivot: LangCode,
        #[arg(long, default_value_t = DEFAULT_WINDOW_DAYS)]
        window_days: u32,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Subword vocabulary for index terms (default: words).
        #[arg(long)]
        subword_vocab: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        /// Also print accepted-pair counts at thresholds 0.00, 0.05, ..., 1.00.
        #[arg(long, default_value_t = false)]
        sweep: bool,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Align sentences inside retrieved document pairs.
    AlignSents {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        doc_pairs: PathBuf,
        #[arg(long)]
        pivot: LangCode,
        #[arg(long, value_enum, default_value_t = Method::Bleualign)]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_MIN_SCORE)]
        min_score: f64,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Drop pairs failing the length-ratio or script checks, and duplicates.
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Join pivot-centric corpora into non-pivot pairs.
    Bridge {
        /// Pair files, one per language, all sharing the pivot.
        #[arg(long, num_args = 1.., required = true)]
        pairs: Vec<PathBuf>,
        /// Directory for bridge.<x>-<y>.tsv.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print the upper-triangular grid of pair counts.
    Grid {
        #[arg(long, num_args = 1.., required = true)]
        pairs: Vec<PathBuf>,
        /// Pair files of an earlier run; cells then show deltas.
        #[arg(long, num_args = 1..)]
        baseline: Vec<PathBuf>,
        /// Emit TSV instead of a table.
        #[arg(long, default_value_t = false)]
        tsv: bool,
    },
    /// Score hypotheses against references.
    Bleu {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long, default_value_t = MAX_ORDER)]
        max_order: usize,
        #[arg(long, value_enum, default_value_t = SmoothingArg::Exp)]
        smoothing: SmoothingArg,
        /// Print one score per line instead of the corpus score.
        #[arg(long, default_value_t = false)]
        sentence: bool,
    },
    /// Pseudo retrieval accuracy of document pairs.
    Accuracy {
        #[arg(long)]
        doc_pairs: PathBuf,
        /// Two-column reference file; otherwise inferred from store metadata.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, required_unless_present = "truth")]
        store: Option<PathBuf>,
        #[arg(long, required_unless_present = "truth")]
        src: Option<LangCode>,
        #[arg(long, required_unless_present = "truth")]
        pivot: Option<LangCode>,
        #[arg(long, default_value_t = 0)]
        tolerance_days: u32,
    },
    /// Run mining iterations until growth stalls.
    Iterate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Overrides the config's translator seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a synthetic collection with known pairs.
    MakeFixture {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = LangCode::En)]
        pivot: LangCode,
        #[arg(long, value_delimiter = ',', default_value = "hi,ta")]
        langs: Vec<LangCode>,
        #[arg(long, default_value_t = 100)]
        stories: usize,
        #[arg(long, value_enum, default_value_t = RenderingArg::Lexicon)]
        rendering: RenderingArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct BackendArgs {
    #[arg(long, default_value = "identity", value_parser = ["identity", "dictionary", "exec", "cached"])]
    backend: String,
    /// Dictionary file for the dictionary backend.
    #[arg(long)]
    dictionary: Option<PathBuf>,
    /// Probability of leaving a token untranslated (dictionary backend).
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Program and arguments for the exec backend.
    #[arg(long, num_args = 1.., allow_hyphen_values = true)]
    command: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_BATCH_SIZE)]
    batch_size: usize,
    /// Cache file for the cached backend.
    #[arg(long)]
    cache: Option<PathBuf>,
}

impl BackendArgs {
    fn spec(&self) -> Result<TranslatorSpec> {
        translator_spec(
            &self.backend,
            self.dictionary.clone(),
            self.noise,
            self.seed,
            self.command.clone(),
            self.batch_size,
            self.cache.clone(),
        )
    }
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long, default_value_t = 0.5)]
    ratio_lo: f64,
    #[arg(long, default_value_t = 2.0)]
    ratio_hi: f64,
    #[arg(long, default_value_t = 0.2)]
    max_foreign_fraction: f64,
    #[arg(long, default_value_t = 1)]
    min_tokens: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Bleualign,
    Galechurch,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmoothingArg {
    Exp,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderingArg {
    Shared,
    Lexicon,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest { input, output } => {
            let store = ingest_jsonl(&input)?;
            store.write_jsonl(&output)?;
            for (lang, ids) in store.ids_by_lang() {
                eprintln!("{lang}: {} documents", ids.len());
            }
        }
        Command::TrainSubwords {
            store,
            out_dir,
            vocab_size,
            seed_max_len,
            langs,
        } => {
            let store = ingest_jsonl(&store)?;
            let langs: Vec<LangCode> = if langs.is_empty() {
                store.languages().collect()
            } else {
                langs
            };
            let config = UnigramConfig {
                target_size: vocab_size,
                seed_max_len,
                ..UnigramConfig::default()
            };
            let mut vocabs = Vec::new();
            for lang in langs {
                let corpus: Vec<&str> = store
                    .documents(lang)
                    .flat_map(|d| d.sentences.iter().map(String::as_str))
                    .collect();
                let vocab = train_unigram(lang, &corpus, &config)
                    .with_context(|| format!("training {lang}"))?;
                vocab.write_tsv(&out_dir.join(format!("vocab.{lang}.tsv")))?;
                eprintln!("{lang}: {} tokens", vocab.len());
                vocabs.push(vocab);
            }
            let union = union_vocabs(&vocabs);
            write_atomic(&out_dir.join("union.tsv"), |w| {
                w.write_all(union.to_tsv().as_bytes())
            })?;
            eprintln!("union: {} tokens", union.len());
        }
        Command::Translate {
            src,
            tgt,
            store,
            input,
            output,
            backend,
        } => {
            let translator = backend.spec()?.build()?;
            if let Some(store) = store {
                let output = output.context("--output is required with --store")?;
                let store = ingest_jsonl(&store)?;
                let n = build_cache(&store, &*translator, src, tgt, &output)?;
                eprintln!("cached {n} sentences");
            } else {
                let lines: Vec<String> = match input {
                    Some(p) => std::fs::read_to_string(&p)
                        .with_context(|| format!("reading {}", p.display()))?
                        .lines()
                        .map(str::to_string)
                        .collect(),
                    None => std::io::stdin()
                        .lock()
                        .lines()
                        .collect::<std::io::Result<_>>()?,
                };
                let out = translator.translate(src, tgt, &lines)?;
                let text: String = out.iter().map(|l| format!("{l}\n")).collect();
                emit(output.as_deref(), &text)?;
            }
        }
        Command::AlignDocs {
            store,
            src,
            pivot,
            window_days,
            threshold,
            subword_vocab,
            output,
            sweep,
            backend,
        } => {
            let store = ingest_jsonl(&store)?;
            let translator = Memo::new(backend.spec()?.build()?);
            let mut params = RetrievalParams::new(pivot);
            params.window_days = window_days;
            params.threshold = threshold;
            if let Some(p) = subword_vocab {
                params.tokenizer =
                    RetrievalTokenizer::Subword(SubwordVocab::read_tsv(&p, pivot)?.into());
            }
            let tentative = tentative_pairs(&store, src, &store, pivot, &translator, &params)?;
            let pairs = select_pairs(&tentative, threshold);
            write_doc_pairs(&output, &pairs)?;
            eprintln!("{} document pairs", pairs.len());
            if sweep {
                let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
                for (t, n) in threshold_sweep(&tentative, &grid) {
                    println!("{t:.2}\t{n}");
                }
            }
        }
        Command::AlignSents {
            store,
            doc_pairs,
            pivot,
            method,
            min_score,
            output,
            backend,
        } => {
            let store = ingest_jsonl(&store)?;
            let translator = Memo::new(backend.spec()?.build()?);
            let mut out = Vec::new();
            for dp in read_doc_pairs(&doc_pairs)? {
                let src = store
                    .get(&dp.src_id)
                    .with_context(|| format!("unknown document {}", dp.src_id))?;
                let tgt = store
                    .get(&dp.tgt_id)
                    .with_context(|| format!("unknown document {}", dp.tgt_id))?;
                out.extend(match method {
                    Method::Bleualign => {
                        align_document_pair(&dp, src, tgt, &translator, pivot, min_score)?
                    }
                    Method::Galechurch => align_document_pair_by_length(src, tgt)?,
                });
            }
            write_pairs(&output, &out)?;
            eprintln!("{} sentence pairs", out.len());
        }
        Command::Filter {
            input,
            output,
            filter,
        } => {
            let cfg = FilterConfig {
                ratio_lo: filter.ratio_lo,
                ratio_hi: filter.ratio_hi,
                max_foreign_fraction: filter.max_foreign_fraction,
                min_tokens: filter.min_tokens,
            };
            cfg.validate()?;
            let pairs = read_pairs(&input)?;
            let mut groups: Vec<((LangCode, LangCode), Vec<SentencePair>)> = Vec::new();
            for p in pairs.iter() {
                let key = (p.src_lang, p.tgt_lang);
                match groups.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, g)) => g.push(p.clone()),
                    None => groups.push((key, vec![p.clone()])),
                }
            }
            let kept: Vec<SentencePair> = groups
                .iter()
                .flat_map(|((s, t), g)| apply_filters(g, *s, *t, &cfg))
                .collect();
            write_pairs(&output, &kept)?;
            eprintln!("kept {} of {} pairs", kept.len(), pairs.len());
        }
        Command::Bridge { pairs, out_dir } => {
            let table = bridge_multiparallel(&load_corpora(&pairs)?);
            for (&(x, y), set) in table.iter() {
                let text: String = set.iter().map(|(a, b)| format!("{a}\t{b}\n")).collect();
                write_atomic(&out_dir.join(format!("bridge.{x}-{y}.tsv")), |w| {
                    w.write_all(text.as_bytes())
                })?;
                eprintln!("{x}-{y}: {} pairs", set.len());
            }
        }
        Command::Grid {
            pairs,
            baseline,
            tsv,
        } => {
            let table = full_table(&pairs)?;
            let base = if baseline.is_empty() {
                None
            } else {
                Some(full_table(&baseline)?)
            };
            let grid = corpus_grid(&table, base.as_ref());
            if tsv {
                print!("{}", grid.to_tsv());
            } else {
                print!("{grid}");
            }
        }
        Command::Bleu {
            hyp,
            reference,
            max_order,
            smoothing,
            sentence,
        } => {
            let read = |p: &Path| -> Result<Vec<String>> {
                Ok(std::fs::read_to_string(p)
                    .with_context(|| format!("reading {}", p.display()))?
                    .lines()
                    .map(str::to_string)
                    .collect())
            };
            let (h, r) = (read(&hyp)?, read(&reference)?);
            let smoothing = match smoothing {
                SmoothingArg::Exp => Smoothing::Exp,
                SmoothingArg::None => Smoothing::None,
            };
            if sentence {
                if h.len() != r.len() {
                    bail!("{} hypotheses but {} references", h.len(), r.len());
                }
                for (a, b) in h.iter().zip(&r) {
                    println!("{}", sentence_bleu(a, b, max_order, smoothing)?);
                }
            } else {
                println!("{}", corpus_bleu(&h, &r, max_order, smoothing)?);
            }
        }
        Command::Accuracy {
            doc_pairs,
            truth,
            store,
            src,
            pivot,
            tolerance_days,
        } => {
            let pairs = read_doc_pairs(&doc_pairs)?;
            let truth = match truth {
                Some(p) => GroundTruth::read_tsv(&p)?,
                None => {
                    let (Some(store), Some(src), Some(pivot)) = (store, src, pivot) else {
                        unreachable!("clap enforces --store, --src and --pivot without --truth")
                    };
                    let store = ingest_jsonl(&store)?;
                    GroundTruth::from_metadata(&store, src, &store, pivot, tolerance_days)
                }
            };
            let acc = pseudo_retrieval_accuracy(&pairs, &truth)?;
            println!("accuracy = {acc:.2} ({} reference pairs)", truth.len());
        }
        Command::Iterate {
            config,
            output,
            seed,
        } => iterate(&config, output, seed)?,
        Command::MakeFixture {
            out_dir,
            pivot,
            langs,
            stories,
            rendering,
            seed,
        } => {
            let mut cfg = SynthConfig::new(pivot, langs, stories, seed);
            cfg.rendering = match rendering {
                RenderingArg::Shared => Rendering::Shared,
                RenderingArg::Lexicon => Rendering::Lexicon,
            };
            if cfg.languages.contains(&pivot) {
                bail!("--langs must not include the pivot {pivot}");
            }
            let fixture = generate(&cfg);
            fixture.write(&out_dir, pivot)?;
            eprintln!("{} documents", fixture.store.len());
        }
    }
    Ok(())
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, |w| w.write_all(text.as_bytes()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_corpora(files: &[PathBuf]) -> Result<BTreeMap<LangCode, Vec<SentencePair>>> {
    let mut corpora: BTreeMap<LangCode, Vec<SentencePair>> = BTreeMap::new();
    let mut pivot = None;
    for f in files {
        for p in read_pairs(f)? {
            if *pivot.get_or_insert(p.tgt_lang) != p.tgt_lang {
                bail!("{}: pairs do not share one pivot language", f.display());
            }
            corpora.entry(p.src_lang).or_default().push(p);
        }
    }
    Ok(corpora)
}

fn full_table(files: &[PathBuf]) -> Result<MultiParallelTable> {
    let corpora = load_corpora(files)?;
    let mut table = bridge_multiparallel(&corpora);
    table.insert_corpora(&corpora);
    Ok(table)
}

fn iterate(config: &Path, output: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
    let cli_cfg = CliConfig::load(config)?;
    let cfg = cli_cfg.iteration_config()?;
    let store_path = cli_cfg
        .store
        .as_deref()
        .context("config needs a store path")?;
    let root = output
        .or_else(|| cli_cfg.output.clone())
        .context("no output directory (set output in the config or pass --output)")?;
    let store = ingest_jsonl(store_path)?;
    let mut history = Vec::new();
    let mut last = None;
    for k in 1.. {
        let translator = cli_cfg.translator_spec(k, seed)?.build()?;
        let out = run_iteration(&cfg, &store, &*translator, k, history.last())?;
        let dir = write_iteration(&root, &out)?;
        let r = &out.report;
        eprintln!(
            "iteration {k}: {} document pairs ({:+}), {} sentence pairs -> {}",
            r.total_doc_pairs,
            r.doc_pair_delta,
            r.total_sentence_pairs,
            dir.display()
        );
        history.push(out.report.clone());
        last = Some(out);
        if should_stop(&history, &cfg) {
            break;
        }
    }
    if let Some(out) = last {
        let mut table = bridge_multiparallel(&out.corpora);
        table.insert_corpora(&out.corpora);
        let grid = corpus_grid(&table, None);
        write_atomic(&root.join("grid.txt"), |w| {
            w.write_all(grid.to_string().as_bytes())
        })?;
    }
    Ok(())
}
