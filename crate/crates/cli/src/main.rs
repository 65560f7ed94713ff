use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gerkit_core::augment::{
    apply_plan, plan_augmentation, read_wav, write_wav, AugmentationPlan, DirNoiseLoader, TargetTransform,
};
use gerkit_core::ger::correct_selection;
use gerkit_core::harness::{
    build_backend, build_scorers, emit_report, ingest_manifest, BackendKind, Pipeline, PipelineConfig, ReportFormat,
};
use gerkit_core::metrics::{dual_reference_evaluate, Category, EvaluationRecord, SemScoreWeights};
use gerkit_core::nbest::{concat_segments, parse_nbest_file, select_diverse, NBestError, NBestList, SelectionResult};

#[derive(Parser)]
#[command(
    name = "gerkit",
    version,
    about = "N-best selection, generative error correction and evaluation"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

/// Overrides for values in the config file.
#[derive(Args)]
struct GlobalArgs {
    /// TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n_best: Option<usize>,
    /// Number of hypotheses to select.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// passthrough, oracle or remote.
    #[arg(long, global = true)]
    ger_backend: Option<BackendKind>,
    #[arg(long, global = true)]
    ger_endpoint: Option<String>,
    #[arg(long, global = true)]
    scorer_endpoint: Option<String>,
    /// SemScore weights as `semantic,phonetic,entailment`.
    #[arg(long, global = true)]
    weights: Option<SemScoreWeights>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// table or json.
    #[arg(long, global = true)]
    format: Option<ReportFormat>,
    #[arg(long, global = true)]
    concurrency: Option<usize>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Pick a diverse subset of an N-best document.
    Select { nbest: PathBuf },
    /// Select hypotheses and run the correction backend on them.
    Ger {
        nbest: PathBuf,
        /// Reference transcription, required by the oracle backend.
        #[arg(long)]
        reference: Option<String>,
    },
    /// Score line-aligned hypothesis and reference files.
    Score {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Disfluency-free references; the closer of the two is used per line.
        #[arg(long)]
        clean: Option<PathBuf>,
        #[arg(long, default_value = "DAC")]
        category: Category,
        /// Also write the per-line records as JSON Lines.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Run selection, correction and scoring over a manifest.
    Pipeline {
        manifest: PathBuf,
        /// Per-utterance evaluation records (JSON Lines).
        #[arg(long)]
        records: Option<PathBuf>,
        /// Correction results (JSON Lines).
        #[arg(long)]
        corrections: Option<PathBuf>,
        /// Quarantined failures (JSON Lines).
        #[arg(long)]
        failures: Option<PathBuf>,
    },
    /// Draw augmentation plans for every manifest row (JSON Lines).
    AugmentPlan {
        manifest: PathBuf,
        /// Noise directory; its WAV files form the pool when the config has none.
        #[arg(long)]
        noise_dir: Option<PathBuf>,
    },
    /// Execute augmentation plans and write the augmented audio.
    AugmentApply {
        plans: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        noise_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Render a category report from evaluation records.
    Report { records: PathBuf },
}

fn load_config(g: &GlobalArgs) -> Result<PipelineConfig> {
    let mut c = match &g.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = g.n_best {
        c.pipeline.n_best = v;
    }
    if let Some(v) = g.k {
        c.pipeline.k_select = v;
    }
    if let Some(v) = g.ger_backend {
        c.ger.backend = v;
    }
    if let Some(v) = &g.ger_endpoint {
        c.ger.endpoint = Some(v.clone());
    }
    if let Some(v) = &g.scorer_endpoint {
        c.metrics.scorer_endpoint = Some(v.clone());
    }
    if let Some(v) = g.weights {
        c.metrics.weights = v;
    }
    if let Some(v) = g.seed {
        c.pipeline.seed = v;
    }
    if let Some(v) = g.format {
        c.pipeline.report_format = v;
    }
    if let Some(v) = g.concurrency {
        c.pipeline.concurrency = v;
    }
    c.validate()?;
    Ok(c)
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn jsonl<T: serde::Serialize>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("serializable");
        out.push(b'\n');
    }
    out
}

fn pretty_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

fn select_from_file(path: &Path, config: &PipelineConfig) -> Result<SelectionResult> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let mut doc = parse_nbest_file(&bytes)?;
    doc.truncate(config.pipeline.n_best);
    let pool = match concat_segments(&doc) {
        Ok(pool) => pool,
        Err(NBestError::EmptySegments { .. }) => NBestList::from_texts(doc.utterance_id.clone(), [""]),
        Err(e) => return Err(e.into()),
    };
    Ok(select_diverse(&pool, config.pipeline.k_select)?)
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::to_string).collect())
}

fn read_records(path: &Path) -> Result<Vec<EvaluationRecord>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(&text)?);
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{}: line {}", path.display(), i + 1)))
        .collect()
}

fn run(cli: Cli) -> Result<ExitCode> {
    let config = load_config(&cli.global)?;
    let out = cli.global.out.as_deref();
    let format = config.pipeline.report_format;

    match cli.command {
        Command::Select { nbest } => {
            let selection = select_from_file(&nbest, &config)?;
            write_output(out, &pretty_json(&selection))?;
        }
        Command::Ger { nbest, reference } => {
            let selection = select_from_file(&nbest, &config)?;
            let backend = build_backend(&config)?;
            let result = correct_selection(backend.as_ref(), selection, reference.as_deref())?;
            match format {
                ReportFormat::Json => write_output(out, &pretty_json(&result))?,
                ReportFormat::Table => write_output(out, format!("{}\n", result.final_text).as_bytes())?,
            }
        }
        Command::Score {
            hyp,
            reference,
            clean,
            category,
            records,
        } => {
            let hyps = read_lines(&hyp)?;
            let refs = read_lines(&reference)?;
            let cleans = match &clean {
                Some(path) => read_lines(path)?,
                None => refs.clone(),
            };
            if hyps.len() != refs.len() || cleans.len() != refs.len() {
                bail!(
                    "line counts differ: {} hypotheses, {} references, {} clean references",
                    hyps.len(),
                    refs.len(),
                    cleans.len()
                );
            }
            let scorers = build_scorers(&config);
            let mut evaluated = Vec::with_capacity(hyps.len());
            for (i, ((h, v), c)) in hyps.iter().zip(&refs).zip(&cleans).enumerate() {
                let score = dual_reference_evaluate(h, v, c, &config.metrics.weights, &scorers)
                    .with_context(|| format!("line {}", i + 1))?;
                evaluated.push(EvaluationRecord::new(format!("line-{}", i + 1), category, score));
            }
            if let Some(path) = records {
                fs::write(&path, jsonl(&evaluated)).with_context(|| format!("writing {}", path.display()))?;
            }
            write_output(out, &emit_report(&evaluated, format)?)?;
        }
        Command::Pipeline {
            manifest,
            records,
            corrections,
            failures,
        } => {
            let manifest = ingest_manifest(&manifest)?;
            let pipeline = Pipeline::from_config(config)?;
            let result = pipeline.run(&manifest);
            for f in &result.failures {
                eprintln!("line {} ({}): {} failed: {}", f.line, f.utterance_id, f.stage, f.message);
            }
            if let Some(path) = records {
                fs::write(&path, jsonl(&result.records)).with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = corrections {
                fs::write(&path, jsonl(&result.corrections)).with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = failures {
                fs::write(&path, jsonl(&result.failures)).with_context(|| format!("writing {}", path.display()))?;
            }
            if !result.records.is_empty() {
                write_output(out, &emit_report(&result.records, format)?)?;
            }
            return Ok(ExitCode::from(result.status().exit_code() as u8));
        }
        Command::AugmentPlan { manifest, noise_dir } => {
            let manifest = ingest_manifest(&manifest)?;
            let mut augment = config.augment.clone();
            if augment.noise_pool.is_empty() {
                if let Some(dir) = &noise_dir {
                    augment.noise_pool = DirNoiseLoader::new(dir)
                        .list_ids()
                        .with_context(|| format!("listing {}", dir.display()))?;
                }
            }
            let plans = manifest
                .rows()
                .map(|r| plan_augmentation(config.pipeline.seed, &r.utterance_id, &augment))
                .collect::<Result<Vec<_>, _>>()?;
            write_output(out, &jsonl(&plans))?;
        }
        Command::AugmentApply {
            plans,
            manifest,
            noise_dir,
            out_dir,
        } => {
            let manifest = ingest_manifest(&manifest)?;
            let loader = DirNoiseLoader::new(noise_dir);
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            let mut rows = Vec::new();
            for (i, line) in read_lines(&plans)?.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let plan: AugmentationPlan =
                    serde_json::from_str(line).with_context(|| format!("{}: line {}", plans.display(), i + 1))?;
                let Some(row) = manifest.find(&plan.utterance_id) else {
                    bail!("plan for unknown utterance {:?}", plan.utterance_id);
                };
                let Some(audio_path) = &row.audio_path else {
                    bail!("utterance {:?} has no audio_path", row.utterance_id);
                };
                let speech = read_wav(&manifest.resolve(audio_path))?;
                let (audio, target) = apply_plan(&speech, &plan, &loader, &config.augment)?;
                let wav = out_dir.join(format!("{}.wav", row.utterance_id));
                write_wav(&wav, &audio)?;
                let mut augmented = row.clone();
                augmented.audio_path = Some(wav);
                augmented.nbest_path = None;
                if target == TargetTransform::MakeEmpty {
                    augmented.transcript_raw = String::new();
                }
                rows.push(augmented);
            }
            write_output(out, &jsonl(&rows))?;
        }
        Command::Report { records } => {
            let records = read_records(&records)?;
            write_output(out, &emit_report(&records, format)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
