use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fraud_ast::experiment::{
    self, emit_report, read_model, read_qtable, render_human, render_machine, ClassifierReport, ErrorCategory,
    ExperimentConfig, ExperimentError, OutputFormat, PathReport, RunOutput, RunReport, Timing,
};
use fraud_ast::Execution;

#[derive(Parser)]
#[command(name = "fraud-ast", version, about = "Adaptive stress testing of a card fraud detection system")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Train and evaluate the fraud classifier.
    TrainClassifier(Common),
    /// Learn a Q-table against the detection system and extract paths.
    RunAst {
        #[command(flatten)]
        common: Common,
        /// Use this classifier instead of training one.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Greedy paths from a saved Q-table.
    ExtractPath {
        #[command(flatten)]
        common: Common,
        /// Defaults to `<out>/model.txt`.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Defaults to `<out>/qtable.txt`.
        #[arg(long)]
        qtable: Option<PathBuf>,
    },
    /// Render a saved machine-format report.
    Report {
        #[command(flatten)]
        common: Common,
        /// Defaults to `<out>/report.json`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Full pipeline: classifier, stress testing, report.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// Config file, or one of: defaults, experiment1, experiment2.
    #[arg(long, default_value = "defaults")]
    config: String,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's `output_dir`, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Run every data-parallel loop on the calling thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Machine,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Human => OutputFormat::Human,
            Format::Machine => OutputFormat::Machine,
        }
    }
}

struct Ctx {
    cfg: ExperimentConfig,
    out: PathBuf,
    format: OutputFormat,
    exec: Execution,
}

impl Common {
    fn resolve(&self) -> Result<Ctx, ExperimentError> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        let out = self
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Ctx {
            cfg,
            out,
            format: self.format.into(),
            exec: if self.sequential {
                Execution::Sequential
            } else {
                Execution::default()
            },
        })
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| ExperimentError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn ext(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Human => "txt",
        OutputFormat::Machine => "json",
    }
}

fn run(verb: Verb) -> Result<String, ExperimentError> {
    match verb {
        Verb::TrainClassifier(common) => {
            let ctx = common.resolve()?;
            let cls = experiment::train_classifier(&ctx.cfg, ctx.exec)?;
            experiment::write_model(&cls.model, &ctx.out.join(experiment::MODEL_FILE))?;
            let text = ClassifierReport::new(&ctx.cfg, &cls).render(ctx.format);
            write_file(&ctx.out.join(format!("classifier.{}", ext(ctx.format))), &text)?;
            Ok(text)
        }
        Verb::RunAst { common, model } => {
            let ctx = common.resolve()?;
            let model = match model {
                Some(p) => read_model(&p)?,
                None => {
                    let cls = experiment::train_classifier(&ctx.cfg, ctx.exec)?;
                    experiment::write_model(&cls.model, &ctx.out.join(experiment::MODEL_FILE))?;
                    cls.model
                }
            };
            let started = Instant::now();
            let ast = experiment::run_ast(&ctx.cfg, &model)?;
            let mut timing = Timing::default();
            timing.record("ast", started);
            experiment::write_qtable(&ast.q, &ctx.out.join(experiment::QTABLE_FILE))?;
            experiment::write_convergence(&ast.convergence, &ctx.out.join(experiment::CONVERGENCE_FILE))?;
            write_file(&ctx.out.join(experiment::TIMING_FILE), &timing.to_json())?;
            let report = PathReport {
                format: experiment::REPORT_FORMAT.into(),
                seed: ctx.cfg.seed,
                repetition_rule_enabled: ctx.cfg.rules.repetition_rule_enabled,
                q_states: ast.q.len(),
                paths: ast.paths,
                convergence: Some(ast.convergence),
            };
            let text = report.render(ctx.format);
            write_file(&ctx.out.join(format!("paths.{}", ext(ctx.format))), &text)?;
            Ok(text)
        }
        Verb::ExtractPath { common, model, qtable } => {
            let ctx = common.resolve()?;
            let model = read_model(&model.unwrap_or_else(|| ctx.out.join(experiment::MODEL_FILE)))?;
            let q = read_qtable(&qtable.unwrap_or_else(|| ctx.out.join(experiment::QTABLE_FILE)))?;
            let paths = experiment::extract_paths(&ctx.cfg, &q, &model)?;
            let report = PathReport {
                format: experiment::REPORT_FORMAT.into(),
                seed: ctx.cfg.seed,
                repetition_rule_enabled: ctx.cfg.rules.repetition_rule_enabled,
                q_states: q.len(),
                paths,
                convergence: None,
            };
            Ok(report.render(ctx.format))
        }
        Verb::Report { common, input } => {
            let ctx = common.resolve()?;
            let path = input.unwrap_or_else(|| ctx.out.join(OutputFormat::Machine.file_name()));
            let text = std::fs::read_to_string(&path).map_err(|e| ExperimentError::Io {
                path: path.clone(),
                source: e,
            })?;
            let report = RunReport::from_json(&text).map_err(|e| ExperimentError::Artifact {
                path,
                reason: e.to_string(),
            })?;
            Ok(match ctx.format {
                OutputFormat::Human => render_human(&report),
                OutputFormat::Machine => render_machine(&report),
            })
        }
        Verb::Run(common) => {
            let ctx = common.resolve()?;
            let out: RunOutput = experiment::run_experiment(&ctx.cfg, ctx.exec)?;
            experiment::write_artifacts(&out, &ctx.out, ctx.format)?;
            // The machine report is always kept so `report` can re-render it.
            if ctx.format == OutputFormat::Human {
                emit_report(&out.report, OutputFormat::Machine, &ctx.out)?;
            }
            Ok(match ctx.format {
                OutputFormat::Human => render_human(&out.report),
                OutputFormat::Machine => render_machine(&out.report),
            })
        }
    }
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Config => 3,
        ErrorCategory::Data => 4,
        ErrorCategory::Io => 5,
        ErrorCategory::Runtime => 6,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.verb) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let category = e.category();
            eprintln!("error[{}]: {e}", format!("{category:?}").to_lowercase());
            ExitCode::from(exit_code(category))
        }
    }
}
