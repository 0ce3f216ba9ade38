use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use envsense::classify::FeatureMask;
use envsense::config::Config;
use envsense::features;
use envsense::model::{self, Schema};
use envsense::pipeline::{self, ModelFamily, PipelineResults};
use envsense::report::{self, ReportFile};
use envsense::synth;

#[derive(Parser)]
#[command(name = "envsense", version, about = "Activity and location inference from wearable environmental sensors")]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true, env = "ENVSENSE_CONFIG")]
    config: Option<PathBuf>,
    /// Overrides both the analysis and the generator seed.
    #[arg(long, global = true, env = "ENVSENSE_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic labeled dataset.
    Generate {
        #[arg(long, env = "ENVSENSE_OUT")]
        out: PathBuf,
    },
    /// Windowed features of every episode in a dataset directory.
    Extract {
        #[arg(long, env = "ENVSENSE_DATA")]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Window stride; defaults to the configured `stride`.
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Permutation tests of the five feature hypotheses.
    Test {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-window lab/cubicle decision and stair distance.
    Locate {
        /// Dataset directory holding the reference streams.
        #[arg(long, env = "ENVSENSE_DATA")]
        data: PathBuf,
        /// Wearable stream CSV; defaults to every episode in `data`.
        #[arg(long)]
        stream: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated classification of a feature CSV.
    Classify {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value = "fused")]
        mask: FeatureMask,
        #[arg(long)]
        model: Option<ModelFamily>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// All report tables for an existing dataset directory.
    Report {
        #[arg(long, env = "ENVSENSE_DATA")]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// generate, extract and report in one go.
    Pipeline {
        #[arg(long, env = "ENVSENSE_OUT")]
        out: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<Config> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path).map_err(envsense::Error::from)?,
        None => Config::default(),
    };
    Ok(match cli.seed {
        Some(seed) => cfg.with_seed(seed),
        None => cfg,
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn emit(files: &[ReportFile], out: &Path) -> Result<()> {
    pipeline::write_files(files, out)?;
    for f in files.iter().filter(|f| f.name.ends_with(".txt")) {
        println!("{}", f.contents);
    }
    Ok(())
}

fn load_data(dir: &Path) -> Result<synth::LabeledDataset> {
    Ok(synth::load_dataset(dir).map_err(envsense::Error::from)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Library errors already embed their cause in the message.
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let pc = &cfg.pipeline;
    match cli.command {
        Command::Generate { out } => {
            let dataset = synth::generate(&cfg.generator).map_err(envsense::Error::from)?;
            synth::export(&dataset, &out).map_err(envsense::Error::from)?;
            eprintln!(
                "wrote {} episodes and {} reference streams to {}",
                dataset.episodes.len(),
                dataset.references.len(),
                out.display()
            );
        }
        Command::Extract { data, out, stride } => {
            let mut pc = pc.clone();
            if let Some(s) = stride {
                pc.stride = s;
                pc.classify_stride = s;
            }
            let episodes = pipeline::extract_dataset(&load_data(&data)?, &pc)?;
            let rows = pipeline::all_vectors(&episodes);
            write(&out, &features::write_feature_csv(&rows))?;
            eprintln!("wrote {} feature rows to {}", rows.len(), out.display());
        }
        Command::Test { features: path, out } => {
            let rows = features::parse_feature_csv(&read(&path)?).map_err(envsense::Error::from)?;
            let results = PipelineResults {
                hypotheses: pipeline::run_hypotheses(&rows, pc)?,
                ..Default::default()
            };
            emit(&report::render_report(&results).map_err(envsense::Error::from)?, &out)?;
        }
        Command::Locate { data, stream, out } => {
            let dataset = load_data(&data)?;
            let ctx = pipeline::location_context(&dataset.references, pc)?;
            let streams = match stream {
                Some(path) => {
                    let s = model::parse_stream(&read(&path)?, &Schema::default()).map_err(envsense::Error::from)?;
                    vec![(String::from("-"), s)]
                }
                None => dataset
                    .episodes
                    .into_iter()
                    .map(|e| (e.id.to_string(), e.stream))
                    .collect(),
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["episode", "window_end", "log_ratio", "location", "dtw_distance", "climbing"])?;
            for (id, s) in &streams {
                for r in pipeline::locate(s, &ctx, pc)? {
                    w.write_record([
                        id.clone(),
                        r.end_time.to_string(),
                        r.log_ratio.to_string(),
                        r.location.to_string(),
                        r.dtw_distance.to_string(),
                        r.climbing.to_string(),
                    ])?;
                }
            }
            write(&out, &String::from_utf8(w.into_inner()?)?)?;
        }
        Command::Classify {
            features: path,
            mask,
            model,
            folds,
            out,
        } => {
            let mut pc = pc.clone();
            pc.model = model.unwrap_or(pc.model);
            pc.folds = folds.unwrap_or(pc.folds);
            let rows = features::parse_feature_csv(&read(&path)?).map_err(envsense::Error::from)?;
            let cv = pipeline::evaluate(&rows, mask, &pc.model_spec(), &pc)?;
            let results = PipelineResults {
                accuracy: vec![cv.clone()],
                confusions: vec![cv],
                ..Default::default()
            };
            emit(&report::render_report(&results).map_err(envsense::Error::from)?, &out)?;
        }
        Command::Report { data, out } => {
            let results = pipeline::analyze(&load_data(&data)?, pc)?;
            emit(&report::render_report(&results).map_err(envsense::Error::from)?, &out)?;
        }
        Command::Pipeline { out } => {
            let files = pipeline::run_pipeline(&cfg, &out)?;
            for f in files.iter().filter(|f| f.name.ends_with(".txt")) {
                println!("{}", f.contents);
            }
        }
    }
    Ok(())
}
