use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};
use persreg_core::harness::{run_experiment, summarize, ExperimentConfig, Regime};
use persreg_core::io::{load_cloud_csv, CloudFile};
use persreg_core::{
    anisotropy_profile, json, pairwise_distances, persistent_entropy, select_from_lengths,
    vr_barcode_0d, BarLengths, Error,
};
use serde::Serialize;
use serde_json::{json, Value};

/// Exit codes.
const EXIT_OTHER: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_TOO_FEW: u8 = 3;
const EXIT_BAD_K: u8 = 4;
const EXIT_DIVERGED: u8 = 5;

#[derive(Parser)]
#[command(
    name = "persreg",
    version,
    about = "Persistent-entropy tools for point clouds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Euclidean,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Select {
    All,
    Features,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    None,
    Selected,
    All,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::None => Regime::None,
            RegimeArg::Selected => Regime::SelectedBars,
            RegimeArg::All => Regime::AllBars,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// 0-dimensional Vietoris–Rips barcode, longest bar first.
    Barcode {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "euclidean")]
        metric: Metric,
    },
    /// Persistent entropy of all bars or of the bars selected as features.
    Entropy {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        select: Select,
    },
    /// Anisotropy scores for k = 1..K.
    Anisotropy {
        input: PathBuf,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        centered: bool,
    },
    /// Train under an experiment config; writes per-seed JSONL metrics,
    /// checkpoints and a summary.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        regime: Option<RegimeArg>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Config { .. } | Error::NonFinite { .. } => EXIT_PARSE,
            Error::EmptyCloud { .. } | Error::Shape(_) => EXIT_PARSE,
            Error::TooFewPoints(_) | Error::DegenerateBarcode => EXIT_TOO_FEW,
            Error::KOutOfRange { .. } => EXIT_BAD_K,
            Error::Diverged { .. } => EXIT_DIVERGED,
            _ => EXIT_OTHER,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult<T = ()> = Result<T, Failure>;

fn read_input(path: &Path) -> CmdResult<CloudFile> {
    load_cloud_csv(path).map_err(|e| match e {
        Error::Io(io) => Failure {
            code: EXIT_PARSE,
            message: format!("{}: {io}", path.display()),
        },
        other => other.into(),
    })
}

fn print_json(value: &Value) -> CmdResult {
    println!("{}", json::to_string(value)?);
    Ok(())
}

fn cmd_barcode(input: &Path, _metric: Metric) -> CmdResult {
    let file = read_input(input)?;
    let barcode = vr_barcode_0d(&pairwise_distances(&file.cloud))?;
    print_json(&json!({ "bars": barcode.sorted_descending() }))
}

fn cmd_entropy(input: &Path, select: Select) -> CmdResult {
    let file = read_input(input)?;
    let barcode = vr_barcode_0d(&pairwise_distances(&file.cloud))?;
    // Indices refer to the `barcode` command's ordering.
    let lengths: Vec<f64> = barcode
        .sorted_descending()
        .iter()
        .map(|b| b.length)
        .collect();
    let out = match select {
        Select::All => {
            let entropy = persistent_entropy(&BarLengths::new(lengths.clone())?)?;
            json!({ "entropy": entropy, "n_bars": lengths.len() })
        }
        Select::Features => {
            let sel = select_from_lengths(&lengths)?;
            let chosen: Vec<f64> = sel.selected.iter().map(|&i| lengths[i]).collect();
            let entropy = persistent_entropy(&BarLengths::new(chosen)?)?;
            json!({
                "entropy": entropy,
                "n_bars": lengths.len(),
                "selected_indices": sel.selected,
                "noise_indices": sel.noise,
                "alpha": sel.alpha,
                "q_trace": sel.q_trace,
            })
        }
    };
    print_json(&out)
}

fn cmd_anisotropy(input: &Path, k: usize, centered: bool) -> CmdResult {
    let file = read_input(input)?;
    let profile = anisotropy_profile(file.cloud.data(), k, centered)?;
    let scores: BTreeMap<String, f64> = profile
        .scores
        .iter()
        .enumerate()
        .map(|(i, s)| ((i + 1).to_string(), *s))
        .collect();
    print_json(&json!(scores))
}

fn write_json_file(path: &Path, value: &impl Serialize) -> CmdResult {
    let text = json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::Io(e).into())
}

fn cmd_train(config: &Path, regime: Option<RegimeArg>, out: &Path) -> CmdResult {
    let text = fs::read_to_string(config).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: format!("{}: {e}", config.display()),
    })?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(r) = regime {
        cfg.regime = r.into();
    }
    fs::create_dir_all(out).map_err(Error::Io)?;
    info!("training regime {} over seeds {:?}", cfg.regime, cfg.seeds);

    let outcomes = run_experiment(&cfg)?;
    let mut diverged = Vec::new();
    for o in &outcomes {
        let seed = o.metrics.seed;
        let path = out.join(format!("metrics_seed{seed}.jsonl"));
        let file = File::create(&path).map_err(Error::Io)?;
        o.metrics.write_jsonl(BufWriter::new(file))?;
        write_json_file(
            &out.join(format!("checkpoint_seed{seed}.json")),
            &o.model.to_checkpoint(),
        )?;
        if let Some(d) = &o.metrics.diverged {
            warn!("seed {seed} diverged at step {}: {}", d.step, d.reason);
            diverged.push(json!({ "seed": seed, "step": d.step, "reason": d.reason }));
        }
    }

    let usable: Vec<_> = outcomes
        .iter()
        .filter(|o| !o.metrics.records.is_empty())
        .map(|o| o.metrics.clone())
        .collect();
    let summary = if usable.is_empty() {
        Value::Null
    } else {
        serde_json::to_value(summarize(&usable)?).map_err(Error::Json)?
    };
    write_json_file(
        &out.join("summary.json"),
        &json!({
            "regime": cfg.regime,
            "config": cfg,
            "summary": summary,
            "diverged": diverged,
        }),
    )?;

    if let Some(first) = diverged.first() {
        return Err(Failure {
            code: EXIT_DIVERGED,
            message: format!("training diverged: {first}"),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PERSREG_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Barcode { input, metric } => cmd_barcode(input, *metric),
        Command::Entropy { input, select } => cmd_entropy(input, *select),
        Command::Anisotropy { input, k, centered } => cmd_anisotropy(input, *k, *centered),
        Command::Train {
            config,
            regime,
            out,
        } => cmd_train(config, *regime, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
