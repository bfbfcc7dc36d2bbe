use crate::formats::{self, admit_unitary};
use anyhow::{bail, Context, Result};
use gulps::matcore::{haar_random_su4, Unitary4};
use gulps::synth::{decompose, named_gate_matrix, verify, DecomposeOptions, SynthError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(clap::Args)]
pub struct Args {
    /// ISA configuration file (JSON)
    #[arg(long)]
    pub isa: PathBuf,
    /// Target: a matrix file path, "name:<gate>", or "haar:<seed>"
    #[arg(long)]
    pub target: String,
    /// Output decomposition file (JSON); stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Search budget: maximum number of candidate sentences
    #[arg(long)]
    pub max_sentences: Option<usize>,
    /// Search budget: maximum sentence cost
    #[arg(long)]
    pub max_cost: Option<f64>,
    /// Optimizer restarts per segment
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Maximum optimizer iterations
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Per-term residual threshold
    #[arg(long)]
    pub tol: Option<f64>,
    /// RNG seed (default from GULPS_SEED or built-in)
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn parse_target(spec: &str) -> Result<Unitary4> {
    if let Some(name) = spec.strip_prefix("name:") {
        return named_gate_matrix(name).map_err(|e| anyhow::anyhow!("{e}"));
    }
    if let Some(seed) = spec.strip_prefix("haar:") {
        let seed: u64 = seed.parse().context("haar seed must be an integer")?;
        return Ok(haar_random_su4(seed));
    }
    let text = std::fs::read_to_string(spec)
        .with_context(|| format!("reading target matrix file {spec}"))?;
    let rows: formats::MatrixJson =
        serde_json::from_str(&text).context("parsing target matrix JSON")?;
    admit_unitary(&formats::mat4_from_json(&rows)?)
}

pub fn build_options(args: &Args) -> DecomposeOptions {
    let mut opts = DecomposeOptions::default();
    if let Some(n) = args.max_sentences {
        opts.max_sentences = n;
    }
    opts.max_cost = args.max_cost.or(opts.max_cost);
    if let Some(r) = args.restarts {
        opts.segment.restarts = r;
    }
    if let Some(n) = args.max_iter {
        opts.segment.lm.max_iter = n;
    }
    if let Some(t) = args.tol {
        opts.segment.lm.tol = t;
    }
    opts.seed = args.seed.unwrap_or_else(crate::default_seed);
    opts
}

pub fn run(args: Args) -> Result<ExitCode> {
    let isa = formats::load_isa(&args.isa)?;
    let target = parse_target(&args.target)?;
    let opts = build_options(&args);
    match decompose(&target, &isa, &opts) {
        Ok(d) => {
            let report = verify(&d, &target, &isa);
            let out = formats::output_from_decomposition(&d, &target, &isa, &report);
            let json = serde_json::to_string_pretty(&out)?;
            match &args.out {
                Some(path) => std::fs::write(path, json)?,
                None => println!("{json}"),
            }
            eprintln!(
                "sentence [{}] cost {:.6}, distance {:.3e}, search {:.2} ms",
                d.sentence.ids(&isa).join(" "),
                d.sentence.total_cost,
                report.distance,
                d.stats.sentence_search_ms
            );
            Ok(ExitCode::SUCCESS)
        }
        Err(SynthError::BudgetExhausted { sentences_tried }) => {
            eprintln!("budget exhausted after {sentences_tried} sentences");
            Ok(ExitCode::from(2))
        }
        Err(e) => bail!("{e}"),
    }
}
