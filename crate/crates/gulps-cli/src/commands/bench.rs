use crate::formats;
use anyhow::{bail, Result};
use gulps::matcore::haar_random_su4;
use gulps::synth::{
    apex_target, find_cheapest_sentence, lm_minimize, DecomposeOptions, LmOptions,
    MonolithicResidual, SynthError,
};
use rayon::prelude::*;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    /// per-target sentence-determination wall time
    SentenceTime,
    /// monolithic synthesis convergence fraction versus circuit depth
    Convergence,
}

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    pub isa: PathBuf,
    /// Number of targets (sentence-time mode)
    #[arg(long, short = 'n', default_value_t = 100)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Worker threads (0 = rayon default)
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Optimizer restarts per trial (convergence mode)
    #[arg(long, default_value_t = 128)]
    pub restarts: usize,
    /// Largest circuit depth probed (convergence mode)
    #[arg(long, default_value_t = 6)]
    pub max_depth: usize,
}

pub fn run(args: Args) -> Result<ExitCode> {
    if args.jobs > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build_global().ok();
    }
    let isa = formats::load_isa(&args.isa)?;
    let seed = args.seed.unwrap_or_else(crate::default_seed);
    let flag_line = format!(
        "bench --isa {} --n {} --seed {} --mode {} --jobs {} --restarts {} --max-depth {}",
        args.isa.display(),
        args.n,
        seed,
        match args.mode {
            Mode::SentenceTime => "sentence-time",
            Mode::Convergence => "convergence",
        },
        args.jobs,
        args.restarts,
        args.max_depth,
    );
    match args.mode {
        Mode::SentenceTime => {
            let opts = DecomposeOptions::default();
            let rows: Vec<Result<(u64, String, f64, f64, usize), SynthError>> = (0..args.n)
                .into_par_iter()
                .map(|i| {
                    let target_seed = seed.wrapping_add(i as u64);
                    let target = haar_random_su4(target_seed);
                    let search = find_cheapest_sentence(&target, &isa, &opts)?;
                    Ok((
                        target_seed,
                        search.sentence.ids(&isa).join("+"),
                        search.sentence.total_cost,
                        search.search_ms,
                        search.rejected,
                    ))
                })
                .collect();
            let mut w = super::csv_writer_with_header(&args.out, &flag_line)?;
            w.write_record(["seed", "sentence", "cost", "search_ms", "rejected_sentences"])?;
            for row in rows {
                let (s, sentence, cost, ms, rejected) = row.map_err(|e| anyhow::anyhow!("{e}"))?;
                w.write_record([
                    s.to_string(),
                    sentence,
                    format!("{cost:.9}"),
                    format!("{ms:.4}"),
                    rejected.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Mode::Convergence => {
            if args.max_depth < 2 {
                bail!("convergence mode needs --max-depth >= 2");
            }
            let gate = isa.gates().first().expect("validated nonempty").clone();
            if isa.gates().len() > 1 {
                eprintln!("note: convergence mode uses the first ISA gate ({})", gate.id);
            }
            let mut w = super::csv_writer_with_header(&args.out, &flag_line)?;
            w.write_record(["depth", "converged", "trials", "fraction"])?;
            for depth in 2..=args.max_depth {
                let (converged, trials) =
                    convergence_at_depth(&gate, depth, args.restarts, seed)?;
                let fraction = converged as f64 / trials as f64;
                w.write_record([
                    depth.to_string(),
                    converged.to_string(),
                    trials.to_string(),
                    format!("{fraction:.6}"),
                ])?;
                eprintln!("depth {depth}: {converged}/{trials} converged ({fraction:.3})");
            }
            w.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// One depth of the convergence experiment: synthesize the apex target of
/// the depth-d polytope monolithically, counting converged restarts.
pub fn convergence_at_depth(
    gate: &gulps::synth::GateDef,
    depth: usize,
    restarts: usize,
    seed: u64,
) -> Result<(usize, usize)> {
    let apex = apex_target(gate, depth).map_err(|e| anyhow::anyhow!("{e}"))?;
    let residual = MonolithicResidual::new(&gate.matrix, depth, &apex);
    let params = residual.param_count();
    let lm = LmOptions { tol: 1e-8, max_iter: 2048, lambda0: 1e-3 };
    let converged: usize = (0..restarts)
        .into_par_iter()
        .map(|trial| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(
                seed.wrapping_add(depth as u64 * 0x1000)
                    .wrapping_add(trial as u64),
            );
            let b = 2.0 * std::f64::consts::PI;
            let x0: Vec<f64> = (0..params).map(|_| rng.random_range(-b..b)).collect();
            usize::from(lm_minimize(&residual, &x0, &lm).converged)
        })
        .sum();
    Ok((converged, restarts))
}
