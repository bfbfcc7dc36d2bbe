use crate::formats::decomposition_from_output;
use anyhow::{Context, Result};
use gulps::invariants::{coords_to_logspec, rho_reflect};
use gulps::monodromy::depth2_min_slack;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(clap::Args)]
pub struct Args {
    /// Stored decomposition (JSON)
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output CSV of Weyl-chamber points
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let stored: crate::formats::DecompositionOutput = serde_json::from_str(&text)?;
    let (d, _, isa) = decomposition_from_output(&stored)?;

    // revalidate consecutive segment membership before exporting
    let n = d.sentence.len();
    for i in 2..=n {
        let gate = isa.gate(d.sentence.gates[i - 1]);
        let prev = coords_to_logspec(&d.trajectory.points[i - 1]);
        let next = if i == n && d.trajectory.reflected {
            rho_reflect(&coords_to_logspec(&d.trajectory.points[i]))
        } else {
            coords_to_logspec(&d.trajectory.points[i])
        };
        let slack = depth2_min_slack(&prev, &gate.spec, &next);
        if slack < -gulps::tol::LP_FEASIBLE {
            eprintln!("warning: segment {i} violates its constraint rows (slack {slack:.3e})");
        }
    }

    let flag_line = format!("trajectory --in {} --out {}", args.input.display(), args.out.display());
    let mut w = super::csv_writer_with_header(&args.out, &flag_line)?;
    w.write_record(["step", "c1", "c2", "c3"])?;
    for (step, p) in d.trajectory.points.iter().enumerate() {
        // shortest round-trip float formatting keeps the CSV lossless
        w.write_record([
            step.to_string(),
            format!("{}", p.c1),
            format!("{}", p.c2),
            format!("{}", p.c3),
        ])?;
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}
