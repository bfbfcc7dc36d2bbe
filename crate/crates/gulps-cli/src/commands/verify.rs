use crate::formats::decomposition_from_output;
use anyhow::{bail, Context, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(clap::Args)]
pub struct Args {
    /// Stored decomposition (JSON)
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Optional trajectory CSV to cross-check against the stored points
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let stored: crate::formats::DecompositionOutput = serde_json::from_str(&text)?;
    let (d, target, isa) = decomposition_from_output(&stored)?;
    let report = gulps::synth::verify(&d, &target, &isa);

    println!("distance: {:.17e}", report.distance);
    println!("stored distance: {:.17e}", stored.verification.distance);
    println!("trajectory min slack: {:.6e}", report.trajectory_min_slack);
    for (i, r) in report.segment_residuals.iter().enumerate() {
        println!("segment {} residual: {:.6e}", i + 2, r);
    }
    let drift = (report.distance - stored.verification.distance).abs();
    if drift > 1e-9 {
        bail!("replayed distance drifts from the stored value by {drift:.3e}");
    }

    if let Some(csv_path) = &args.trajectory {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(csv_path)
            .with_context(|| format!("reading {}", csv_path.display()))?;
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let c: Vec<f64> = (1..4).map(|k| rec[k].parse()).collect::<Result<_, _>>()?;
            points.push([c[0], c[1], c[2]]);
        }
        if points.len() != d.trajectory.points.len() {
            bail!("trajectory CSV has {} rows, stored has {}", points.len(), d.trajectory.points.len());
        }
        for (a, b) in points.iter().zip(&d.trajectory.points) {
            if a != &b.as_array() {
                bail!("trajectory CSV differs from the stored points");
            }
        }
        println!("trajectory CSV matches stored points exactly");
    }
    Ok(ExitCode::SUCCESS)
}
