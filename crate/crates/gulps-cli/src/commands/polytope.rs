use crate::formats;
use anyhow::{bail, Result};
use gulps::invariants::{coords_to_logspec, rho_reflect, CanonicalCoord};
use gulps::monodromy::{depth2_min_slack, qlr_rows};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    pub isa: PathBuf,
    /// Two comma-separated gate ids, e.g. "CX,CX"
    #[arg(long)]
    pub sentence: String,
    /// Write the instantiated inequality rows as CSV
    #[arg(long)]
    pub dump: bool,
    /// Test membership of a chamber point "c1,c2,c3" (units of pi)
    #[arg(long)]
    pub contains: Option<String>,
    /// Output CSV path for --dump (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Chamber rows rewritten over the target's sorted log spectrum via the
/// inverse affine bridge c = ((d1+d2)/2, (d1+d3)/2, (d2+d3)/2).
fn chamber_rows_in_spectrum() -> [([f64; 4], f64); 4] {
    [
        // c1 - c2 >= 0  <=>  (d2 - d3)/2 >= 0
        ([0.0, 0.5, -0.5, 0.0], 0.0),
        // c2 - c3 >= 0  <=>  (d1 - d2)/2 >= 0
        ([0.5, -0.5, 0.0, 0.0], 0.0),
        // c3 >= 0       <=>  (d2 + d3)/2 >= 0
        ([0.0, 0.5, 0.5, 0.0], 0.0),
        // 1/2 - c1 - c2 >= 0  <=>  1/2 - d1 - (d2 + d3)/2 >= 0
        ([-1.0, -0.5, -0.5, 0.0], 0.5),
    ]
}

pub fn run(args: Args) -> Result<ExitCode> {
    let isa = formats::load_isa(&args.isa)?;
    let ids: Vec<&str> = args.sentence.split(',').map(str::trim).collect();
    if ids.len() != 2 {
        bail!("--sentence must name exactly two gates (got {})", ids.len());
    }
    let g: Vec<&gulps::synth::GateDef> = ids
        .iter()
        .map(|id| {
            isa.find(id)
                .map(|i| isa.gate(i))
                .ok_or_else(|| anyhow::anyhow!("gate {id} not in the ISA"))
        })
        .collect::<Result<_>>()?;

    if let Some(point) = &args.contains {
        let c: Vec<f64> = point
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()?;
        if c.len() != 3 {
            bail!("--contains needs three comma-separated coordinates");
        }
        let coord = CanonicalCoord::new(c[0], c[1], c[2]);
        if !coord.is_chamber(1e-9) {
            bail!("point {point} is not a chamber triple");
        }
        let delta = coords_to_logspec(&coord);
        let refl = rho_reflect(&delta);
        let direct = depth2_min_slack(&g[0].spec, &g[1].spec, &delta) >= -gulps::tol::LP_FEASIBLE;
        let reflected = depth2_min_slack(&g[0].spec, &g[1].spec, &refl) >= -gulps::tol::LP_FEASIBLE;
        println!("{}", direct || reflected);
        eprintln!("direct branch: {direct}, reflected branch: {reflected}");
        return Ok(ExitCode::SUCCESS);
    }

    if args.dump {
        let flag_line = format!(
            "polytope --isa {} --sentence {} --dump",
            args.isa.display(),
            args.sentence
        );
        let mut out: Box<dyn std::io::Write> = match &args.out {
            Some(path) => {
                let mut f = std::fs::File::create(path)?;
                use std::io::Write;
                writeln!(f, "# gulps {} | {}", env!("CARGO_PKG_VERSION"), flag_line)?;
                Box::new(f)
            }
            None => Box::new(std::io::stdout()),
        };
        let mut w = csv::WriterBuilder::new().from_writer(&mut out);
        let mut header: Vec<String> =
            ["kind", "r", "k", "a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        for block in ["alpha", "beta", "delta"] {
            for i in 1..=4 {
                header.push(format!("{block}{i}"));
            }
        }
        header.push("constant".into());
        header.push("instantiated_constant".into());
        w.write_record(&header)?;
        let mut count = 0usize;
        for row in qlr_rows() {
            let mut rec: Vec<String> = vec![
                "qlr".into(),
                row.provenance.r.to_string(),
                row.provenance.k.to_string(),
                row.provenance.a.to_string(),
                row.provenance.b.to_string(),
                row.provenance.c.to_string(),
                row.provenance.d.to_string(),
            ];
            for block in [&row.coef_alpha, &row.coef_beta, &row.coef_delta] {
                for v in block {
                    rec.push(v.to_string());
                }
            }
            rec.push(row.constant.to_string());
            // fold the two fixed gate spectra into the constant
            let folded: f64 = row.constant as f64
                + (0..4)
                    .map(|i| {
                        row.coef_alpha[i] as f64 * g[0].spec.0[i]
                            + row.coef_beta[i] as f64 * g[1].spec.0[i]
                    })
                    .sum::<f64>();
            rec.push(format!("{folded:.17}"));
            w.write_record(&rec)?;
            count += 1;
        }
        for (coef, constant) in chamber_rows_in_spectrum() {
            let mut rec: Vec<String> =
                vec!["chamber".into(), String::new(), String::new(), String::new(), String::new(), String::new(), String::new()];
            for _ in 0..8 {
                rec.push("0".into());
            }
            for v in coef {
                rec.push(format!("{v}"));
            }
            rec.push(format!("{constant}"));
            rec.push(format!("{constant}"));
            w.write_record(&rec)?;
            count += 1;
        }
        w.flush()?;
        drop(w);
        eprintln!("{count} rows ({} QLR + 4 chamber)", qlr_rows().len());
        return Ok(ExitCode::SUCCESS);
    }

    bail!("nothing to do: pass --dump or --contains");
}
