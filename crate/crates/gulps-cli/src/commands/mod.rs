pub mod bench;
pub mod decompose;
pub mod polytope;
pub mod trajectory;
pub mod verify;

use anyhow::Result;
use std::io::Write;
use std::path::Path;

/// Open a CSV writer over a file that starts with a '#' comment line carrying
/// the tool version and the full flag line; appends stay valid CSV rows.
pub fn csv_writer_with_header(
    path: &Path,
    flag_line: &str,
) -> Result<csv::Writer<std::fs::File>> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "# gulps {} | {}", env!("CARGO_PKG_VERSION"), flag_line)?;
    Ok(csv::WriterBuilder::new().from_writer(file))
}
