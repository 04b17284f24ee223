//! File-based pipeline: analyze the bundled model gallery the way the `gqms
//! batch` subcommand does and print the summary table.
//!
//! Run with `cargo run --example batch_pipeline`.

use std::path::Path;

use gqms::report::{self, AnalysisOptions};

fn main() -> gqms::Result<()> {
    let models = Path::new(env!("CARGO_MANIFEST_DIR")).join("models");
    let out = std::env::temp_dir().join("gqms-gallery-reports");
    let outcome = report::run_batch(&models, &out, AnalysisOptions::default())?;

    println!(
        "{:<22} {:>7} {:>4} {:>9} {:>12} {:>10}",
        "name", "exists", "d0", "faithful", "irreducible", "gap_holds"
    );
    for row in &outcome.rows {
        println!(
            "{:<22} {:>7} {:>4} {:>9} {:>12} {:>10}",
            row.name, row.exists, row.d0, row.faithful, row.irreducible, row.gap_holds
        );
    }
    for (file, err) in &outcome.failures {
        println!("failed {file}: {err}");
    }
    println!("\nreports written to {}", out.display());
    Ok(())
}
