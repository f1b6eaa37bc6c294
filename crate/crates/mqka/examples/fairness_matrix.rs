//! Build the archetype fairness matrix and print it as a markdown table,
//! plus the evidence runs as CSV.
//!
//!     cargo run --example fairness_matrix

use mqka::report::{build_fairness_matrix, emit_report, ReportFormat};

fn main() -> mqka::Result<()> {
    let report = build_fairness_matrix(4, 1)?;
    print!("{}", emit_report(&report, ReportFormat::MarkdownTable)?);
    println!();
    print!("{}", emit_report(&report, ReportFormat::Csv)?);
    for note in &report.notes {
        println!("note: {note}");
    }
    Ok(())
}
