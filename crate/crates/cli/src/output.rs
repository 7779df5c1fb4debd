//! JSON and CSV writers.

use std::io::Write;

use crate::bundle::{ReportBundle, Table};
use crate::config::Format;
use crate::error::CliError;

pub fn write_bundle(bundle: &ReportBundle, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, bundle)?;
            writeln!(out)?;
        }
        Format::Csv => match &bundle.table {
            Some(table) => write_table(table, bundle, out)?,
            None => write_reports(bundle, out)?,
        },
    }
    Ok(())
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn write_reports(bundle: &ReportBundle, out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "item",
        "label",
        "inequality",
        "lhs",
        "rhs",
        "sharp_constant",
        "slack",
        "hypotheses_pass",
        "verdict",
        "error",
    ])?;
    for e in &bundle.reports {
        let r = e.report.as_ref();
        let verdict = serde_json::to_value(e.verdict)?;
        w.write_record([
            e.item.to_string(),
            e.label.clone(),
            r.map(|r| r.inequality.clone()).unwrap_or_default(),
            cell(r.map(|r| r.lhs)),
            cell(r.map(|r| r.rhs)),
            cell(r.map(|r| r.sharp_constant)),
            cell(r.map(|r| r.slack)),
            r.map(|r| r.hypotheses_pass().to_string()).unwrap_or_default(),
            verdict.as_str().unwrap_or_default().to_string(),
            e.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Table rows; the label column is dropped when every label is empty. The verdicts of
/// any checks follow as `#` lines.
fn write_table(table: &Table, bundle: &ReportBundle, out: &mut dyn Write) -> Result<(), CliError> {
    let labelled = table.rows.iter().any(|r| !r.label.is_empty());
    {
        let mut w = csv::Writer::from_writer(&mut *out);
        let mut header: Vec<&str> = Vec::new();
        if labelled {
            header.push("label");
        }
        header.extend(table.columns.iter().map(String::as_str));
        w.write_record(&header)?;
        for row in &table.rows {
            let mut rec: Vec<String> = Vec::new();
            if labelled {
                rec.push(row.label.clone());
            }
            rec.extend(row.values.iter().map(|v| cell(*v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    for e in &bundle.reports {
        let verdict = serde_json::to_value(e.verdict)?;
        writeln!(out, "# verdict: {} {}", e.label, verdict.as_str().unwrap_or_default())?;
    }
    Ok(())
}
