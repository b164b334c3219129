//! Ranked output as tab-separated rows or one JSON object per line.
//!
//! Columns, in order: `rank`, `doc_id`, `total`, then with `--explain`
//! `timeliness`, `relativeness`, `relatedness_term`, and finally `period`.
//! Scores are printed with six decimal places in both formats.

use std::io::{self, Write};

use entrank::{RankedResult, ScoreBreakdown};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Tsv,
    Records,
}

fn columns(explain: bool) -> &'static [&'static str] {
    if explain {
        &["rank", "doc_id", "total", "timeliness", "relativeness", "relatedness_term", "period"]
    } else {
        &["rank", "doc_id", "total", "period"]
    }
}

fn cells(rank: usize, s: &ScoreBreakdown, explain: bool) -> Vec<(String, bool)> {
    let score = |v: f64| (format!("{v:.6}"), false);
    let mut row = vec![(rank.to_string(), false), (s.doc_id.clone(), true), score(s.total)];
    if explain {
        row.push(score(s.timeliness));
        row.push(score(s.relativeness));
        row.push(score(s.relatedness_term));
    }
    row.push((s.period.key().to_string(), true));
    row
}

pub fn write_ranking<W: Write>(
    out: &mut W,
    ranked: &RankedResult,
    format: OutputFormat,
    explain: bool,
) -> io::Result<()> {
    let names = columns(explain);
    if format == OutputFormat::Tsv {
        writeln!(out, "{}", names.join("\t"))?;
    }
    for (i, s) in ranked.iter().enumerate() {
        let row = cells(i + 1, s, explain);
        match format {
            OutputFormat::Tsv => {
                let line: Vec<&str> = row.iter().map(|(v, _)| v.as_str()).collect();
                writeln!(out, "{}", line.join("\t"))?;
            }
            OutputFormat::Records => {
                let fields: Vec<String> = names
                    .iter()
                    .zip(&row)
                    .map(|(name, (value, quoted))| {
                        if *quoted {
                            format!("\"{name}\":{}", serde_json::Value::from(value.as_str()))
                        } else {
                            format!("\"{name}\":{value}")
                        }
                    })
                    .collect();
                writeln!(out, "{{{}}}", fields.join(","))?;
            }
        }
    }
    Ok(())
}
