use std::path::Path;

use crate::report::{Document, Report};
use crate::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl std::str::FromStr for Format {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "markdown" | "markdown-table" | "md" => Ok(Format::Markdown),
            other => Err(HarnessError::OutOfRange(format!("format `{other}` is not json, csv or markdown"))),
        }
    }
}

pub fn read_document(path: &Path) -> Result<Document, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Document::from_json(&text).map_err(|e| HarnessError::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn reports(doc: &Document) -> Vec<&Report> {
    match doc {
        Document::Lemma(r) => vec![r],
        Document::Suite(s) => s.reports.iter().collect(),
    }
}

/// Counting rows as CSV when any report carries them, otherwise one row per report.
pub fn to_csv(doc: &Document) -> String {
    let rs = reports(doc);
    let mut w = csv::Writer::from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>, rec: Vec<String>| w.write_record(rec).expect("in-memory writer");
    if rs.iter().any(|r| !r.counting_rows.is_empty()) {
        write(&mut w, ["lemma", "p", "d", "r", "exact", "main_term", "normalized_deviation"].map(String::from).to_vec());
        for r in &rs {
            for row in &r.counting_rows {
                write(
                    &mut w,
                    vec![
                        r.lemma.clone(),
                        row.p.to_string(),
                        row.d.to_string(),
                        row.r.to_string(),
                        row.exact.to_string(),
                        row.main_term.to_string(),
                        format!("{:.6}", row.normalized_deviation),
                    ],
                );
            }
        }
    } else {
        write(&mut w, ["lemma", "outcome", "checks", "violations", "work_units"].map(String::from).to_vec());
        for r in &rs {
            write(
                &mut w,
                vec![
                    r.lemma.clone(),
                    r.outcome.to_string(),
                    r.checks.to_string(),
                    r.violations.to_string(),
                    r.timing.work_units.to_string(),
                ],
            );
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

pub fn to_markdown(doc: &Document) -> String {
    let mut out = String::from("| lemma | outcome | checks | violations | work units | hypotheses unmet |\n|---|---|---:|---:|---:|---|\n");
    for r in reports(doc) {
        let unmet: Vec<&str> = r.hypotheses.iter().filter(|h| !h.met).map(|h| h.name.as_str()).collect();
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            r.lemma,
            r.outcome,
            r.checks,
            r.violations,
            r.timing.work_units,
            unmet.join("; ").replace('|', "\\|")
        ));
    }
    if let Document::Suite(s) = doc {
        out.push_str(&format!(
            "\n**{}**: {} pass, {} fail, {} hypothesis-not-met\n",
            s.outcome, s.summary.pass, s.summary.fail, s.summary.hypothesis_not_met
        ));
    }
    out
}

pub fn render(doc: &Document, format: Format) -> String {
    match format {
        Format::Json => doc.to_json(),
        Format::Csv => to_csv(doc),
        Format::Markdown => to_markdown(doc),
    }
}
