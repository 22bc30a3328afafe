use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ComparisonRow, CorpusScores, DocumentScores, MetricReport, PipelineError, ReportMeta};
use crate::corpus::Category;
use crate::metrics::{CoverageScores, ElementScores, Prf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, PipelineError> {
        match s {
            "md" | "markdown" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(PipelineError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum ReportLine {
    Meta(ReportMeta),
    Document(DocumentScores),
    Corpus(CorpusScores),
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum ComparisonLine<'a> {
    Comparison(&'a ComparisonRow),
}

fn pts(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}

fn opt_pct(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"))
}

fn opt_pts(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), pts)
}

fn json_line<T: Serialize>(out: &mut String, value: &T) {
    out.push_str(&serde_json::to_string(value).expect("report serializes"));
    out.push('\n');
}

/// Renders a report. Output is a pure function of the report.
pub fn emit_report(report: &MetricReport, format: Format) -> String {
    match format {
        Format::Jsonl => {
            let mut out = String::new();
            json_line(&mut out, &ReportLine::Meta(report.meta.clone()));
            for d in &report.documents {
                json_line(&mut out, &ReportLine::Document(d.clone()));
            }
            json_line(&mut out, &ReportLine::Corpus(report.corpus.clone()));
            out
        }
        Format::Markdown => report_markdown(report),
        Format::Csv => report_csv(report),
    }
}

fn report_markdown(r: &MetricReport) -> String {
    let m = &r.meta;
    let mut out = String::new();
    let _ = writeln!(out, "# {}\n", m.system);
    let _ = writeln!(out, "- references: {}", m.reference_kind);
    if let Some(mode) = m.mode {
        let _ = writeln!(out, "- mode: {}", mode.as_str());
    }
    let _ = writeln!(out, "- matcher: {}", m.matcher);
    let _ = writeln!(out, "- tokenizer: {}", m.tokenizer);
    if let Some(tc) = &m.token_counter {
        let _ = writeln!(out, "- truncation token counter: {tc}");
    }
    let _ = writeln!(out, "- documents scored: {}", r.corpus.documents);
    if !m.failed.is_empty() {
        let _ = writeln!(out, "- failed documents: {}", m.failed.join(", "));
    }

    let c = &r.corpus;
    out.push_str("\n## ROUGE F1\n\n| System | ROUGE-1 | ROUGE-2 | ROUGE-L | Semantic |\n|---|---:|---:|---:|---:|\n");
    let _ = writeln!(
        out,
        "| {} | {} | {} | {} | {} |",
        m.system,
        pts(c.rouge.rouge1.f1),
        pts(c.rouge.rouge2.f1),
        pts(c.rouge.rouge_l.f1),
        opt_pts(m.semantic_similarity)
    );

    out.push_str("\n## Novel n-grams (%)\n\n| unigram | bigram | trigram |\n|---:|---:|---:|\n");
    let _ =
        writeln!(out, "| {} | {} | {} |", opt_pct(c.novel_pct[0]), opt_pct(c.novel_pct[1]), opt_pct(c.novel_pct[2]));

    if let Some(rate) = c.validity_rate {
        out.push_str("\n## Stage-1 extraction\n\n");
        let _ = writeln!(out, "- valid answers: {}", pts(rate));
        if let Some(l) = c.lint_counts {
            let _ = writeln!(out, "- date hallucination lints: {}", l.date_hallucination);
            let _ = writeln!(out, "- element redundancy lints: {}", l.element_redundancy);
        }
        if let Some(cov) = &c.coverage {
            out.push_str("\n### Coverage\n\n");
            coverage_table(&mut out, cov);
        }
    }
    if let Some(e) = &c.element_scores {
        out.push_str("\n### Extraction vs annotators\n\n");
        element_table(&mut out, e);
    }
    if let Some(e) = &c.summary_element_scores {
        out.push_str("\n### Summary elements vs annotators\n\n");
        element_table(&mut out, e);
    }

    out.push_str(
        "\n## Per document\n\n| Document | ROUGE-1 | ROUGE-2 | ROUGE-L | Lints |\n|---|---:|---:|---:|---:|\n",
    );
    for d in &r.documents {
        let lints = d.extraction.as_ref().map_or_else(|| "-".to_string(), |e| e.lints.len().to_string());
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            d.doc_id,
            pts(d.rouge.rouge1.f1),
            pts(d.rouge.rouge2.f1),
            pts(d.rouge.rouge_l.f1),
            lints
        );
    }
    out
}

fn coverage_table(out: &mut String, cov: &CoverageScores) {
    out.push_str("| Entity | Date | Event | Result |\n|---:|---:|---:|---:|\n");
    let cells: Vec<String> = Category::ALL.iter().map(|&c| opt_pts(*cov.get(c))).collect();
    let _ = writeln!(out, "| {} |", cells.join(" | "));
}

fn element_table(out: &mut String, e: &ElementScores) {
    out.push_str("| Category | P | R | F1 |\n|---|---:|---:|---:|\n");
    for c in Category::ALL {
        let Prf { precision, recall, f1 } = *e.get(c);
        let _ = writeln!(out, "| {c} | {} | {} | {} |", pts(precision), pts(recall), pts(f1));
    }
}

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w).expect("in-memory csv write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn report_csv(r: &MetricReport) -> String {
    csv_string(|w| {
        w.write_record([
            "system", "doc_id", "rouge1_p", "rouge1_r", "rouge1_f", "rouge2_p", "rouge2_r", "rouge2_f", "rougeL_p",
            "rougeL_r", "rougeL_f", "novel1", "novel2", "novel3", "valid", "lints",
        ])?;
        let row =
            |doc: &str, rouge: &crate::metrics::RougeScores, novel: &[Option<f64>; 3], valid: String, lints: String| {
                let mut v = vec![r.meta.system.clone(), doc.to_string()];
                for p in [rouge.rouge1, rouge.rouge2, rouge.rouge_l] {
                    v.extend([p.precision, p.recall, p.f1].map(|x| format!("{x:.6}")));
                }
                v.extend(novel.map(|n| n.map_or_else(String::new, |x| format!("{x:.4}"))));
                v.push(valid);
                v.push(lints);
                v
            };
        for d in &r.documents {
            let (valid, lints) = d
                .extraction
                .as_ref()
                .map_or((String::new(), String::new()), |e| (e.valid.to_string(), e.lints.len().to_string()));
            w.write_record(row(&d.doc_id, &d.rouge, &d.novel_pct, valid, lints))?;
        }
        let c = &r.corpus;
        let lints =
            c.lint_counts.map_or_else(String::new, |l| (l.date_hallucination + l.element_redundancy).to_string());
        w.write_record(row(
            "_corpus",
            &c.rouge,
            &c.novel_pct,
            c.validity_rate.map_or_else(String::new, |v| format!("{v:.4}")),
            lints,
        ))
    })
}

/// Reads back the line-delimited form written by [`emit_report`].
pub fn load_report_jsonl(text: &str) -> Result<MetricReport, PipelineError> {
    let mut meta = None;
    let mut documents = Vec::new();
    let mut corpus = None;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let parsed: ReportLine =
            serde_json::from_str(line).map_err(|e| PipelineError::MalformedReport(format!("line {}: {e}", i + 1)))?;
        match parsed {
            ReportLine::Meta(m) if meta.is_none() => meta = Some(m),
            ReportLine::Document(d) => documents.push(d),
            ReportLine::Corpus(c) if corpus.is_none() => corpus = Some(c),
            _ => return Err(PipelineError::MalformedReport(format!("line {}: repeated record", i + 1))),
        }
    }
    match (meta, corpus) {
        (Some(meta), Some(corpus)) => Ok(MetricReport { meta, documents, corpus }),
        _ => Err(PipelineError::MalformedReport("missing meta or corpus record".into())),
    }
}

/// Renders comparison rows. Markdown shows deltas in parentheses.
pub fn emit_comparison(rows: &[ComparisonRow], format: Format) -> String {
    match format {
        Format::Jsonl => {
            let mut out = String::new();
            for r in rows {
                json_line(&mut out, &ComparisonLine::Comparison(r));
            }
            out
        }
        Format::Markdown => {
            let mut out =
                String::from("| System | ROUGE-1 | ROUGE-2 | ROUGE-L | Semantic |\n|---|---:|---:|---:|---:|\n");
            let cell = |v: f64, d: f64, base: bool| if base { format!("{v:.2}") } else { format!("{v:.2} ({d:+.2})") };
            for r in rows {
                let label = if r.is_baseline { format!("{} (baseline)", r.system) } else { r.system.clone() };
                let sem = match (r.semantic_similarity, r.delta_semantic_similarity) {
                    (Some(v), Some(d)) => cell(v, d, r.is_baseline),
                    (Some(v), None) => format!("{v:.2}"),
                    _ => "n/a".to_string(),
                };
                let _ = writeln!(
                    out,
                    "| {label} | {} | {} | {} | {sem} |",
                    cell(r.rouge1, r.delta_rouge1, r.is_baseline),
                    cell(r.rouge2, r.delta_rouge2, r.is_baseline),
                    cell(r.rouge_l, r.delta_rouge_l, r.is_baseline),
                );
            }
            out
        }
        Format::Csv => csv_string(|w| {
            w.write_record([
                "system",
                "rouge1",
                "rouge2",
                "rougeL",
                "semantic",
                "delta_rouge1",
                "delta_rouge2",
                "delta_rougeL",
                "delta_semantic",
                "baseline",
            ])?;
            for r in rows {
                let opt = |x: Option<f64>| x.map_or_else(String::new, |v| format!("{v:.2}"));
                w.write_record([
                    r.system.clone(),
                    format!("{:.2}", r.rouge1),
                    format!("{:.2}", r.rouge2),
                    format!("{:.2}", r.rouge_l),
                    opt(r.semantic_similarity),
                    format!("{:.2}", r.delta_rouge1),
                    format!("{:.2}", r.delta_rouge2),
                    format!("{:.2}", r.delta_rouge_l),
                    opt(r.delta_semantic_similarity),
                    r.is_baseline.to_string(),
                ])?;
            }
            Ok(())
        }),
    }
}
