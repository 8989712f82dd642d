use std::fmt::Write as _;
use std::str::FromStr;

use super::{ConfusionMatrix, EvalError, PilotReport, Tally};
use crate::label::GestureLabel;
use crate::num::{fixed6, fmt6};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(Self::Text),
            "csv" => Ok(Self::Csv),
            _ => Err(EvalError::Format(s.to_string())),
        }
    }
}

fn rate_cell(t: Option<Tally>) -> String {
    match t.and_then(|t| t.rate()) {
        Some(r) => fixed6(r),
        None => "skipped".to_string(),
    }
}

fn header(m: &ConfusionMatrix, corner: &str) -> String {
    let mut s = corner.to_string();
    for c in m.cols() {
        let _ = write!(s, ",{c}");
    }
    s
}

fn render_csv(r: &PilotReport) -> String {
    let m = &r.matrix;
    let mut out = String::new();
    out.push_str(&header(m, "true\\pred"));
    out.push('\n');
    for (g, row) in m.rows().iter().zip(m.counts()) {
        out.push_str(g.as_str());
        for c in row {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    out.push_str(&header(m, "true\\pred %"));
    out.push('\n');
    for (g, row) in m.rows().iter().zip(m.percentages()) {
        out.push_str(g.as_str());
        for p in row {
            let _ = write!(out, ",{}", fmt6(p));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "overall_accuracy,{}", fixed6(r.overall_accuracy()));
    let _ = writeln!(out, "rm_rate,{}", rate_cell(r.rm));
    let _ = writeln!(out, "lm_rate,{}", rate_cell(r.lm));
    let _ = writeln!(out, "seed,{}", r.seed);
    out
}

fn percent(t: Option<Tally>) -> String {
    match t {
        Some(t) if t.total > 0 => format!(
            "{:.1}% ({}/{})",
            100.0 * t.correct as f64 / t.total as f64,
            t.correct,
            t.total
        ),
        _ => "skipped".to_string(),
    }
}

fn render_text(r: &PilotReport) -> String {
    let m = &r.matrix;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "pilot report: seed {}, {} participants, noise {}",
        r.seed,
        r.participants,
        fmt6(r.noise_sigma)
    );
    let _ = writeln!(out, "\npercent of true gestures (rows: prompted, columns: detected)");
    let _ = write!(out, "{:<6}", "");
    for c in m.cols() {
        let _ = write!(out, "{:>11}", c.as_str());
    }
    out.push('\n');
    for (g, row) in m.rows().iter().zip(m.percentages()) {
        let _ = write!(out, "{:<6}", g.as_str());
        for p in row {
            let _ = write!(out, "{p:>11.1}");
        }
        let _ = writeln!(out, "   n={}", m.row_total(*g));
    }
    let _ = writeln!(
        out,
        "\noverall accuracy: {}",
        percent(Some(Tally {
            correct: m.correct(),
            total: m.total()
        }))
    );
    let _ = writeln!(out, "RM (hand on mat): {}", percent(r.rm));
    let _ = writeln!(out, "LM (hand on mat): {}", percent(r.lm));
    let _ = writeln!(out, "\nper participant:");
    for (i, t) in r.per_participant.iter().enumerate() {
        let _ = writeln!(out, "  p{:02} {}", i + 1, percent(Some(*t)));
    }
    out
}

pub fn render_report(r: &PilotReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Text => render_text(r),
        ReportFormat::Csv => render_csv(r),
    }
    .into_bytes()
}

/// Contents of a report csv read back.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvReport {
    pub matrix: ConfusionMatrix,
    pub percentages: Vec<Vec<f64>>,
    pub overall_accuracy: f64,
    pub rm_rate: Option<f64>,
    pub lm_rate: Option<f64>,
    pub seed: u64,
}

pub fn parse_report_csv(text: &str) -> Result<CsvReport, EvalError> {
    let lines: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.split(',').collect()))
        .collect();
    let err = |line: usize, msg: &str| EvalError::Csv {
        line,
        msg: msg.to_string(),
    };
    let label = |line: usize, s: &str| -> Result<GestureLabel, EvalError> {
        s.parse().map_err(|_| err(line, &format!("unknown label {s:?}")))
    };
    let mut it = lines.iter().peekable();
    let (hl, head) = it.next().ok_or_else(|| err(1, "empty"))?;
    if head.first() != Some(&"true\\pred") {
        return Err(err(*hl, "expected counts header"));
    }
    let cols = head[1..].iter().map(|s| label(*hl, s)).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let mut counts = Vec::new();
    while let Some((n, cells)) = it.next_if(|(_, c)| c.first() != Some(&"true\\pred %")) {
        if cells.len() != cols.len() + 1 {
            return Err(err(*n, "wrong number of cells"));
        }
        rows.push(label(*n, cells[0])?);
        counts.push(
            cells[1..]
                .iter()
                .map(|c| c.parse::<u64>().map_err(|_| err(*n, "bad count")))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    let (pl, _) = it.next().ok_or_else(|| err(0, "missing percentage block"))?;
    let mut percentages = Vec::new();
    for _ in 0..rows.len() {
        let (n, cells) = it.next().ok_or_else(|| err(*pl, "short percentage block"))?;
        if cells.len() != cols.len() + 1 {
            return Err(err(*n, "wrong number of cells"));
        }
        percentages.push(
            cells[1..]
                .iter()
                .map(|c| c.parse::<f64>().map_err(|_| err(*n, "bad percentage")))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    let mut scalar = |key: &str| -> Result<(usize, String), EvalError> {
        let (n, cells) = it.next().ok_or_else(|| err(0, &format!("missing {key}")))?;
        match cells.as_slice() {
            [k, v] if *k == key => Ok((*n, v.to_string())),
            _ => Err(err(*n, &format!("expected {key}"))),
        }
    };
    let num = |(n, v): (usize, String)| v.parse::<f64>().map_err(|_| err(n, "bad number"));
    let opt = |(n, v): (usize, String)| -> Result<Option<f64>, EvalError> {
        if v == "skipped" {
            Ok(None)
        } else {
            num((n, v)).map(Some)
        }
    };
    let overall_accuracy = num(scalar("overall_accuracy")?)?;
    let rm_rate = opt(scalar("rm_rate")?)?;
    let lm_rate = opt(scalar("lm_rate")?)?;
    let (sn, sv) = scalar("seed")?;
    let seed = sv.parse().map_err(|_| err(sn, "bad seed"))?;
    let matrix = ConfusionMatrix::from_counts(rows, cols, counts).ok_or_else(|| err(*hl, "labels out of order"))?;
    Ok(CsvReport {
        matrix,
        percentages,
        overall_accuracy,
        rm_rate,
        lm_rate,
        seed,
    })
}
