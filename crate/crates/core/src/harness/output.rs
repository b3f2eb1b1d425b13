use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::run::{Aggregate, ExperimentOutput, Header, TrialRecord};
use crate::error::{Error, Result};

/// One line of the NDJSON result file.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Line {
    Header(Header),
    Trial(TrialRecord),
    Aggregate(Aggregate),
}

/// Header line, one line per trial in index order, then the aggregate.
pub fn write_ndjson(out: &ExperimentOutput, w: &mut impl Write) -> Result<()> {
    let mut put = |line: &Line| -> Result<()> {
        serde_json::to_writer(&mut *w, line)?;
        w.write_all(b"\n")?;
        Ok(())
    };
    put(&Line::Header(out.header.clone()))?;
    for r in &out.records {
        put(&Line::Trial(r.clone()))?;
    }
    put(&Line::Aggregate(out.aggregate.clone()))
}

pub fn to_ndjson_string(out: &ExperimentOutput) -> Result<String> {
    let mut buf = Vec::new();
    write_ndjson(out, &mut buf)?;
    Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
}

pub fn read_ndjson(text: &str) -> Result<ExperimentOutput> {
    let mut header = None;
    let mut records = Vec::new();
    let mut aggregate = None;
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line = serde_json::from_str(raw).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        match line {
            Line::Header(h) => header = Some(h),
            Line::Trial(r) => records.push(r),
            Line::Aggregate(a) => aggregate = Some(a),
        }
    }
    match (header, aggregate) {
        (Some(header), Some(aggregate)) => Ok(ExperimentOutput {
            header,
            records,
            aggregate,
        }),
        _ => Err(Error::Parse {
            line: 0,
            message: "missing header or aggregate line".into(),
        }),
    }
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

/// Trial records as CSV: `trial`, `error`, every scalar metric, and
/// `wall_ms` when timing was recorded.
pub fn write_csv(out: &ExperimentOutput, w: impl Write) -> Result<()> {
    let keys: BTreeSet<&str> = out
        .records
        .iter()
        .flat_map(|r| r.metrics.iter())
        .filter(|(_, v)| !v.is_object() && !v.is_array())
        .map(|(k, _)| k.as_str())
        .collect();
    let timed = out.records.iter().any(|r| r.wall_ms.is_some());
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));

    let mut wtr = csv::Writer::from_writer(w);
    let mut head = vec!["trial", "error"];
    head.extend(keys.iter().copied());
    if timed {
        head.push("wall_ms");
    }
    wtr.write_record(&head).map_err(csv_err)?;
    for r in &out.records {
        let mut row = vec![r.trial.to_string(), r.error.clone().unwrap_or_default()];
        row.extend(keys.iter().map(|k| cell(r.metrics.get(*k))));
        if timed {
            row.push(r.wall_ms.map(|t| t.to_string()).unwrap_or_default());
        }
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}
