//! Machine timeline export: a CSV data file and a static SVG chart.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use efjsp_core::model::{ScheduleTable, ScheduledRow, Time};
use serde::{Deserialize, Serialize};

use crate::result::SolutionRecord;

/// One timeline row. Identifiers are 1-based; `job`, `op` and `gear` are empty
/// where they do not apply.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineRow {
    pub machine: usize,
    pub kind: String,
    pub job: Option<usize>,
    pub op: Option<usize>,
    pub start: Time,
    pub end: Time,
    pub gear: Option<usize>,
}

/// Schedule rows followed by one idle/standby row per interval, ordered by
/// machine then start.
pub fn timeline(sol: &SolutionRecord) -> Vec<TimelineRow> {
    let mut rows: Vec<TimelineRow> = sol
        .schedule
        .iter()
        .map(|r| TimelineRow {
            machine: r.machine,
            kind: if r.op.is_some() { "process" } else { "setup" }.to_string(),
            job: Some(r.job),
            op: r.op,
            start: r.start,
            end: r.end,
            gear: r.gear,
        })
        .chain(sol.energy.intervals.iter().map(|i| TimelineRow {
            machine: i.machine,
            kind: i.mode.clone(),
            job: None,
            op: None,
            start: i.start,
            end: i.end,
            gear: (i.mode == "idle").then_some(i.gear),
        }))
        .collect();
    rows.sort_by_key(|r| (r.machine, r.start, r.end, r.kind != "setup"));
    rows
}

pub fn write_csv(rows: &[TimelineRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn read_csv(text: &str) -> Result<Vec<TimelineRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.context("malformed timeline row")).collect()
}

/// Setup and process rows of a timeline as a 0-based schedule table.
pub fn schedule_from_timeline(rows: &[TimelineRow]) -> Result<ScheduleTable> {
    let mut out = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let line = i + 2;
        let job = || r.job.filter(|&j| j > 0).with_context(|| format!("row {line}: missing job"));
        if r.machine == 0 {
            bail!("row {line}: machines are 1-based");
        }
        match r.kind.as_str() {
            "setup" => out.push(ScheduledRow { job: job()? - 1, op: None, machine: r.machine - 1, gear: 0, start: r.start, end: r.end }),
            "process" => {
                let op = r.op.filter(|&o| o > 0).with_context(|| format!("row {line}: missing op"))?;
                let gear = r.gear.with_context(|| format!("row {line}: missing gear"))?;
                out.push(ScheduledRow { job: job()? - 1, op: Some(op - 1), machine: r.machine - 1, gear, start: r.start, end: r.end });
            }
            "idle" | "standby" => {}
            other => bail!("row {line}: unknown kind `{other}`"),
        }
    }
    Ok(ScheduleTable::new(out))
}

const PALETTE: [&str; 10] =
    ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"];

pub fn render_svg(rows: &[TimelineRow], title: &str) -> String {
    let machines = rows.iter().map(|r| r.machine).max().unwrap_or(0);
    let horizon = rows.iter().map(|r| r.end).max().unwrap_or(0).max(1);
    let (left, top, lane, width) = (60.0, 40.0, 36.0, 800.0);
    let scale = width / horizon as f64;
    let height = top + lane * machines as f64 + 40.0;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="sans-serif" font-size="11">"#,
        left + width + 20.0
    )
    .unwrap();
    writeln!(s, r##"<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)"><rect width="6" height="6" fill="#ffffff"/><line x1="0" y1="0" x2="0" y2="6" stroke="#555555" stroke-width="2"/></pattern></defs>"##).unwrap();
    writeln!(s, r#"<text x="{left}" y="20" font-size="14">{}</text>"#, escape(title)).unwrap();
    for m in 1..=machines {
        let y = top + lane * (m - 1) as f64;
        writeln!(s, r#"<text x="10" y="{}">M{m}</text>"#, y + lane / 2.0 + 4.0).unwrap();
    }
    for r in rows {
        let x = left + r.start as f64 * scale;
        let w = (r.end - r.start) as f64 * scale;
        let y = top + lane * (r.machine - 1) as f64 + 4.0;
        let h = lane - 8.0;
        let (fill, label) = match r.kind.as_str() {
            "process" => {
                let j = r.job.unwrap_or(1);
                (PALETTE[(j - 1) % PALETTE.len()].to_string(), format!("O{},{} v{}", j, r.op.unwrap_or(0), r.gear.unwrap_or(0)))
            }
            "setup" => ("url(#hatch)".to_string(), format!("S{}", r.job.unwrap_or(0))),
            "idle" => ("#d9d9d9".to_string(), format!("idle v{}", r.gear.unwrap_or(0))),
            _ => ("#f5f5f5".to_string(), "standby".to_string()),
        };
        writeln!(
            s,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{fill}" stroke="#333333" stroke-width="0.5"><title>{} [{}, {}]</title></rect>"##,
            escape(&label),
            r.start,
            r.end
        )
        .unwrap();
        if w > 30.0 {
            writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 3.0, y + h / 2.0 + 4.0, escape(&label)).unwrap();
        }
    }
    let axis_y = top + lane * machines as f64 + 14.0;
    let step = ((horizon as f64 / 10.0).ceil() as Time).max(1);
    let mut t = 0;
    while t <= horizon {
        writeln!(s, r#"<text x="{:.2}" y="{axis_y}">{t}</text>"#, left + t as f64 * scale - 3.0).unwrap();
        t += step;
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::result::solution_records;
    use efjsp_core::sample;

    #[test]
    fn sample_timeline() {
        let inst = sample::instance();
        let sol = &solution_records(&inst, &[sample::paper_chromosome()]).unwrap()[0];
        let rows = timeline(sol);
        assert_eq!(rows.iter().filter(|r| r.kind == "process").count(), 6);
        assert_eq!(rows.iter().filter(|r| r.kind == "setup").count(), 3);
        assert_eq!(rows.iter().filter(|r| r.kind == "idle" || r.kind == "standby").count(), 2);
        let csv = write_csv(&rows).unwrap();
        assert!(csv.starts_with("machine,kind,job,op,start,end,gear\n"));
        let back = read_csv(&csv).unwrap();
        assert_eq!(back, rows);
        let sched = schedule_from_timeline(&back).unwrap();
        assert!(efjsp_core::model::validate_schedule(&inst, &sched).unwrap().is_ok());
        let svg = render_svg(&rows, "sample");
        assert!(svg.contains("url(#hatch)") && svg.ends_with("</svg>\n"));
    }
}
