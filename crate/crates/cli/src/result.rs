//! Result files written by `solve` and `oracle` and read by `metrics` and
//! `gantt`. Job, operation, machine and column numbers are 1-based.

use anyhow::{bail, Context, Result};
use efjsp_core::benchmark::{write_instance, Real};
use efjsp_core::encoding::{decode_with, Chromosome, MessageMatrices};
use efjsp_core::energy::{total_energy, EnergyBreakdown};
use efjsp_core::model::{ProblemInstance, ScheduleTable, ScheduledRow, Time};
use efjsp_core::optimizer::{AlgorithmConfig, IterationRecord, Objectives};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const RESULT_SCHEMA_VERSION: u32 = 1;

/// SHA-256 of the instance's canonical file text.
pub fn instance_hash(inst: &ProblemInstance) -> Result<String> {
    let text = write_instance(inst)?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ChromosomeRecord {
    pub os: Vec<usize>,
    pub mv: Vec<usize>,
}

impl ChromosomeRecord {
    pub fn from_chromosome(c: &Chromosome) -> Self {
        Self { os: c.os.iter().map(|j| j + 1).collect(), mv: c.mv.iter().map(|k| k + 1).collect() }
    }

    pub fn to_chromosome(&self) -> Result<Chromosome> {
        let dec = |v: &[usize], what: &str| {
            v.iter()
                .map(|&x| x.checked_sub(1).with_context(|| format!("{what} entries are 1-based; found 0")))
                .collect::<Result<Vec<_>>>()
        };
        Ok(Chromosome { os: dec(&self.os, "os")?, mv: dec(&self.mv, "mv")? })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RowRecord {
    pub machine: usize,
    pub job: usize,
    /// Absent on setup rows.
    pub op: Option<usize>,
    pub gear: Option<usize>,
    pub start: Time,
    pub end: Time,
}

impl RowRecord {
    pub fn from_row(r: &ScheduledRow) -> Self {
        Self {
            machine: r.machine + 1,
            job: r.job + 1,
            op: r.op.map(|o| o + 1),
            gear: r.op.map(|_| r.gear),
            start: r.start,
            end: r.end,
        }
    }

    pub fn to_row(&self) -> Result<ScheduledRow> {
        if self.machine == 0 || self.job == 0 || self.op == Some(0) {
            bail!("schedule identifiers are 1-based; found 0");
        }
        Ok(ScheduledRow {
            job: self.job - 1,
            op: self.op.map(|o| o - 1),
            machine: self.machine - 1,
            gear: self.gear.unwrap_or(0),
            start: self.start,
            end: self.end,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IntervalRecord {
    pub machine: usize,
    pub start: Time,
    pub end: Time,
    pub mode: String,
    pub gear: usize,
    pub energy: Real,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EnergyRecord {
    pub ie1: Real,
    pub ie2: Real,
    pub se1: Real,
    pub se2: Real,
    pub ise: Real,
    pub tec: Real,
    pub intervals: Vec<IntervalRecord>,
}

impl EnergyRecord {
    pub fn from_breakdown(b: &EnergyBreakdown) -> Self {
        Self {
            ie1: Real(b.ie1),
            ie2: Real(b.ie2),
            se1: Real(b.se1),
            se2: Real(b.se2),
            ise: Real(b.ise),
            tec: Real(b.tec),
            intervals: b
                .interval_decisions
                .iter()
                .map(|d| IntervalRecord {
                    machine: d.interval.machine + 1,
                    start: d.interval.start,
                    end: d.interval.end,
                    mode: d.mode.as_str().to_string(),
                    gear: d.idle_gear,
                    energy: Real(d.energy),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SolutionRecord {
    pub makespan: Time,
    pub tec: Real,
    pub chromosome: ChromosomeRecord,
    pub schedule: Vec<RowRecord>,
    pub energy: EnergyRecord,
}

impl SolutionRecord {
    pub fn build(inst: &ProblemInstance, mm: &MessageMatrices, chrom: &Chromosome) -> Result<Self> {
        let sched = decode_with(inst, mm, chrom)?;
        let energy = total_energy(inst, &sched);
        let makespan = efjsp_core::model::makespan(&sched)?;
        Ok(Self {
            makespan,
            tec: Real(energy.tec),
            chromosome: ChromosomeRecord::from_chromosome(chrom),
            schedule: sched.rows.iter().map(RowRecord::from_row).collect(),
            energy: EnergyRecord::from_breakdown(&energy),
        })
    }

    pub fn schedule_table(&self) -> Result<ScheduleTable> {
        Ok(ScheduleTable::new(self.schedule.iter().map(RowRecord::to_row).collect::<Result<_>>()?))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub best_makespan: Time,
    pub best_tec: Real,
    /// `(makespan, tec)` of every archive member.
    pub archive: Vec<(Time, Real)>,
}

impl TraceRecord {
    pub fn from_record(r: &IterationRecord) -> Self {
        Self {
            iteration: r.iteration,
            best_makespan: r.best_makespan,
            best_tec: Real(r.best_tec),
            archive: r.archive.iter().map(|o| (o.makespan, Real(o.tec))).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub schema_version: u32,
    /// `d-depso` or `oracle`.
    pub solver: String,
    pub instance_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<AlgorithmConfig>,
    #[serde(default)]
    pub trace: Vec<TraceRecord>,
    pub evaluations: u64,
    /// Sorted by makespan, then energy.
    pub archive: Vec<SolutionRecord>,
    /// Excluded from determinism guarantees.
    pub wall_time_secs: Real,
}

impl ResultDocument {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.archive.iter().map(|s| (s.makespan as f64, s.tec.0)).collect()
    }

    pub fn objectives(&self) -> Vec<Objectives> {
        self.archive.iter().map(|s| Objectives { makespan: s.makespan, tec: s.tec.0 }).collect()
    }

    pub fn read(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.schema_version != RESULT_SCHEMA_VERSION {
            bail!("unsupported result schema_version {} (expected {RESULT_SCHEMA_VERSION})", doc.schema_version);
        }
        Ok(doc)
    }

    pub fn to_text(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Solution records of `chromosomes`, ordered by makespan then energy.
pub fn solution_records(inst: &ProblemInstance, chromosomes: &[Chromosome]) -> Result<Vec<SolutionRecord>> {
    let mm = MessageMatrices::build(inst);
    let mut out = chromosomes.iter().map(|c| SolutionRecord::build(inst, &mm, c)).collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.makespan.cmp(&b.makespan).then(a.tec.0.total_cmp(&b.tec.0)));
    Ok(out)
}
