//! Classic FJSP text format: a header line `n m [avg]`, then one line per job
//! holding the operation count followed, per operation, by the number of
//! alternatives and that many `(machine, duration)` pairs. Machines are 1-based
//! in the text.

use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::Time;

/// One alternative: 0-based machine and duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseOption {
    pub machine: usize,
    pub duration: Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseFjspInstance {
    pub machine_count: usize,
    /// `jobs[j][o]` lists the alternatives of operation `o` of job `j`.
    pub jobs: Vec<Vec<Vec<BaseOption>>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Line { line, message: message.into() }
}

fn numbers(line_no: usize, line: &str) -> Result<Vec<u64>, ParseError> {
    line.split_whitespace()
        .map(|t| t.parse::<u64>().map_err(|_| err(line_no, format!("expected a non-negative integer, found `{t}`"))))
        .collect()
}

pub fn parse_base(text: &str) -> Result<BaseFjspInstance, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or(ParseError::Empty)?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() < 2 || head.len() > 3 {
        return Err(err(hl, "header must be `jobs machines [average alternatives]`"));
    }
    let n: usize = head[0].parse().map_err(|_| err(hl, "job count is not an integer"))?;
    let m: usize = head[1].parse().map_err(|_| err(hl, "machine count is not an integer"))?;
    if let Some(avg) = head.get(2) {
        avg.parse::<f64>().map_err(|_| err(hl, "average alternatives is not a number"))?;
    }
    if n == 0 || m == 0 {
        return Err(err(hl, "job and machine counts must be positive"));
    }
    let mut jobs = Vec::with_capacity(n);
    for j in 0..n {
        let (ln, line) = lines.next().ok_or_else(|| err(hl, format!("expected {n} job lines, found {j}")))?;
        let nums = numbers(ln, line)?;
        let mut it = nums.into_iter();
        let mut take = |what: &str| it.next().ok_or_else(|| err(ln, format!("truncated job line: missing {what}")));
        let ops = take("operation count")?;
        if ops == 0 {
            return Err(err(ln, "job has no operations"));
        }
        let mut operations = Vec::new();
        for _ in 0..ops {
            let k = take("alternative count")?;
            if k == 0 {
                return Err(err(ln, "operation has no alternatives"));
            }
            let mut options = Vec::new();
            for _ in 0..k {
                let machine = take("machine id")? as usize;
                let duration = take("duration")?;
                if machine == 0 || machine > m {
                    return Err(err(ln, format!("machine {machine} outside 1..={m}")));
                }
                options.push(BaseOption { machine: machine - 1, duration });
            }
            operations.push(options);
        }
        if it.next().is_some() {
            return Err(err(ln, "trailing numbers after the last operation"));
        }
        jobs.push(operations);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, format!("unexpected content after {n} job lines")));
    }
    Ok(BaseFjspInstance { machine_count: m, jobs })
}

pub fn write_base(base: &BaseFjspInstance) -> String {
    let ops: usize = base.jobs.iter().map(Vec::len).sum();
    let alts: usize = base.jobs.iter().flatten().map(Vec::len).sum();
    let avg = if ops == 0 { 0.0 } else { alts as f64 / ops as f64 };
    let mut out = format!("{} {} {}\n", base.jobs.len(), base.machine_count, avg);
    for job in &base.jobs {
        let mut line = job.len().to_string();
        for op in job {
            write!(line, " {}", op.len()).unwrap();
            for o in op {
                write!(line, " {} {}", o.machine + 1, o.duration).unwrap();
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Shape of a random base instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseShape {
    pub jobs: usize,
    pub machines: usize,
    pub ops_per_job: (usize, usize),
    pub alternatives: (usize, usize),
    pub duration: (Time, Time),
}

impl BaseShape {
    /// 10 jobs on 6 machines, 5-7 operations, up to 3 alternatives, durations 1-6.
    pub fn mk_like() -> Self {
        Self { jobs: 10, machines: 6, ops_per_job: (5, 7), alternatives: (1, 3), duration: (1, 6) }
    }

    /// 10 jobs on 5 machines, 15-25 operations, 1-5 alternatives, durations 10-100.
    pub fn dp_like() -> Self {
        Self { jobs: 10, machines: 5, ops_per_job: (15, 25), alternatives: (1, 5), duration: (10, 100) }
    }
}

/// Random well-formed base instance with distinct machines per operation.
pub fn random_base(shape: &BaseShape, seed: u64) -> BaseFjspInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs = (0..shape.jobs)
        .map(|_| {
            let ops = rng.gen_range(shape.ops_per_job.0..=shape.ops_per_job.1);
            (0..ops)
                .map(|_| {
                    let k = rng.gen_range(shape.alternatives.0..=shape.alternatives.1.min(shape.machines));
                    rand::seq::index::sample(&mut rng, shape.machines, k)
                        .into_iter()
                        .map(|machine| BaseOption {
                            machine,
                            duration: rng.gen_range(shape.duration.0..=shape.duration.1),
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    BaseFjspInstance { machine_count: shape.machines, jobs }
}
