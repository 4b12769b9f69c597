//! The `efjsp` command-line tool.

pub mod gantt;
pub mod result;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::{Parser, Subcommand};
use efjsp_core::benchmark::{extend_instance, parse_base, read_instance, write_instance, GeneratorParams, Real};
use efjsp_core::encoding::MessageMatrices;
use efjsp_core::metrics::{c_metric, hv, igd, normalize, HV_REFERENCE};
use efjsp_core::model::{validate_instance, validate_schedule, ProblemInstance};
use efjsp_core::optimizer::{pareto::nondominated_filter, run_with_observer, Ablation, AlgorithmConfig, Point};
use efjsp_core::oracle::{enumerate_front, OracleLimits};
use efjsp_core::sample;
use serde::Serialize;

use result::{instance_hash, solution_records, ResultDocument, TraceRecord, RESULT_SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(name = "efjsp", version, about = "Energy-aware flexible job-shop scheduling with machine multi-states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extend classic FJSP base files into multi-state instance files.
    Generate {
        /// Base files in the classic text format.
        #[arg(required = true)]
        bases: Vec<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seeded variants per base; `--out` is then a directory.
        #[arg(long)]
        replicas: Option<usize>,
        /// Generator parameters as JSON (defaults otherwise).
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run D-DEPSO on an instance and write a result file.
    Solve {
        instance: PathBuf,
        /// Algorithm configuration as JSON; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        pop: Option<usize>,
        /// Disable a component: nhi, nde or ncp.
        #[arg(long)]
        ablate: Vec<Ablation>,
        /// Worker threads (0 = all cores).
        #[arg(long, env = "EFJSP_THREADS", default_value_t = 0)]
        threads: usize,
        /// Print one line per iteration to stderr.
        #[arg(long)]
        log: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// IGD, hypervolume and C-metric tables over result files.
    Metrics {
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Timeline CSV and SVG chart of one archived solution.
    Gantt {
        result: PathBuf,
        /// Archive index; 0 is the smallest makespan.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Output prefix; writes `<out>.csv` and `<out>.svg`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the two-job worked example instance.
    Sample {
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact Pareto front by enumeration, written as a result file.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value_t = 10_000_000)]
        max_points: u128,
        #[arg(long, env = "EFJSP_THREADS", default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check an instance, and optionally a timeline CSV against it.
    Validate {
        instance: PathBuf,
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn load_instance(path: &Path) -> Result<ProblemInstance> {
    read_instance(&read(path)?).with_context(|| format!("invalid instance file {}", path.display()))
}

fn load_result(path: &Path) -> Result<ResultDocument> {
    ResultDocument::read(&read(path)?).with_context(|| format!("invalid result file {}", path.display()))
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

/// Splits `mk01` into `("mk", Some(1))`.
fn split_stem(stem: &str) -> (&str, Option<usize>) {
    let digits = stem.len() - stem.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let (prefix, num) = stem.split_at(stem.len() - digits);
    (prefix, num.parse().ok())
}

/// Output files of `generate`: `(path, seed)` per `(base index, replica)`.
/// Replica `r` of base number `b` is numbered `(b - 1) * R + r + 1` and seeded
/// with `seed + number`.
pub fn replica_plan(bases: &[PathBuf], replicas: usize, seed: u64, out: &Path) -> Vec<(usize, PathBuf, u64)> {
    let mut plan = Vec::new();
    for (i, base) in bases.iter().enumerate() {
        let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "instance".into());
        let (prefix, num) = split_stem(&stem);
        let b = num.filter(|&n| n > 0).unwrap_or(i + 1);
        for r in 0..replicas {
            let number = (b - 1) * replicas + r + 1;
            plan.push((i, out.join(format!("{prefix}{number:02}.json")), seed.wrapping_add(number as u64)));
        }
    }
    plan
}

fn generate(bases: &[PathBuf], seed: u64, replicas: Option<usize>, params: Option<&Path>, out: &Path) -> Result<()> {
    let params: GeneratorParams = match params {
        Some(p) => serde_json::from_str(&read(p)?).with_context(|| format!("invalid generator parameters {}", p.display()))?,
        None => GeneratorParams::default(),
    };
    params.validate()?;
    let parsed = bases
        .iter()
        .map(|b| parse_base(&read(b)?).with_context(|| format!("invalid base file {}", b.display())))
        .collect::<Result<Vec<_>>>()?;
    match replicas {
        None if bases.len() == 1 => {
            let inst = extend_instance(&parsed[0], &params, seed)?;
            write(out, &write_instance(&inst)?)?;
            eprintln!("wrote {}", out.display());
        }
        _ => {
            let r = replicas.unwrap_or(1);
            ensure!(r > 0, "--replicas must be positive");
            for (i, path, s) in replica_plan(bases, r, seed, out) {
                let inst = extend_instance(&parsed[i], &params, s)?;
                write(&path, &write_instance(&inst)?)?;
            }
            eprintln!("wrote {} instances to {}", bases.len() * r, out.display());
        }
    }
    Ok(())
}

pub struct SolveArgs<'a> {
    pub instance: &'a Path,
    pub config: Option<&'a Path>,
    pub seed: Option<u64>,
    pub iters: Option<usize>,
    pub pop: Option<usize>,
    pub ablate: &'a [Ablation],
    pub threads: usize,
    pub log: bool,
    pub out: &'a Path,
}

fn solve(a: SolveArgs) -> Result<()> {
    let inst = load_instance(a.instance)?;
    let report = validate_instance(&inst);
    ensure!(report.is_ok(), "instance {} is invalid:\n{report}", a.instance.display());
    let mut cfg: AlgorithmConfig = match a.config {
        Some(p) => serde_json::from_str(&read(p)?).with_context(|| format!("invalid config {}", p.display()))?,
        None => AlgorithmConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(i) = a.iters {
        cfg.max_iter = i;
    }
    if let Some(p) = a.pop {
        cfg.population = p;
    }
    for &ab in a.ablate {
        cfg = cfg.with_ablation(ab);
    }
    cfg.validate()?;
    let start = Instant::now();
    let log = a.log;
    let outcome = pool(a.threads)?.install(|| {
        run_with_observer(&inst, &cfg, |r| {
            if log {
                eprintln!("iter {:>5}  best makespan {:>6}  best TEC {:>14.4}  archive {}", r.iteration, r.best_makespan, r.best_tec, r.archive.len());
            }
        })
    })?;
    let chromosomes: Vec<_> = outcome.archive.entries().iter().map(|e| e.chromosome.clone()).collect();
    let doc = ResultDocument {
        schema_version: RESULT_SCHEMA_VERSION,
        solver: "d-depso".into(),
        instance_sha256: instance_hash(&inst)?,
        instance_path: Some(a.instance.display().to_string()),
        config: Some(cfg),
        trace: outcome.trace.iter().map(TraceRecord::from_record).collect(),
        evaluations: outcome.evaluations,
        archive: solution_records(&inst, &chromosomes)?,
        wall_time_secs: Real(start.elapsed().as_secs_f64()),
    };
    write(a.out, &doc.to_text()?)?;
    eprintln!("{} solutions, {} evaluations, wrote {}", doc.archive.len(), doc.evaluations, a.out.display());
    Ok(())
}

fn oracle(instance: &Path, max_points: u128, threads: usize, out: &Path) -> Result<()> {
    let inst = load_instance(instance)?;
    let start = Instant::now();
    let front = pool(threads)?.install(|| enumerate_front(&inst, OracleLimits { max_points }))?;
    let chromosomes: Vec<_> = front.points.iter().map(|p| p.witness.clone()).collect();
    let doc = ResultDocument {
        schema_version: RESULT_SCHEMA_VERSION,
        solver: "oracle".into(),
        instance_sha256: instance_hash(&inst)?,
        instance_path: Some(instance.display().to_string()),
        config: None,
        trace: Vec::new(),
        evaluations: u64::try_from(front.space).unwrap_or(u64::MAX),
        archive: solution_records(&inst, &chromosomes)?,
        wall_time_secs: Real(start.elapsed().as_secs_f64()),
    };
    write(out, &doc.to_text()?)?;
    eprintln!("exact front of {} points over {} chromosomes, wrote {}", doc.archive.len(), front.space, out.display());
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct InstanceMetrics {
    pub instance_sha256: String,
    pub results: Vec<String>,
    pub reference_size: usize,
    pub objective_min: (Real, Real),
    pub objective_max: (Real, Real),
    pub igd: Vec<Real>,
    pub hv: Vec<Real>,
    /// `c_metric[a][b]`: fraction of result `b` dominated by result `a`.
    pub c_metric: Vec<Vec<Real>>,
}

#[derive(Debug, Serialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub hv_reference: (Real, Real),
    pub instances: Vec<InstanceMetrics>,
}

/// Metrics over `docs`, grouped by instance. The reference set of a group is
/// the non-dominated union of its fronts; objectives are normalized over the
/// union.
pub fn metrics_report(docs: &[(String, ResultDocument)]) -> Result<MetricsReport> {
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, (_, d)) in docs.iter().enumerate() {
        ensure!(!d.archive.is_empty(), "result {} has an empty archive", docs[i].0);
        match groups.iter_mut().find(|(h, _)| *h == d.instance_sha256) {
            Some((_, v)) => v.push(i),
            None => groups.push((d.instance_sha256.clone(), vec![i])),
        }
    }
    let mut instances = Vec::new();
    for (hash, members) in groups {
        let fronts: Vec<Vec<Point>> = members.iter().map(|&i| docs[i].1.points()).collect();
        let (norm, bounds) = normalize(&fronts).context("no objective points")?;
        let union: Vec<Point> = norm.iter().flatten().copied().collect();
        let reference: Vec<Point> = nondominated_filter(&union).into_iter().map(|i| union[i]).collect();
        let n = norm.len();
        instances.push(InstanceMetrics {
            instance_sha256: hash,
            results: members.iter().map(|&i| docs[i].0.clone()).collect(),
            reference_size: reference.len(),
            objective_min: (Real(bounds.min.0), Real(bounds.min.1)),
            objective_max: (Real(bounds.max.0), Real(bounds.max.1)),
            igd: norm.iter().map(|f| igd(&reference, f).map(Real)).collect::<Result<_, _>>()?,
            hv: norm.iter().map(|f| hv(f, HV_REFERENCE).map(Real)).collect::<Result<_, _>>()?,
            c_metric: (0..n)
                .map(|a| (0..n).map(|b| c_metric(&norm[a], &norm[b]).map(Real)).collect::<Result<_, _>>())
                .collect::<Result<_, _>>()?,
        });
    }
    Ok(MetricsReport { schema_version: RESULT_SCHEMA_VERSION, hv_reference: (Real(HV_REFERENCE.0), Real(HV_REFERENCE.1)), instances })
}

fn print_report(r: &MetricsReport) {
    for inst in &r.instances {
        println!("instance {} (reference set: {} points)", &inst.instance_sha256[..12], inst.reference_size);
        println!("  {:>3}  {:>10}  {:>10}  result", "#", "IGD", "HV");
        for (k, name) in inst.results.iter().enumerate() {
            println!("  {:>3}  {:>10.6}  {:>10.6}  {name}", k, inst.igd[k].0, inst.hv[k].0);
        }
        println!("  C-metric (row covers column):");
        for (k, row) in inst.c_metric.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|c| format!("{:.3}", c.0)).collect();
            println!("  {:>3}  {}", k, cells.join("  "));
        }
    }
}

fn metrics(results: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let docs = results
        .iter()
        .map(|p| Ok((p.display().to_string(), load_result(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let report = metrics_report(&docs)?;
    print_report(&report);
    if let Some(out) = out {
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        write(out, &text)?;
    }
    Ok(())
}

fn gantt_cmd(result: &Path, index: usize, out: &Path) -> Result<()> {
    let doc = load_result(result)?;
    let Some(sol) = doc.archive.get(index) else {
        bail!("solution index {index} out of range (archive holds {})", doc.archive.len());
    };
    let rows = gantt::timeline(sol);
    let csv_path = out.with_extension("csv");
    let svg_path = out.with_extension("svg");
    write(&csv_path, &gantt::write_csv(&rows)?)?;
    let title = format!("solution {index}: makespan {}, TEC {:.4}", sol.makespan, sol.tec.0);
    write(&svg_path, &gantt::render_svg(&rows, &title))?;
    eprintln!("wrote {} and {}", csv_path.display(), svg_path.display());
    Ok(())
}

/// Returns whether everything checked out.
fn validate_cmd(instance: &Path, schedule: Option<&Path>) -> Result<bool> {
    let inst = load_instance(instance)?;
    let report = validate_instance(&inst);
    println!("instance: {report}");
    let mut ok = report.is_ok();
    if let Some(path) = schedule {
        let rows = gantt::read_csv(&read(path)?).with_context(|| format!("invalid timeline {}", path.display()))?;
        let sched = gantt::schedule_from_timeline(&rows)?;
        let report = validate_schedule(&inst, &sched)?;
        println!("schedule: {report}");
        ok &= report.is_ok();
    }
    Ok(ok)
}

/// Runs a parsed command. `Ok(false)` means the command ran but found problems.
pub fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate { bases, seed, replicas, params, out } => generate(&bases, seed, replicas, params.as_deref(), &out)?,
        Command::Solve { instance, config, seed, iters, pop, ablate, threads, log, out } => solve(SolveArgs {
            instance: &instance,
            config: config.as_deref(),
            seed,
            iters,
            pop,
            ablate: &ablate,
            threads,
            log,
            out: &out,
        })?,
        Command::Metrics { results, out } => metrics(&results, out.as_deref())?,
        Command::Gantt { result, index, out } => gantt_cmd(&result, index, &out)?,
        Command::Sample { out } => {
            write(&out, &write_instance(&sample::instance())?)?;
            eprintln!("wrote {}", out.display());
        }
        Command::Oracle { instance, max_points, threads, out } => oracle(&instance, max_points, threads, &out)?,
        Command::Validate { instance, schedule } => return validate_cmd(&instance, schedule.as_deref()),
    }
    Ok(true)
}

/// Checks that a result's archive decodes back to its recorded schedules.
pub fn result_matches_instance(doc: &ResultDocument, inst: &ProblemInstance) -> Result<bool> {
    let mm = MessageMatrices::build(inst);
    for sol in &doc.archive {
        let rebuilt = result::SolutionRecord::build(inst, &mm, &sol.chromosome.to_chromosome()?)?;
        if &rebuilt != sol {
            return Ok(false);
        }
    }
    Ok(doc.instance_sha256 == instance_hash(inst)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stem_split() {
        assert_eq!(split_stem("mk01"), ("mk", Some(1)));
        assert_eq!(split_stem("dp"), ("dp", None));
        assert_eq!(split_stem("42"), ("", Some(42)));
    }

    #[test]
    fn replica_numbering() {
        let bases: Vec<PathBuf> = (1..=10).map(|i| PathBuf::from(format!("mk{i:02}.fjs"))).collect();
        let plan = replica_plan(&bases, 10, 7, Path::new("out"));
        assert_eq!(plan.len(), 100);
        assert_eq!(plan[0].1, PathBuf::from("out/mk01.json"));
        assert_eq!(plan[9].1, PathBuf::from("out/mk10.json"));
        assert_eq!(plan[10].1, PathBuf::from("out/mk11.json"));
        assert_eq!(plan[99].1, PathBuf::from("out/mk100.json"));
        assert_eq!(plan[99].2, 107);
        let names: std::collections::HashSet<_> = plan.iter().map(|p| p.1.clone()).collect();
        assert_eq!(names.len(), 100);
    }

    fn doc(points: &[(u64, f64)]) -> ResultDocument {
        let inst = sample::instance();
        let mut d = ResultDocument {
            schema_version: RESULT_SCHEMA_VERSION,
            solver: "test".into(),
            instance_sha256: "h".into(),
            instance_path: None,
            config: None,
            trace: vec![],
            evaluations: 0,
            archive: solution_records(&inst, &[sample::paper_chromosome()]).unwrap(),
            wall_time_secs: Real(0.0),
        };
        let template = d.archive[0].clone();
        d.archive = points.iter().map(|&(m, e)| result::SolutionRecord { makespan: m, tec: Real(e), ..template.clone() }).collect();
        d
    }

    #[test]
    fn self_comparison_is_neutral() {
        let d = doc(&[(10, 5.0), (12, 3.0)]);
        let r = metrics_report(&[("a".into(), d.clone()), ("b".into(), d)]).unwrap();
        let m = &r.instances[0];
        assert_eq!(m.igd, vec![Real(0.0), Real(0.0)]);
        assert_eq!(m.c_metric, vec![vec![Real(0.0), Real(0.0)], vec![Real(0.0), Real(0.0)]]);
    }

    #[test]
    fn three_results_give_square_matrix() {
        let docs = vec![
            ("a".to_string(), doc(&[(10, 5.0), (12, 3.0)])),
            ("b".to_string(), doc(&[(11, 6.0)])),
            ("c".to_string(), doc(&[(9, 9.0), (13, 2.0)])),
        ];
        let r = metrics_report(&docs).unwrap();
        let c = &r.instances[0].c_metric;
        assert_eq!(c.len(), 3);
        for (k, row) in c.iter().enumerate() {
            assert_eq!(row.len(), 3);
            assert_eq!(row[k], Real(0.0));
        }
        assert_eq!(c[0][1], Real(1.0));
        assert_eq!(r.instances[0].reference_size, 4);
    }

    #[test]
    fn empty_archive_is_rejected() {
        assert!(metrics_report(&[("a".into(), doc(&[]))]).is_err());
    }
}
