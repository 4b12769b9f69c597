//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

use std::time::{Duration, Instant};

use efjsp_core::benchmark::{
    extend_instance, parse_base, random_base, BaseShape, GeneratorParams, DP_SIZED_BASE, MK_SIZED_BASE,
};
use efjsp_core::encoding::{decode, random_chromosome, MessageMatrices};
use efjsp_core::energy::{interval_energy, total_energy, IntervalMode};
use efjsp_core::metrics::{c_metric, hv, igd, normalize};
use efjsp_core::model::{makespan, validate_schedule, IdleIntervalRecord, ProblemInstance};
use efjsp_core::optimizer::{pareto::nondominated_filter, run, Ablation, AlgorithmConfig, Point};
use efjsp_core::oracle::{cross_check, enumerate_front, OracleLimits};
use efjsp_core::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn golden_interval_energies() -> Outcome {
    let inst = sample::instance();
    let iv = |machine, start, end, p, n| IdleIntervalRecord { machine, start, end, prev_speed: Some(p), next_speed: Some(n) };
    let t = Instant::now();
    let a = interval_energy(&inst, &iv(0, 7, 13, 3, 2)).unwrap();
    let b = interval_energy(&inst, &iv(1, 15, 18, 2, 3)).unwrap();
    let elapsed = t.elapsed();
    let pass = a.idle_energy == 41.0
        && a.standby_energy == 30.0
        && a.mode == IntervalMode::Standby
        && a.energy == 30.0
        && b.idle_energy == 23.0
        && b.standby_energy == 24.0
        && b.mode == IntervalMode::Idle
        && b.energy == 23.0
        && elapsed < Duration::from_millis(1);
    outcome(
        pass,
        format!(
            "idle/standby {}/{} -> {} {}, {}/{} -> {} {}, {:?}",
            a.idle_energy,
            a.standby_energy,
            a.mode.as_str(),
            a.energy,
            b.idle_energy,
            b.standby_energy,
            b.mode.as_str(),
            b.energy,
            elapsed
        ),
    )
}

fn worked_sample_decode() -> Outcome {
    let inst = sample::instance();
    let chrom = sample::paper_chromosome();
    let t = Instant::now();
    let sched = decode(&inst, &chrom).unwrap();
    let e = total_energy(&inst, &sched);
    let elapsed = t.elapsed();
    let feasible = validate_schedule(&inst, &sched).unwrap().is_ok();
    let cmax = makespan(&sched).unwrap();
    let pass = feasible && cmax == 21 && e.ise == 53.0 && cross_check(&inst, &chrom) && elapsed < Duration::from_millis(1);
    outcome(pass, format!("feasible {feasible}, makespan {cmax} (want 21), ISE {} (want 53), {:?}", e.ise, elapsed))
}

fn oracle_equivalence() -> Outcome {
    let inst = sample::instance();
    let exact = enumerate_front(&inst, OracleLimits::default()).unwrap();
    let reference = exact.objective_points();
    let mut worst_igd: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    for seed in 0..10 {
        let cfg = AlgorithmConfig { population: 30, max_iter: 50, seed, ..Default::default() };
        let t = Instant::now();
        let out = run(&inst, &cfg).unwrap();
        slowest = slowest.max(t.elapsed());
        let found = out.archive.points();
        let (norm, _) = normalize(&[reference.clone(), found]).unwrap();
        worst_igd = worst_igd.max(igd(&norm[0], &norm[1]).unwrap());
    }
    let pass = worst_igd == 0.0 && slowest < Duration::from_secs(10);
    outcome(
        pass,
        format!(
            "{} decodes, exact front of {} points, worst IGD over 10 seeds {worst_igd}, slowest run {slowest:?}",
            exact.space,
            reference.len()
        ),
    )
}

fn mk_sized(seed: u64) -> ProblemInstance {
    extend_instance(&parse_base(MK_SIZED_BASE).unwrap(), &GeneratorParams::default(), seed).unwrap()
}

fn dp_sized(seed: u64) -> ProblemInstance {
    extend_instance(&parse_base(DP_SIZED_BASE).unwrap(), &GeneratorParams::default(), seed).unwrap()
}

fn feasibility_suite() -> Outcome {
    let instances = [("sample", sample::instance()), ("mk-sized", mk_sized(1)), ("dp-sized", dp_sized(1))];
    let mut details = Vec::new();
    let mut pass = true;
    for (name, inst) in &instances {
        let mm = MessageMatrices::build(inst);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut ok = 0;
        for _ in 0..1000 {
            let chrom = random_chromosome(&mm, &mut rng);
            let sched = decode(inst, &chrom).unwrap();
            if validate_schedule(inst, &sched).unwrap().is_ok() && cross_check(inst, &chrom) {
                ok += 1;
            }
        }
        pass &= ok == 1000;
        details.push(format!("{name} {ok}/1000"));
    }
    outcome(pass, details.join(", "))
}

fn metric_examples() -> Outcome {
    let checks = [
        igd(&[(0.0, 0.0), (1.0, 1.0)], &[(0.0, 0.0)]).unwrap() == 2f64.sqrt() / 2.0,
        igd(&[(0.0, 1.0), (1.0, 0.0)], &[(0.0, 1.0), (1.0, 0.0), (0.5, 0.5)]).unwrap() == 0.0,
        igd(&[(1.0, 1.0)], &[(4.0, 5.0)]).unwrap() == 5.0,
        hv(&[(1.0, 1.0)], (2.0, 2.0)).unwrap() == 1.0,
        hv(&[(1.0, 2.0), (2.0, 1.0)], (3.0, 3.0)).unwrap() == 3.0,
        hv(&[(1.0, 2.0), (2.0, 1.0), (2.0, 2.0)], (3.0, 3.0)).unwrap() == 3.0,
        c_metric(&[(0.0, 0.0)], &[(1.0, 1.0), (0.0, 0.0)]).unwrap() == 0.5,
        c_metric(&[(0.0, 1.0), (1.0, 0.0)], &[(0.0, 1.0), (1.0, 0.0)]).unwrap() == 0.0,
        c_metric(&[(0.0, 0.0)], &[(1.0, 2.0), (2.0, 1.0)]).unwrap() == 1.0,
    ];
    let ok = checks.iter().filter(|&&c| c).count();
    outcome(ok == checks.len(), format!("{ok}/{} examples exact", checks.len()))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn ablation_study() -> Outcome {
    let small = {
        let shape = BaseShape { jobs: 5, machines: 3, ops_per_job: (2, 4), alternatives: (1, 3), duration: (1, 6) };
        extend_instance(&random_base(&shape, 11), &GeneratorParams::default(), 11).unwrap()
    };
    let instances = [("small", small), ("medium", mk_sized(2)), ("large", dp_sized(2))];
    let variants: [(&str, Option<Ablation>); 4] =
        [("full", None), ("NHI", Some(Ablation::Nhi)), ("NDE", Some(Ablation::Nde)), ("NCP", Some(Ablation::Ncp))];
    let t = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for (name, inst) in &instances {
        // fronts[v][seed]
        let fronts: Vec<Vec<Vec<Point>>> = variants
            .iter()
            .map(|(_, ab)| {
                (0..10)
                    .map(|seed| {
                        let mut cfg = AlgorithmConfig { seed, ..Default::default() };
                        if let Some(a) = ab {
                            cfg = cfg.with_ablation(*a);
                        }
                        run(inst, &cfg).unwrap().archive.points()
                    })
                    .collect()
            })
            .collect();
        let all: Vec<Vec<Point>> = fronts.iter().flatten().cloned().collect();
        let (norm, _) = normalize(&all).unwrap();
        let union: Vec<Point> = norm.iter().flatten().copied().collect();
        let reference: Vec<Point> = nondominated_filter(&union).into_iter().map(|i| union[i]).collect();
        let medians: Vec<f64> = (0..variants.len())
            .map(|v| median((0..10).map(|s| igd(&reference, &norm[v * 10 + s]).unwrap()).collect()))
            .collect();
        let ok = medians[1..].iter().all(|&m| medians[0] <= m);
        pass &= ok;
        details.push(format!(
            "{name}: {}",
            variants.iter().zip(&medians).map(|((n, _), m)| format!("{n} {m:.4}")).collect::<Vec<_>>().join(" ")
        ));
    }
    let elapsed = t.elapsed();
    pass &= elapsed < Duration::from_secs(30 * 60);
    details.push(format!("{elapsed:.1?}"));
    outcome(pass, format!("median IGD {}", details.join("; ")))
}

fn thread_count_determinism() -> Outcome {
    let inst = mk_sized(3);
    let cfg = AlgorithmConfig { max_iter: 30, seed: 77, ..Default::default() };
    let with_threads = |n| {
        rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(|| run(&inst, &cfg).unwrap())
    };
    let one = with_threads(1);
    let four = with_threads(4);
    let again = with_threads(4);
    let pass = one == four && four == again;
    outcome(pass, format!("archives of {} points identical across 1/4/4 threads: {pass}", one.archive.len()))
}

fn generator_conformance() -> Outcome {
    let p = GeneratorParams::default();
    let base = parse_base(MK_SIZED_BASE).unwrap();
    let mut bad = Vec::new();
    for seed in 0..100 {
        let inst = extend_instance(&base, &p, seed).unwrap();
        for (bj, job) in base.jobs.iter().zip(&inst.jobs) {
            if !p.setup_time.contains(job.setup_time) {
                bad.push(format!("seed {seed}: setup time {}", job.setup_time));
            }
            for (bo, op) in bj.iter().zip(&job.operations) {
                for (k, alt) in bo.iter().enumerate() {
                    let d: Vec<u64> = op.options[3 * k..3 * k + 3].iter().map(|o| o.duration).collect();
                    if d != vec![3 * alt.duration, 2 * alt.duration, alt.duration] {
                        bad.push(format!("seed {seed}: durations {d:?}"));
                    }
                }
            }
        }
        for (m, spec) in inst.machines.iter().enumerate() {
            let pw = &spec.power;
            let t = spec.turn_on.as_ref().unwrap();
            let mut in_range = p.setup_power.contains(pw.setup_power) && p.standby_power.contains(pw.standby_power);
            for g in 1..=3 {
                let gf = g as f64;
                in_range &= p.process_base_power.contains(pw.process_power[g - 1] / gf);
                in_range &= p.idle_base_power.contains(pw.idle_power[g - 1] / gf);
                let rt = t[g - 1] / (pw.process_power[g - 1] - pw.standby_power);
                in_range &= rt >= p.turn_on_ratio.low * (1.0 - 1e-12) && rt <= p.turn_on_ratio.high * (1.0 + 1e-12);
                let dormancy = spec.switch.get(0, g);
                if (dormancy - 0.2 * t[g - 1]).abs() > 1e-12 * t[g - 1] || spec.switch.get(g, 0) != dormancy {
                    bad.push(format!("seed {seed} machine {m}: dormancy {dormancy} vs turn-on {}", t[g - 1]));
                }
                for h in 1..=3 {
                    if g != h {
                        let mean = (pw.process_power[g - 1] + pw.process_power[h - 1]) / 2.0;
                        let rs = spec.switch.get(g, h) / mean;
                        in_range &= rs >= p.switch_ratio.low * (1.0 - 1e-12) && rs <= p.switch_ratio.high * (1.0 + 1e-12);
                    }
                }
            }
            if !in_range {
                bad.push(format!("seed {seed} machine {m}: value out of range"));
            }
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "100 seeds in range".to_string() } else { bad[..bad.len().min(5)].join("; ") })
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("golden interval energies", golden_interval_energies),
        ("worked sample decode (makespan 21, ISE 53)", worked_sample_decode),
        ("oracle equivalence on the worked sample", oracle_equivalence),
        ("random chromosome feasibility and energy cross-check", feasibility_suite),
        ("metric unit values", metric_examples),
        ("ablation medians (full <= NHI, NDE, NCP)", ablation_study),
        ("solve determinism across thread counts", thread_count_determinism),
        ("generator conformance", generator_conformance),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|s| name.contains(s.as_str())) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("acceptance {} {verdict}: {name} -- {} [{:.2?}]", i + 1, o.detail, t.elapsed());
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
}
