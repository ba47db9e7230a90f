//! Batch execution: expands a config into tasks, runs them on a worker
//! pool, writes per-experiment CSVs plus a manifest, and aggregates a
//! finished directory into a summary table.
//!
//! Determinism contract: every numeric output is a pure function of
//! (config, seed).  The pool only changes wall-clock; rows land in task
//! order regardless of completion order.  Timestamps live in the
//! manifest alone.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::anticonc::proj_anticonc_experiment;
use crate::config::{parse_walk_policy, ExperimentConfig, ExperimentKind, Task};
use crate::ensemble::{sample_matrix, Time};
use crate::error::Error;
use crate::lawcheck::{default_grid, law_point};
use crate::potential::{potential_report, DeltaSchedule};
use crate::process::{run_process, simulate_drift_walk, ProcessConfig};
use crate::quasirandom::{cert_rank_cap, check_q_t, CertificateConfig};
use crate::report;
use crate::Result;

pub const THREADS_ENV: &str = "CIRCULAB_THREADS";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskStatus {
    pub index: usize,
    pub label: String,
    /// The task ran to completion.
    pub ok: bool,
    /// Invariant-class checks passed (chain replay, monotone singular
    /// values, potential sandwich).  Statistical thresholds never set this.
    pub hard_ok: bool,
    pub detail: String,
    pub millis: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub kind: String,
    /// SHA-256 of the config file bytes.
    pub config_digest: String,
    pub started_unix_ms: u64,
    pub wall_ms: u64,
    pub tasks: Vec<TaskStatus>,
    /// File name -> SHA-256 of contents, for every CSV written.
    pub outputs: BTreeMap<String, String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

struct TaskOutput {
    rows: Vec<String>,
    /// Per-step trace file for process runs.
    trace: Option<String>,
    hard_ok: bool,
    detail: String,
}

fn sandwich_scale(eps: f64) -> f64 {
    (1.0 - eps / 4.0) * (1.0 - eps)
}

fn run_task(task: &Task, cfg: &ExperimentConfig) -> Result<TaskOutput> {
    let o = &cfg.options;
    match task.kind {
        ExperimentKind::Potential => {
            let rep = potential_report(task.n, task.d, task.eps, task.z, &task.xi, task.seed)?;
            let mut hard_ok = true;
            let mut detail = String::new();
            if !rep.inf_flag {
                let upper = rep.t_n <= rep.t2 + 1e-9;
                let lower = rep.u_n >= rep.t1 / sandwich_scale(task.eps) - 1e-9;
                hard_ok = upper && lower;
                if !hard_ok {
                    detail = format!(
                        "sandwich violated: T_n={} T2={} U_n={} T1={}",
                        report::fmt_f64(rep.t_n),
                        report::fmt_f64(rep.t2),
                        report::fmt_f64(rep.u_n),
                        report::fmt_f64(rep.t1)
                    );
                }
            } else {
                detail = "infinite potential flagged".to_string();
            }
            Ok(TaskOutput { rows: vec![report::potential_row(&rep)], trace: None, hard_ok, detail })
        }
        ExperimentKind::Law => {
            let grid = default_grid(o.law_grid_cells, o.law_grid_limit);
            let point = law_point(task.n, task.d, task.eps, task.z, &task.xi, task.seed, &grid)?;
            let detail = format!(
                "disk_mass={} discrepancy={}",
                report::fmt_f64(point.disk_mass),
                report::fmt_f64(point.discrepancy)
            );
            Ok(TaskOutput { rows: vec![report::law_row(&point)], trace: None, hard_ok: true, detail })
        }
        ExperimentKind::Process => {
            let p = task.d / task.n as f64;
            let sample = sample_matrix(task.n, task.n, p, &task.xi, task.seed)?;
            let schedule = DeltaSchedule::two_regime(task.n, task.d, task.c_sched)?;
            let pconfig = ProcessConfig {
                certify: if o.certify_steps {
                    let mut c = CertificateConfig::new(o.beta);
                    c.c_star = task.c_star;
                    c.c_prime = task.c_prime;
                    c.subset_trials = o.subset_trials;
                    c.seed = task.seed;
                    Some(c)
                } else {
                    None
                },
            };
            let trace = run_process(&sample, task.n, task.eps, task.z, &schedule, &pconfig)?;
            let chain = trace.verify_chain(1e-9);
            let max_mono = trace
                .records
                .iter()
                .map(|r| r.monotone_violation)
                .fold(0.0f64, f64::max);
            let hard_ok = chain.holds && max_mono <= 1e-8;
            let detail = if hard_ok {
                format!("r_final={} h_final={}", trace.r_final, report::fmt_f64(trace.h_final_twice as f64 / 2.0))
            } else {
                format!(
                    "chain_holds={} max_monotone_violation={}",
                    chain.holds,
                    report::fmt_f64(max_mono)
                )
            };
            Ok(TaskOutput {
                rows: vec![report::process_row(&trace, &chain)],
                trace: Some(report::trace_file(&trace, &chain)),
                hard_ok,
                detail,
            })
        }
        ExperimentKind::Certify => {
            let p = task.d / task.n as f64;
            let sample = sample_matrix(task.n, task.n, p, &task.xi, task.seed)?;
            let t = Time::integer(task.n);
            let mut c = CertificateConfig::new(o.beta);
            c.c_star = task.c_star;
            c.c_prime = task.c_prime;
            c.subset_trials = o.subset_trials;
            c.seed = task.seed;
            let cap = cert_rank_cap(task.n, t, c.over_achievement_div);
            let checks = check_q_t(&sample, t, &c)?;
            let passed = checks.iter().filter(|e| e.verdict).count();
            let rows = checks
                .iter()
                .map(|e| report::certificate_row(task.seed, task.n, task.d, t, cap, e))
                .collect();
            Ok(TaskOutput {
                rows,
                trace: None,
                hard_ok: true,
                detail: format!("{}/{} events passed", passed, checks.len()),
            })
        }
        ExperimentKind::Anticonc => {
            let p = task.d / task.n as f64;
            let sample = sample_matrix(task.n, task.n, p, &task.xi, task.seed)?;
            let schedule = DeltaSchedule::two_regime(task.n, task.d, task.c_sched)?;
            let t = Time::integer(task.n);
            let r = task.n - o.rank_offset;
            let exp = proj_anticonc_experiment(
                &sample,
                t,
                r,
                task.z,
                None,
                task.eps,
                o.anticonc_trials,
                &schedule,
                task.seed,
            )?;
            let detail = format!(
                "freq={} shape={}",
                report::fmt_f64(exp.freq),
                report::fmt_f64(exp.shape_value)
            );
            Ok(TaskOutput {
                rows: vec![report::anticonc_row(task.seed, task.n, task.d, t, r, task.z, &exp)],
                trace: None,
                hard_ok: true,
                detail,
            })
        }
        ExperimentKind::Walk => {
            let policy = parse_walk_policy(&o.walk_policy)?;
            let y0_twice = (o.walk_y0 * 2.0) as u64;
            let rep = simulate_drift_walk(
                task.walk_steps,
                task.walk_q,
                y0_twice,
                policy,
                o.walk_trials,
                task.seed,
                o.threshold_div,
            )?;
            let detail = format!(
                "p_grounded={} mean_z={}",
                report::fmt_f64(rep.p_grounded),
                report::fmt_f64(rep.mean_z_final)
            );
            Ok(TaskOutput {
                rows: vec![report::walk_row(task.seed, task.walk_q, y0_twice, &o.walk_policy, &rep)],
                trace: None,
                hard_ok: true,
                detail,
            })
        }
    }
}

fn header_for(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Law => report::LAW_HEADER,
        ExperimentKind::Process => report::PROCESS_HEADER,
        ExperimentKind::Certify => report::CERTIFICATE_HEADER,
        ExperimentKind::Anticonc => report::ANTICONC_HEADER,
        ExperimentKind::Walk => report::WALK_HEADER,
        ExperimentKind::Potential => report::POTENTIAL_HEADER,
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{:02x}", b);
    }
    s
}

pub fn thread_count(parallelism: usize) -> Result<usize> {
    if parallelism > 0 {
        return Ok(parallelism);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| {
                Error::Config(format!("{}: {:?} is not a positive integer", THREADS_ENV, v))
            }),
        Err(_) => Ok(0),
    }
}

fn build_pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    let k = thread_count(parallelism)?;
    if k > 0 {
        b = b.num_threads(k);
    }
    b.build()
        .map_err(|e| Error::Config(format!("worker pool: {}", e)))
}

fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Executes a config file.  Returns the process exit code: 0 when every
/// task completed with its invariants intact, 1 otherwise.
pub fn run(config_path: &Path) -> Result<i32> {
    let bytes = fs::read(config_path)
        .map_err(|e| Error::Config(format!("config {}: {}", config_path.display(), e)))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Error::Config(format!("config {}: not UTF-8: {}", config_path.display(), e)))?;
    let cfg = ExperimentConfig::from_toml(text)?;
    let tasks = cfg.tasks()?;
    if tasks.is_empty() {
        return Err(Error::Config("grid: expands to zero tasks".into()));
    }
    fs::create_dir_all(&cfg.output)?;
    let pool = build_pool(cfg.parallelism)?;

    let started_unix_ms = unix_ms();
    let t0 = Instant::now();
    let results: Vec<(Result<TaskOutput>, u64)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|t| {
                let s = Instant::now();
                let out = run_task(t, &cfg);
                (out, s.elapsed().as_millis() as u64)
            })
            .collect()
    });

    let mut rows: Vec<String> = Vec::new();
    let mut statuses: Vec<TaskStatus> = Vec::new();
    let mut traces: Vec<(String, String)> = Vec::new();
    for (task, (res, millis)) in tasks.iter().zip(results) {
        match res {
            Ok(out) => {
                rows.extend(out.rows);
                if let Some(t) = out.trace {
                    traces.push((format!("trace_{:04}.csv", task.index), t));
                }
                statuses.push(TaskStatus {
                    index: task.index,
                    label: task.label(),
                    ok: true,
                    hard_ok: out.hard_ok,
                    detail: out.detail,
                    millis,
                });
            }
            Err(e) => statuses.push(TaskStatus {
                index: task.index,
                label: task.label(),
                ok: false,
                hard_ok: false,
                detail: format!("{}", e),
                millis,
            }),
        }
    }

    let mut outputs = BTreeMap::new();
    let main_name = format!("{}.csv", cfg.kind.as_str());
    let mut main_csv = String::with_capacity(rows.len() * 64 + 128);
    main_csv.push_str(header_for(cfg.kind));
    main_csv.push('\n');
    for r in &rows {
        main_csv.push_str(r);
        main_csv.push('\n');
    }
    fs::write(cfg.output.join(&main_name), &main_csv)?;
    outputs.insert(main_name, sha256_hex(main_csv.as_bytes()));
    for (name, content) in &traces {
        fs::write(cfg.output.join(name), content)?;
        outputs.insert(name.clone(), sha256_hex(content.as_bytes()));
    }

    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        kind: cfg.kind.as_str().to_string(),
        config_digest: sha256_hex(&bytes),
        started_unix_ms,
        wall_ms: t0.elapsed().as_millis() as u64,
        tasks: statuses,
        outputs,
    };
    let manifest_json =
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(cfg.output.join(MANIFEST_NAME), manifest_json)?;

    let ok = manifest.tasks.iter().filter(|t| t.ok).count();
    let hard_ok = manifest.tasks.iter().filter(|t| t.ok && t.hard_ok).count();
    let total = manifest.tasks.len();
    println!(
        "{}: {} tasks, {} completed, {} with invariants intact, {} rows -> {}",
        cfg.kind.as_str(),
        total,
        ok,
        hard_ok,
        rows.len(),
        cfg.output.display()
    );
    for t in manifest.tasks.iter().filter(|t| !(t.ok && t.hard_ok)) {
        println!("  FAILED [{}] {}: {}", t.index, t.label, t.detail);
    }
    Ok(if hard_ok == total { 0 } else { 1 })
}

fn read_csv_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Config(format!("{}: {}", path.display(), e)))?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::Config(format!("{}: {}", path.display(), e)))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Config(format!("{}: {}", path.display(), e)))?;
        rows.push(rec.iter().map(|s| s.to_string()).collect());
    }
    Ok((headers, rows))
}

fn column<'a>(
    headers: &[String],
    rows: &'a [Vec<String>],
    name: &str,
) -> Result<Vec<&'a str>> {
    let idx = headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Config(format!("summary: column {} missing", name)))?;
    Ok(rows.iter().map(|r| r[idx].as_str()).collect())
}

fn mean_of(vals: &[&str]) -> f64 {
    let nums: Vec<f64> = vals.iter().filter_map(|v| v.parse::<f64>().ok()).collect();
    if nums.is_empty() {
        f64::NAN
    } else {
        nums.iter().sum::<f64>() / nums.len() as f64
    }
}

fn frac_matching(vals: &[&str], pred: impl Fn(&str) -> bool) -> f64 {
    if vals.is_empty() {
        f64::NAN
    } else {
        vals.iter().filter(|v| pred(v)).count() as f64 / vals.len() as f64
    }
}

/// Aggregate metric rows for a finished run directory, shared by the
/// table printer and the machine-readable summary CSV.
pub fn summary_metrics(dir: &Path) -> Result<(RunManifest, Vec<(String, f64)>)> {
    let manifest_path = dir.join(MANIFEST_NAME);
    if !manifest_path.exists() {
        return Err(Error::Config(format!("no manifest in {}", dir.display())));
    }
    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(&manifest_path)?)
        .map_err(|e| Error::Config(format!("corrupt manifest: {}", e)))?;

    let total = manifest.tasks.len();
    let ok = manifest.tasks.iter().filter(|t| t.ok).count();
    let hard_ok = manifest.tasks.iter().filter(|t| t.ok && t.hard_ok).count();
    let mut metrics: Vec<(String, f64)> = vec![
        ("tasks_total".into(), total as f64),
        ("tasks_completed".into(), ok as f64),
        ("tasks_invariants_ok".into(), hard_ok as f64),
        (
            "pass_rate".into(),
            if total == 0 { f64::NAN } else { hard_ok as f64 / total as f64 },
        ),
    ];

    let csv_path = dir.join(format!("{}.csv", manifest.kind));
    if csv_path.exists() {
        let (headers, rows) = read_csv_columns(&csv_path)?;
        match manifest.kind.as_str() {
            "law" => {
                metrics.push(("mean_disk_mass".into(), mean_of(&column(&headers, &rows, "disk_mass")?)));
                metrics.push(("mean_discrepancy".into(), mean_of(&column(&headers, &rows, "discrepancy")?)));
                metrics.push(("mean_T1_dev".into(), mean_of(&column(&headers, &rows, "T1_dev")?)));
                metrics.push((
                    "frac_hs_bound_ok".into(),
                    frac_matching(&column(&headers, &rows, "HS_bound_ok")?, |v| v == "1"),
                ));
            }
            "potential" => {
                let t1: Vec<f64> = column(&headers, &rows, "T1")?
                    .iter()
                    .zip(column(&headers, &rows, "U_circ")?)
                    .filter_map(|(a, b)| Some((a.parse::<f64>().ok()? - b.parse::<f64>().ok()?).abs()))
                    .collect();
                let mean_t1_dev = if t1.is_empty() { f64::NAN } else { t1.iter().sum::<f64>() / t1.len() as f64 };
                metrics.push(("mean_T1_dev".into(), mean_t1_dev));
                metrics.push((
                    "frac_infinite".into(),
                    frac_matching(&column(&headers, &rows, "inf_flag")?, |v| v == "1"),
                ));
            }
            "process" => {
                metrics.push((
                    "frac_grounded".into(),
                    frac_matching(&column(&headers, &rows, "h_final")?, |v| v == "0"),
                ));
                metrics.push((
                    "frac_chain_holds".into(),
                    frac_matching(&column(&headers, &rows, "chain_holds")?, |v| v == "1"),
                ));
                metrics.push((
                    "mean_acceptance_rate".into(),
                    mean_of(&column(&headers, &rows, "acceptance_rate")?),
                ));
                metrics.push((
                    "mean_finite_candidate_rate".into(),
                    mean_of(&column(&headers, &rows, "finite_candidate_rate")?),
                ));
            }
            "certify" => {
                let events = column(&headers, &rows, "event")?;
                let verdicts = column(&headers, &rows, "verdict")?;
                let mut names: Vec<&str> = events.to_vec();
                names.sort_unstable();
                names.dedup();
                for name in names {
                    let total = events.iter().filter(|e| **e == name).count();
                    let passed = events
                        .iter()
                        .zip(&verdicts)
                        .filter(|(e, v)| **e == name && (**v == "pass" || **v == "vacuous"))
                        .count();
                    metrics.push((
                        format!("pass_rate_{}", name),
                        passed as f64 / total as f64,
                    ));
                }
            }
            "anticonc" => {
                metrics.push(("mean_freq".into(), mean_of(&column(&headers, &rows, "freq")?)));
                metrics.push((
                    "mean_bound_shape".into(),
                    mean_of(&column(&headers, &rows, "bound_shape_value")?),
                ));
                let within = column(&headers, &rows, "freq")?
                    .iter()
                    .zip(column(&headers, &rows, "bound_shape_value")?)
                    .filter_map(|(f, s)| Some((f.parse::<f64>().ok()?, s.parse::<f64>().ok()?)))
                    .collect::<Vec<_>>();
                metrics.push((
                    "frac_freq_within_shape".into(),
                    if within.is_empty() {
                        f64::NAN
                    } else {
                        within.iter().filter(|(f, s)| f <= s).count() as f64 / within.len() as f64
                    },
                ));
            }
            "walk" => {
                metrics.push(("mean_p_grounded".into(), mean_of(&column(&headers, &rows, "p_grounded")?)));
                metrics.push(("mean_z_final".into(), mean_of(&column(&headers, &rows, "mean_z_final")?)));
                metrics.push(("max_mean_z".into(), {
                    column(&headers, &rows, "max_mean_z")?
                        .iter()
                        .filter_map(|v| v.parse::<f64>().ok())
                        .fold(f64::NAN, f64::max)
                }));
            }
            _ => {}
        }
    }
    Ok((manifest, metrics))
}

/// Prints the fixed-width aggregate table and writes its machine-readable
/// twin `summary.csv` into the directory.  Exit code 0 iff every task
/// completed with invariants intact.
pub fn summarize(dir: &Path) -> Result<i32> {
    let (manifest, metrics) = summary_metrics(dir)?;
    println!(
        "run {} (artifact {}, config {})",
        manifest.kind,
        manifest.version,
        &manifest.config_digest[..12.min(manifest.config_digest.len())]
    );
    println!("{:<32} {:>18}", "metric", "value");
    println!("{:-<32} {:->18}", "", "");
    let mut csv = String::from("experiment,metric,value\n");
    for (name, value) in &metrics {
        println!("{:<32} {:>18}", name, report::fmt_f64(*value));
        let _ = writeln!(csv, "{},{},{}", manifest.kind, name, report::fmt_f64(*value));
    }
    fs::write(dir.join("summary.csv"), csv)?;
    let all_ok = manifest.tasks.iter().all(|t| t.ok && t.hard_ok);
    Ok(if all_ok { 0 } else { 1 })
}
