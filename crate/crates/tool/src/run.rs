//! Drivers for `smcmc run`: load data, run the chosen sampler, write files.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use smcmc_core::baselines::{parallel_mcmc, run_smc, SmcReport};
use smcmc_core::gp::{predict_many, simulate_probit, standardize, GpModel, GpObs, GpState};
use smcmc_core::mixture::{
    label_switch_fraction, simulate_data, sorted_mean_summary, MixtureModel, MixtureParams, MixtureSummary,
};
use smcmc_core::theory::run_suite;
use smcmc_core::{run_stream, EngineOptions, ExecPolicy, StepRecord};

use crate::config::{Algorithm, ModelKind, PredictGrid, RunConfig};
use crate::data::{load_csv, write_csv, Observations};
use crate::report::{fmt_f64, sha256_hex, write_json, Manifest, Table};
use crate::verify::report_table;

/// Runtime switches that do not affect sampled values.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub policy: ExecPolicy,
    /// Also write per-step wall-clock times (not reproducible).
    pub timing: bool,
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub outdir: PathBuf,
    pub files: Vec<PathBuf>,
    /// False when a verification check failed.
    pub passed: bool,
}

struct Writer {
    outdir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        let path = self.outdir.join(name);
        table.write(&path)?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.outdir.join(name);
        write_json(&path, value)?;
        self.files.push(path);
        Ok(())
    }
}

/// Run `cfg`, writing into `cfg.output`.
pub fn execute(cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutcome> {
    cfg.validate()?;
    let outdir = cfg.output.clone();
    std::fs::create_dir_all(&outdir).with_context(|| format!("creating {}", outdir.display()))?;
    let mut w = Writer {
        outdir: outdir.clone(),
        files: Vec::new(),
    };

    if cfg.algorithm == Algorithm::Verify {
        let v = cfg.verify.as_ref().expect("validated");
        let reports = run_suite(&v.suite, v.instances, cfg.seed, opts.policy)?;
        let passed = reports.iter().all(|r| r.passed());
        w.table("table.csv", &report_table(&reports))?;
        Manifest::new(cfg, None)?.write(&outdir)?;
        w.files.push(outdir.join(crate::report::MANIFEST));
        return Ok(RunOutcome {
            outdir,
            files: w.files,
            passed,
        });
    }

    let (obs, data_sha) = load_observations(cfg, &mut w)?;
    match (cfg.model(), obs) {
        (ModelKind::Mixture, Observations::Mixture(y)) => run_mixture(cfg, opts, &y, &mut w)?,
        (ModelKind::Gp, Observations::Gp(o)) => run_gp(cfg, opts, o, &mut w)?,
        _ => unreachable!("schema checked against model"),
    }
    Manifest::new(cfg, Some(data_sha))?.write(&outdir)?;
    w.files.push(outdir.join(crate::report::MANIFEST));
    Ok(RunOutcome {
        outdir,
        files: w.files,
        passed: true,
    })
}

fn load_observations(cfg: &RunConfig, w: &mut Writer) -> Result<(Observations, String)> {
    if let Some(d) = &cfg.data {
        let obs = load_csv(&d.path, d.schema)?;
        let bytes = std::fs::read(&d.path)?;
        return Ok((obs, sha256_hex(&bytes)));
    }
    let s = cfg.synthetic.as_ref().expect("validated");
    let obs = match cfg.model() {
        ModelKind::Mixture => {
            let truth = s.truth.clone().unwrap_or_else(MixtureParams::benchmark_truth);
            Observations::Mixture(simulate_data(&truth, s.n, s.seed)?)
        }
        ModelKind::Gp => Observations::Gp(simulate_probit(s.n, s.seed)),
    };
    let path = w.outdir.join("data.csv");
    write_csv(&path, &obs)?;
    w.files.push(path.clone());
    Ok((obs, sha256_hex(&std::fs::read(&path)?)))
}

fn engine_opts(opts: &RunOptions) -> EngineOptions {
    EngineOptions {
        policy: opts.policy,
        ..EngineOptions::default()
    }
}

fn steps_table(steps: &[StepRecord]) -> Table {
    let mut t = Table::new(["t", "horizon", "dim", "m_t", "cap_hit", "undefined"]);
    for s in steps {
        t.push(vec![
            s.t.to_string(),
            s.horizon.to_string(),
            s.dim.to_string(),
            s.m_t.to_string(),
            u8::from(s.cap_hit).to_string(),
            s.undefined.to_string(),
        ]);
    }
    t
}

fn fhat_table(steps: &[StepRecord]) -> Table {
    let mut t = Table::new(["t", "lag", "value"]);
    for s in steps {
        for p in &s.fhat {
            t.push(vec![
                s.t.to_string(),
                p.lag.to_string(),
                p.value.map(fmt_f64).unwrap_or_default(),
            ]);
        }
    }
    t
}

fn timing_table(steps: &[StepRecord]) -> Table {
    let mut t = Table::new(["t", "seconds"]);
    for s in steps {
        t.push(vec![s.t.to_string(), fmt_f64(s.elapsed.as_secs_f64())]);
    }
    t
}

fn means_header(prefix: &[&str], k: usize) -> Vec<String> {
    let mut h: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
    h.extend((1..=k).map(|j| format!("mean_{j}")));
    h.push("sd".into());
    h
}

/// One Table-1 row: algorithm, label, batch size, chains, iterations,
/// sorted means and their sd.
fn table_row(cfg: &RunConfig, iterations: usize, means: &[f64], sd: f64) -> Table {
    let mut t = Table::new(means_header(
        &["algorithm", "label", "batch_size", "chains", "iterations"],
        means.len(),
    ));
    let batch = cfg
        .schedule
        .as_ref()
        .and_then(|s| s.batch_sizes.first())
        .map_or_else(|| "all".to_string(), |b| b.to_string());
    let mut row = vec![
        cfg.algorithm.name().to_string(),
        cfg.label(),
        batch,
        cfg.chains().to_string(),
        iterations.to_string(),
    ];
    row.extend(means.iter().map(|m| fmt_f64(*m)));
    row.push(fmt_f64(sd));
    t.push(row);
    t
}

#[derive(Serialize)]
struct MixtureReport<'a> {
    algorithm: &'a str,
    total_iterations: usize,
    sorted_means: &'a [f64],
    sd: f64,
    label_switch_fraction: Option<f64>,
    steps: &'a [StepRecord],
}

fn run_mixture(cfg: &RunConfig, opts: &RunOptions, y: &[f64], w: &mut Writer) -> Result<()> {
    let sec = cfg.mixture_section();
    let mut model = MixtureModel::new(sec.hyper.clone(), sec.init.clone())?;
    let k = sec.hyper.k;
    match cfg.algorithm {
        Algorithm::Smcmc => {
            let sched = cfg.schedule();
            let report = run_stream(
                y.iter().copied(),
                &mut model,
                &sched,
                cfg.chains(),
                cfg.seed,
                &engine_opts(opts),
            )?;
            w.table("steps.csv", &steps_table(&report.steps))?;
            w.table("fhat.csv", &fhat_table(&report.steps))?;
            if opts.timing {
                w.table("timing.csv", &timing_table(&report.steps))?;
            }
            w.table("summary.csv", &mixture_summary_table(&report.summaries, k))?;
            let mut trace = Table::new((0..=k).map(|j| if j == 0 { "t".into() } else { format!("mu_{j}") }));
            let mut orders = Table::new(["t", "chain", "order"]);
            for (t, s) in &report.summaries {
                let mut row = vec![t.to_string()];
                row.extend(s.trace_mu.iter().map(|m| fmt_f64(*m)));
                trace.push(row);
                for (l, c) in s.order_codes.iter().enumerate() {
                    orders.push(vec![t.to_string(), l.to_string(), c.to_string()]);
                }
            }
            w.table("trace.csv", &trace)?;
            w.table("orders.csv", &orders)?;
            let (means, sd) = sorted_mean_summary(report.ensemble.states());
            let total = report.total_iterations();
            w.table("table.csv", &table_row(cfg, total, &means, sd))?;
            w.json(
                "report.json",
                &MixtureReport {
                    algorithm: "smcmc",
                    total_iterations: total,
                    sorted_means: &means,
                    sd,
                    label_switch_fraction: Some(label_switch_fraction(&report.summaries)),
                    steps: &report.steps,
                },
            )?;
        }
        Algorithm::Mcmc => {
            let iters = cfg.mcmc.as_ref().expect("validated").iterations;
            let ens = parallel_mcmc(&mut model, y, iters, cfg.chains(), cfg.seed, opts.policy)?;
            let (means, sd) = sorted_mean_summary(ens.states());
            w.table("table.csv", &table_row(cfg, iters, &means, sd))?;
            w.json(
                "report.json",
                &MixtureReport {
                    algorithm: "mcmc",
                    total_iterations: iters,
                    sorted_means: &means,
                    sd,
                    label_switch_fraction: None,
                    steps: &[],
                },
            )?;
        }
        Algorithm::Smc => {
            let smc = cfg.smc.clone().unwrap_or_default();
            let report = run_smc(
                y,
                &sec.hyper,
                &sec.init,
                &smc,
                &cfg.schedule(),
                cfg.chains(),
                cfg.seed,
                opts.policy,
            )?;
            write_smc(cfg, &report, &smc, k, w)?;
        }
        Algorithm::Verify => unreachable!(),
    }
    Ok(())
}

fn mixture_summary_table(summaries: &[(usize, MixtureSummary)], k: usize) -> Table {
    let mut t = Table::new(means_header(&["t"], k));
    for (step, s) in summaries {
        let mut row = vec![step.to_string()];
        row.extend(s.sorted_means.iter().map(|m| fmt_f64(*m)));
        row.push(fmt_f64(s.sd));
        t.push(row);
    }
    t
}

#[derive(Serialize)]
struct SmcJson<'a> {
    algorithm: &'a str,
    move_sweeps: usize,
    sorted_means: &'a [f64],
    sd: f64,
    steps: &'a [smcmc_core::baselines::SmcStepRecord],
}

fn write_smc(
    cfg: &RunConfig,
    report: &SmcReport,
    smc: &smcmc_core::baselines::SmcConfig,
    k: usize,
    w: &mut Writer,
) -> Result<()> {
    let mut steps = Table::new([
        "t",
        "horizon",
        "ess",
        "resampled",
        "acc_mu",
        "acc_lambda",
        "acc_w",
    ]);
    for s in &report.steps {
        steps.push(vec![
            s.t.to_string(),
            s.horizon.to_string(),
            fmt_f64(s.ess),
            u8::from(s.resampled).to_string(),
            fmt_f64(s.acceptance[0]),
            fmt_f64(s.acceptance[1]),
            fmt_f64(s.acceptance[2]),
        ]);
    }
    w.table("steps.csv", &steps)?;
    let mut summary = Table::new(means_header(&["t"], k));
    for (t, means, sd) in &report.summaries {
        let mut row = vec![t.to_string()];
        row.extend(means.iter().map(|m| fmt_f64(*m)));
        row.push(fmt_f64(*sd));
        summary.push(row);
    }
    w.table("summary.csv", &summary)?;
    let (_, means, sd) = report.summaries.last().expect("at least one step");
    let sweeps = smc.move_count * report.steps.iter().filter(|s| s.resampled).count();
    w.table("table.csv", &table_row(cfg, sweeps, means, *sd))?;
    w.json(
        "report.json",
        &SmcJson {
            algorithm: "smc",
            move_sweeps: sweeps,
            sorted_means: means,
            sd: *sd,
            steps: &report.steps,
        },
    )
}

/// Points of a prediction grid, in data units, row-major over (x1, x2).
pub fn grid_points(g: &PredictGrid) -> Vec<Vec<f64>> {
    let axis = |r: [f64; 2]| -> Vec<f64> {
        (0..g.resolution)
            .map(|i| r[0] + (r[1] - r[0]) * i as f64 / (g.resolution - 1) as f64)
            .collect()
    };
    let (a, b) = (axis(g.x1), axis(g.x2));
    a.iter()
        .flat_map(|&u| b.iter().map(move |&v| vec![u, v]))
        .collect()
}

fn prediction_table(points: &[Vec<f64>], probs: &[f64]) -> Table {
    let mut t = Table::new(["x1", "x2", "prob"]);
    for (p, q) in points.iter().zip(probs) {
        t.push(vec![fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(*q)]);
    }
    t
}

fn h_table(rows: &[(usize, Vec<usize>)], h: usize) -> Table {
    let mut t = Table::new((0..=h).map(|j| if j == 0 { "t".into() } else { format!("h_{j}") }));
    for (step, counts) in rows {
        let mut row = vec![step.to_string()];
        row.extend(counts.iter().map(|c| c.to_string()));
        t.push(row);
    }
    t
}

#[derive(Serialize)]
struct GpJson<'a> {
    algorithm: &'a str,
    total_iterations: usize,
    covariate_means: &'a [f64],
    covariate_sds: &'a [f64],
    steps: &'a [StepRecord],
}

fn run_gp(cfg: &RunConfig, opts: &RunOptions, mut obs: Vec<GpObs>, w: &mut Writer) -> Result<()> {
    let sec = cfg.gp_section();
    let mut xs: Vec<Vec<f64>> = obs.iter().map(|o| o.x.clone()).collect();
    let (means, sds) = if sec.standardize {
        standardize(&mut xs)
    } else {
        let d = xs.first().map_or(0, Vec::len);
        (vec![0.0; d], vec![1.0; d])
    };
    for (o, x) in obs.iter_mut().zip(xs) {
        o.x = x;
    }
    let to_model = |p: &Vec<f64>| -> Vec<f64> {
        p.iter()
            .enumerate()
            .map(|(j, v)| (v - means[j]) / sds[j])
            .collect()
    };
    let points = sec.predict.as_ref().map(grid_points).unwrap_or_default();
    let model_points: Vec<Vec<f64>> = points.iter().map(to_model).collect();
    let steps = sec.predict.as_ref().map(|p| p.steps.clone()).unwrap_or_default();
    let grid_len = sec.sampler.grid.size;
    let mut model = GpModel::new(sec.sampler.clone())?.with_predictions(steps.clone(), model_points.clone());

    match cfg.algorithm {
        Algorithm::Smcmc => {
            let report = run_stream(
                obs,
                &mut model,
                &cfg.schedule(),
                cfg.chains(),
                cfg.seed,
                &engine_opts(opts),
            )?;
            w.table("steps.csv", &steps_table(&report.steps))?;
            w.table("fhat.csv", &fhat_table(&report.steps))?;
            if opts.timing {
                w.table("timing.csv", &timing_table(&report.steps))?;
            }
            let rows: Vec<(usize, Vec<usize>)> = report
                .summaries
                .iter()
                .map(|(t, s)| (*t, s.h_counts.clone()))
                .collect();
            w.table("hcounts.csv", &h_table(&rows, grid_len))?;
            for (t, s) in &report.summaries {
                if let Some(p) = &s.predictions {
                    w.table(&format!("predictions_t{t}.csv"), &prediction_table(&points, p))?;
                }
            }
            w.json(
                "report.json",
                &GpJson {
                    algorithm: "smcmc",
                    total_iterations: report.total_iterations(),
                    covariate_means: &means,
                    covariate_sds: &sds,
                    steps: &report.steps,
                },
            )?;
        }
        Algorithm::Mcmc => {
            let iters = cfg.mcmc.as_ref().expect("validated").iterations;
            let n = obs.len();
            let ens = parallel_mcmc(&mut model, &obs, iters, cfg.chains(), cfg.seed, opts.policy)?;
            let states: &[GpState] = ens.states();
            let mut counts = vec![0; grid_len];
            for s in states {
                counts[s.h] += 1;
            }
            w.table("hcounts.csv", &h_table(&[(n, counts)], grid_len))?;
            if !points.is_empty() {
                let p = predict_many(states, model.cache(), &model_points);
                w.table("predictions_final.csv", &prediction_table(&points, &p))?;
            }
            w.json(
                "report.json",
                &GpJson {
                    algorithm: "mcmc",
                    total_iterations: iters,
                    covariate_means: &means,
                    covariate_sds: &sds,
                    steps: &[],
                },
            )?;
        }
        _ => unreachable!("validated"),
    }
    Ok(())
}

/// Directory a run writes into, given an optional override.
pub fn output_dir(cfg: &RunConfig, over: Option<&Path>) -> PathBuf {
    over.map_or_else(|| cfg.output.clone(), Path::to_path_buf)
}
