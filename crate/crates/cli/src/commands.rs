use std::path::PathBuf;

use cramer_model::analytic::{
    char_func_exact, char_func_gaussian, delta_law, fair_coin_theta, llt_sup_error, theta,
};
use cramer_model::calibration::{self, frozen, HEADROOM};
use cramer_model::error::{Error, Result};
use cramer_model::experiments::arith::{
    avoidance_experiment, delta_prime_experiment, fair_coin_prime_experiment, fair_coin_quasiprime_experiment,
    power_of_two_primes, quasiprime_experiment, sn_prime_experiment, AvoidanceConfig, QuasiprimeRange,
};
use cramer_model::experiments::battery::{run_battery, BatteryConfig};
use cramer_model::experiments::limits::{
    char_func_suite, delta_chi_square_experiment, delta_llt_experiment, delta_moments_experiment,
    divisibility_suite, exact_law_experiment, llt_suite, theta_bound_scan,
};
use cramer_model::experiments::paths::{
    amplitude_transfer_experiment, eigen_closed_form_experiment, gap_experiment, lil_experiment, PathScan,
    EIGEN_GRID,
};
use cramer_model::experiments::{default_workers, par_map, CsvTable};
use cramer_model::model::{exact_law, exact_law_mod, jump_instants, moments, sample_trajectory_with, MomentSweep};
use cramer_model::primes::{sieve, PrimeSet, PrimeTable};
use cramer_model::rng;
use cramer_model::stats::median;
use cramer_model::stochastic::{lil_subseq_statistic, ou_survival_prob, Monitoring, Subsequence};
use cramer_model::sturm_liouville::{lambda_curve, principal_eigenvalue, EigenProblem};
use cramer_model::{row, ModelKind, ModelSpec};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::{Cli, Command, MonitoringArg, Output, RunConfig, SetArg, SubseqArg};

/// Resolves options against per-command defaults and records what was used.
struct Ctx<'a> {
    opts: &'a RunConfig,
    used: Map<String, Value>,
}

impl<'a> Ctx<'a> {
    fn new(opts: &'a RunConfig, command: Command) -> Self {
        let mut used = Map::new();
        used.insert("subcommand".into(), json!(command.name()));
        let format = match opts.format {
            Some(crate::Format::Csv) => "csv",
            _ => "json",
        };
        used.insert("format".into(), json!(format));
        used.insert("output".into(), json!(opts.output.as_ref().map(|p| p.display().to_string())));
        Ctx { opts, used }
    }

    fn val<T: Serialize + Copy>(&mut self, key: &str, given: Option<T>, default: T) -> T {
        let v = given.unwrap_or(default);
        self.used.insert(key.into(), json!(v));
        v
    }

    fn note<T: Serialize>(&mut self, key: &str, v: T) {
        self.used.insert(key.into(), json!(v));
    }

    fn model(&mut self, default: ModelKind) -> Result<ModelSpec> {
        let kind = match &self.opts.model {
            Some(s) => s.parse::<ModelKind>()?,
            None => default,
        };
        self.note("model", kind.name());
        ModelSpec::named(kind)
    }

    fn seed(&mut self, default: u64) -> u64 {
        self.val("seed", self.opts.seed, default)
    }

    fn workers(&mut self) -> usize {
        let w = self.opts.workers.unwrap_or_else(default_workers).max(1);
        self.note("workers", w);
        w
    }

    fn out(self, command: Command, result: Value, reports: Vec<cramer_model::experiments::ComparisonReport>) -> Output {
        Output { command: command.name(), config: self.used, result, reports, table: None, wrote_files: false, failed: None }
    }
}

fn table_for(n: u64) -> Result<PrimeTable> {
    sieve(n.max(1000))
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub fn execute(cli: &Cli) -> Result<Output> {
    let o = &cli.opts;
    let cmd = cli.command;
    let mut cx = Ctx::new(o, cmd);
    match cmd {
        Command::Simulate => {
            let spec = cx.model(ModelKind::Cramer)?;
            let n = cx.val("n", o.n, 1000);
            let seed = cx.seed(42);
            let table = spec.weight_table(n)?;
            let traj = sample_trajectory_with(&spec, &table, seed);
            let jumps = jump_instants(&traj);
            let m = moments(&spec, n)?;
            let mut t = CsvTable::new(&["index", "instant"]);
            for (i, p) in jumps.instants.iter().enumerate() {
                t.push(row![i + 1, *p]);
            }
            let result = json!({"n": n, "s_n": traj.total(), "m_n": m.mean, "B_n": m.variance, "jumps": jumps});
            let mut out = cx.out(cmd, result, vec![]);
            out.table = Some(t);
            Ok(out)
        }
        Command::Moments => {
            let spec = cx.model(ModelKind::Cramer)?;
            let n = cx.val("n", o.n, 1000);
            let m = moments(&spec, n)?;
            let mut t = CsvTable::new(&["n", "m_n", "B_n"]);
            t.push(row![n, m.mean, m.variance]);
            let mut out = cx.out(cmd, json!({"n": n, "m_n": m.mean, "B_n": m.variance}), vec![]);
            out.table = Some(t);
            Ok(out)
        }
        Command::ExactLaw => {
            let spec = cx.model(ModelKind::Cramer)?;
            let n = cx.val("n", o.n, 1000);
            let law = exact_law(&spec, n)?;
            let report = exact_law_experiment(&spec, n)?;
            let mut t = CsvTable::new(&["k", "probability"]);
            for (k, p) in law.iter() {
                t.push(row![k, p]);
            }
            let result = json!({
                "window": law.window(), "total": law.total(), "truncated_mass": law.truncated_mass(),
                "mean": law.mean(), "variance": law.variance(),
            });
            let mut out = cx.out(cmd, result, vec![report]);
            out.table = Some(t);
            Ok(out)
        }
        Command::Llt => {
            let spec = cx.model(ModelKind::Cramer)?;
            let n = cx.val("n", o.n, 1000);
            let c_win = cx.val("c_win", o.c_win, 1.0);
            let calibrated = (spec.kind() == ModelKind::Cramer && c_win == 1.0).then(|| frozen().llt.value);
            let k = o.bound.or(calibrated);
            cx.note("bound", k);
            let e = llt_sup_error(&spec, n, c_win)?;
            let reports = llt_suite(&spec, &[n], c_win, k)?;
            Ok(cx.out(cmd, json!(e), reports))
        }
        Command::Charfunc => {
            let spec = cx.model(ModelKind::Cramer)?;
            let n = cx.val("n", o.n, 1000);
            let t = cx.val("freq", o.freq, 0.1);
            let points = cx.val("points", o.points, 200);
            let exact = char_func_exact(&spec, n, t)?;
            let gauss = char_func_gaussian(&spec, n, t)?;
            let reports = char_func_suite(&spec, n, points, 0.005)?;
            Ok(cx.out(cmd, json!({"exact": exact, "gaussian": gauss}), reports))
        }
        Command::Theta => {
            let spec = cx.model(ModelKind::FairCoin)?;
            let n = cx.val("n", o.n, 1000);
            let d = cx.val("d", o.d, 3);
            let th = if spec.kind() == ModelKind::FairCoin {
                fair_coin_theta(d, n)?
            } else {
                let m = moments(&spec, n)?;
                theta(d, m.mean, m.variance)?
            };
            let exact = exact_law_mod(&spec, n, d)?[0];
            let estimate = th.value / d as f64;
            let result = json!({"theta": th, "estimate": estimate, "exact": exact, "difference": exact - estimate});
            Ok(cx.out(cmd, result, vec![]))
        }
        Command::Divisibility => {
            let spec = cx.model(ModelKind::FairCoin)?;
            let n = cx.val("n", o.n, 1000);
            let d = cx.val("d", o.d, 3);
            let c = frozen();
            let fair = spec.kind() == ModelKind::FairCoin;
            let k = if fair { c.fair_divisibility.value } else { c.cramer_divisibility.value };
            let bound = cx.val("bound", o.bound, HEADROOM * k);
            let mut reports = vec![divisibility_suite(&spec, &[n], &[d], bound)?];
            if fair {
                reports.push(theta_bound_scan(&[n], 3.0)?);
            }
            Ok(cx.out(cmd, Value::Null, reports))
        }
        Command::DeltaLaw => {
            let k = cx.val("k", o.k, 10);
            let replicas = cx.val("replicas", o.replicas, 100_000);
            let seed = cx.seed(42);
            let workers = cx.workers();
            let bound = cx.val("bound", o.bound, HEADROOM * frozen().delta_llt.value);
            let reports = vec![
                delta_moments_experiment(k)?,
                delta_chi_square_experiment(k, replicas, seed, workers)?,
                delta_llt_experiment(k, bound)?,
            ];
            let hi = 2 * k + (20.0 * ((2 * k) as f64).sqrt()) as u64 + 20;
            let mut t = CsvTable::new(&["m", "probability"]);
            for m in k..=hi {
                t.push(row![m, delta_law(k, m)]);
            }
            let mut out = cx.out(cmd, Value::Null, reports);
            out.table = Some(t);
            Ok(out)
        }
        Command::PrimeProb => {
            let spec = cx.model(ModelKind::Cramer)?;
            let seed = cx.seed(42);
            let workers = cx.workers();
            let replicas = cx.val("replicas", o.replicas, 100_000);
            match spec.kind() {
                ModelKind::Cramer => {
                    let n = cx.val("n", o.n, 3000);
                    let b = cx.val("b", o.b, 1.0);
                    let k = cx.val("bound", o.bound, HEADROOM * frozen().sn_prime.value);
                    let t = table_for(n)?;
                    let reports = sn_prime_experiment(n, b, k, replicas, seed, workers, &t)?;
                    Ok(cx.out(cmd, Value::Null, reports))
                }
                ModelKind::FairCoin => {
                    let n = cx.val("n", o.n, 10_000);
                    let k = cx.val("bound", o.bound, HEADROOM * frozen().fair_prime.value);
                    let t = table_for(n)?;
                    let report = fair_coin_prime_experiment(n, k, replicas, seed, workers, &t)?;
                    Ok(cx.out(cmd, Value::Null, vec![report]))
                }
                other => Err(usage(format!("prime-prob supports cramer and fair_coin, not {other}"))),
            }
        }
        Command::Quasiprime => {
            let spec = cx.model(ModelKind::Cramer)?;
            let n = cx.val("n", o.n, 100_000);
            let zeta = cx.val("zeta", o.zeta, 10.0);
            let replicas = cx.val("replicas", o.replicas, 10_000);
            let seed = cx.seed(42);
            let workers = cx.workers();
            let t = table_for(n)?;
            match spec.kind() {
                ModelKind::Cramer => {
                    let c = cx.val("c", o.c, QuasiprimeRange::default().c);
                    let range = QuasiprimeRange { c, ..QuasiprimeRange::default() };
                    let report = quasiprime_experiment(n, zeta, range, replicas, seed, workers, &t)?;
                    Ok(cx.out(cmd, Value::Null, vec![report]))
                }
                ModelKind::FairCoin => {
                    let c0 = cx.val("bound", o.bound, HEADROOM * frozen().fair_quasiprime.value);
                    let reports = fair_coin_quasiprime_experiment(n, zeta, c0, replicas, seed, workers, &t)?;
                    Ok(cx.out(cmd, Value::Null, reports))
                }
                other => Err(usage(format!("quasiprime supports cramer and fair_coin, not {other}"))),
            }
        }
        Command::Avoidance => {
            let set_arg = o.set.unwrap_or(SetArg::Sparse);
            let j_max = cx.val("j_max", o.j_max, 8);
            let k = cx.val("k", o.k, 20);
            let replicas = cx.val("replicas", o.replicas, 100_000);
            let seed = cx.seed(42);
            let workers = cx.workers();
            let bound = cx.val("bound", o.bound, HEADROOM * frozen().avoidance.value);
            let limit = cx.val("horizon", o.horizon, 100_000);
            let t = table_for(limit)?;
            let (set, name) = match set_arg {
                SetArg::All => (PrimeSet::all(&t), "all primes"),
                SetArg::Sparse => (power_of_two_primes(&t, t.limit())?, "next prime >= 2^j"),
                SetArg::Empty => (PrimeSet::empty(), "empty"),
            };
            cx.note("set", name);
            let reports = vec![
                avoidance_experiment(&AvoidanceConfig::cubes(j_max, bound), &set, name)?,
                delta_prime_experiment(k, &set, name, replicas, seed, workers)?,
            ];
            Ok(cx.out(cmd, Value::Null, reports))
        }
        Command::Eigen => {
            let z = cx.val("z", o.z, 1.0);
            let grid = cx.val("grid_points", o.grid_points, EIGEN_GRID);
            let r = principal_eigenvalue(EigenProblem::with_grid(z, grid))?;
            let mut reports = Vec::new();
            if z == 1.0 {
                reports.push(eigen_closed_form_experiment(grid)?);
            }
            let mut t = CsvTable::new(&["z", "lambda", "residual", "asymptotic_ratio"]);
            let curve = match o.z_max {
                Some(hi) => {
                    let points = cx.val("points", o.points, 21);
                    cx.note("z_max", hi);
                    if points < 2 || !(hi > z) {
                        return Err(usage("a curve needs --z-max > --z and --points >= 2"));
                    }
                    let zs: Vec<f64> = (0..points).map(|i| z + (hi - z) * i as f64 / (points - 1) as f64).collect();
                    lambda_curve(&zs, grid)?
                }
                None => vec![],
            };
            if curve.is_empty() {
                t.push(row![z, r.lambda, r.residual, r.asymptotic_ratio]);
            }
            for p in &curve {
                t.push(row![p.z, p.lambda, p.residual, p.asymptotic_ratio]);
            }
            let mut out = cx.out(cmd, json!({"eigen": r, "curve": curve}), reports);
            out.table = Some(t);
            Ok(out)
        }
        Command::OuSurvival => {
            let z = cx.val("z", o.z, 1.0);
            let horizon = cx.val("t", o.t, 5.0);
            let dt = cx.val("dt", o.dt, 0.01);
            let replicas = cx.val("replicas", o.replicas, 100_000);
            let seed = cx.seed(42);
            let workers = cx.workers();
            let monitoring = match o.monitoring.unwrap_or(MonitoringArg::Bridge) {
                MonitoringArg::Grid => Monitoring::GridOnly,
                MonitoringArg::Bridge => Monitoring::BridgeCorrected,
            };
            cx.note("monitoring", monitoring);
            let mc = ou_survival_prob(z, horizon, dt, replicas, seed, monitoring, workers)?;
            let lambda = principal_eigenvalue(EigenProblem::new(z))?.lambda;
            let mut t = CsvTable::new(&["z", "t", "dt", "estimate", "ci_low", "ci_high"]);
            t.push(row![z, horizon, dt, mc.estimate, mc.ci_low, mc.ci_high]);
            let mut out = cx.out(cmd, json!({"survival": mc, "lambda": lambda}), vec![]);
            out.table = Some(t);
            Ok(out)
        }
        Command::Amplitude => {
            let k = cx.val("k", o.k, 6);
            let c = cx.val("c", o.c, 1.0);
            let z = cx.val("z", o.z, 1.0);
            let dt = cx.val("dt", o.dt, 0.01);
            let replicas = cx.val("replicas", o.replicas, 2000);
            let ou_replicas = cx.val("ou_replicas", o.ou_replicas, 100_000);
            let seed = cx.seed(42);
            let workers = cx.workers();
            let report = amplitude_transfer_experiment(k, c, z, replicas, ou_replicas, dt, seed, workers)?;
            Ok(cx.out(cmd, Value::Null, vec![report]))
        }
        Command::Gaps => {
            let c = cx.val("c", o.c, 0.5);
            let horizon = cx.val("horizon", o.horizon, 1_000_000);
            let seeds = cx.val("seeds", o.seeds, 10);
            let seed = cx.seed(42);
            let workers = cx.workers();
            let reports = gap_experiment(&PathScan { horizon, seeds }, c, seed, workers)?;
            Ok(cx.out(cmd, Value::Null, reports))
        }
        Command::LilSubseq => lil_subseq(cx, cmd),
        Command::Suite => suite(cx, cmd),
        Command::Calibrate => {
            let measured = calibration::measure()?;
            let check = calibration::verify(&measured, 1e-9);
            cx.note("rel_tol", 1e-9);
            let result = json!({
                "measured": measured, "frozen": frozen(), "matches_frozen": check.is_ok(),
                "mismatch": check.err().map(|e| e.to_string()),
            });
            let mut out = cx.out(cmd, result, vec![]);
            out.failed = Some(out.result["matches_frozen"] == json!(false));
            Ok(out)
        }
    }
}

fn lil_subseq(mut cx: Ctx<'_>, cmd: Command) -> Result<Output> {
    let o = cx.opts;
    let horizon = cx.val("horizon", o.horizon, 1_000_000);
    let seeds = cx.val("seeds", o.seeds, 10);
    let seed = cx.seed(42);
    let workers = cx.workers();
    let sub = o.subseq.unwrap_or(SubseqArg::All);
    let base = cx.val("base", o.base, std::f64::consts::E);
    if sub == SubseqArg::All && base == std::f64::consts::E {
        cx.note("subseq", "all");
        let report = lil_experiment(&PathScan { horizon, seeds }, seed, workers)?;
        return Ok(cx.out(cmd, Value::Null, vec![report]));
    }
    let seq = match sub {
        SubseqArg::All => Subsequence::All,
        SubseqArg::DoubleExp => Subsequence::double_exponential(horizon),
    };
    cx.note("subseq", if sub == SubseqArg::All { "all" } else { "double-exp" });
    let spec = ModelSpec::cramer();
    let table = spec.weight_table(horizon)?;
    let sweep = MomentSweep::new(&spec, horizon)?;
    let stats = par_map(seeds, workers, |i| {
        let t = sample_trajectory_with(&spec, &table, rng::derive_seed(seed, &[rng::tag("lil"), i]));
        lil_subseq_statistic(&t, &sweep, &seq, base, 1.0)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = stats.iter().map(|s| s.value).collect();
    Ok(cx.out(cmd, json!({"median": median(&values), "statistics": stats}), vec![]))
}

fn suite(mut cx: Ctx<'_>, cmd: Command) -> Result<Output> {
    let o = cx.opts;
    let seed = cx.seed(42);
    let workers = cx.workers();
    cx.note("only", &o.only);
    let dir = o.output.clone().unwrap_or_else(|| PathBuf::from("reports"));
    cx.note("output", dir.display().to_string());
    std::fs::create_dir_all(&dir)?;
    let config = Value::Object(cx.used.clone());
    let mut rows = Vec::new();
    let mut failed = false;
    for (id, name, res) in run_battery(&BatteryConfig { seed, workers }, &o.only) {
        let path = dir.join(format!("{id:02}-{name}.json"));
        let doc = match res {
            Ok(outcome) => {
                eprintln!("{}", outcome.line());
                failed |= !outcome.passed;
                rows.push(json!({
                    "id": id, "name": name, "passed": outcome.passed, "elapsed_ms": outcome.elapsed_ms,
                    "summary": outcome.summary,
                }));
                json!({"config": config, "outcome": outcome})
            }
            Err(e) => {
                eprintln!("[FAIL] {id:>2} {name}: error: {e}");
                failed = true;
                rows.push(json!({"id": id, "name": name, "passed": false, "error": e.to_string()}));
                json!({"config": config, "error": e.to_string()})
            }
        };
        std::fs::write(&path, serde_json::to_string_pretty(&doc).expect("serializes") + "\n")?;
    }
    let mut out = cx.out(cmd, json!({ "criteria": rows }), vec![]);
    out.failed = Some(failed);
    std::fs::write(dir.join("summary.json"), out.to_json())?;
    out.wrote_files = true;
    Ok(out)
}
