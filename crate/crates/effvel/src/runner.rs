//! The subcommands as library functions.

use std::path::Path;
use std::time::{Duration, Instant};

use effvel_core::caloric::{
    bmo_inv_norm, caloric_besov_proxy, koch_tataru_norm, koch_tataru_profile, picard_mild_solve, NormReport,
};
use effvel_core::diagnostics::{
    bd_entropy, energy, growth_bound_check, lipschitz_diagnostic, monotonicity_check, sup_norm_series,
    FunctionalSeries, GrowthKind, GrowthReport, MonotonicityReport, T_MIN,
};
use effvel_core::evolution::{solve_augmented, solve_classical_1d};
use effvel_core::{AugmentedState, Parity, ScalarField, Scheme, Trajectory};
use serde::Serialize;

use crate::config::{Diagnostic, ExperimentConfig};
use crate::error::RunError;
use crate::output::{fmt_f64, OutputDir, RunManifest};

/// Relative per-sample tolerance of the energy and entropy monotonicity checks.
pub const MONOTONICITY_TOL: f64 = 1e-6;

/// Initial state and trajectory of `cfg`.
pub fn solve(cfg: &ExperimentConfig) -> Result<(AugmentedState, Trajectory), RunError> {
    let init = cfg.initial.build(cfg.grid, cfg.mu)?;
    let traj = match cfg.solver.scheme {
        Scheme::Augmented => solve_augmented(&init, &cfg.law, &cfg.solver)?,
        Scheme::Classical1d => {
            let u = init.u()?;
            solve_classical_1d(&init.rho, &u, &cfg.law, cfg.mu, &cfg.solver)?
        }
    };
    Ok((init, traj))
}

/// Scalar results of a run, as written to `norms.json`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub t_final: f64,
    pub steps: usize,
    pub samples: usize,
    pub norms: Vec<NormReport>,
    pub monotonicity: Vec<MonotonicityReport>,
    pub growth: Vec<GrowthReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz_sup: Option<f64>,
}

pub struct RunOutcome {
    pub manifest: RunManifest,
    pub summary: Summary,
    pub trajectory: Trajectory,
}

fn columns(series: &[&FunctionalSeries]) -> Vec<Vec<f64>> {
    let n = series.first().map_or(0, |s| s.points.len());
    (0..n)
        .map(|k| {
            let mut row = vec![series[0].points[k].0];
            row.extend(series.iter().map(|s| s.points[k].1));
            row
        })
        .collect()
}

fn write_field(out: &mut OutputDir, name: &str, s: &AugmentedState) -> Result<(), RunError> {
    let u = s.u()?;
    let xs = s.grid().coords();
    let rows = (0..xs.len()).map(|i| {
        vec![
            xs[i],
            s.rho.values()[i],
            s.m.values()[i],
            s.v.values()[i],
            u.values()[i],
        ]
    });
    out.csv(name, &["x", "rho", "m", "v", "u"], rows)
}

/// Solve, post-process and write every requested output into `dir`.
///
/// Failures are also recorded as `error.json` in `dir`.
pub fn run(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    let started = Instant::now();
    let mut out = OutputDir::create(dir)?;
    match run_into(cfg, &mut out) {
        Ok((summary, trajectory)) => {
            let manifest = out.finish(cfg, started.elapsed())?;
            Ok(RunOutcome {
                manifest,
                summary,
                trajectory,
            })
        }
        Err(e) => {
            out.json("error.json", &e.report())?;
            Err(e)
        }
    }
}

fn run_into(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<(Summary, Trajectory), RunError> {
    cfg.validate()?;
    let (init, traj) = solve(cfg)?;
    let last = traj.last().expect("trajectory holds the initial sample");
    let mut summary = Summary {
        t_final: last.t,
        steps: traj.steps.len(),
        samples: traj.samples.len(),
        ..Summary::default()
    };

    out.csv(
        "series_steps.csv",
        &["t", "dt", "min_rho", "max_rho", "v_sup", "u_sup"],
        traj.steps
            .iter()
            .map(|s| vec![s.t, s.dt, s.min_rho, s.max_rho, s.v_sup, s.u_sup]),
    )?;
    write_field(out, "field_initial.csv", &init)?;
    write_field(out, "field_final.csv", last)?;

    let functional =
        |name: &str, f: &dyn Fn(&AugmentedState) -> effvel_core::Result<effvel_core::diagnostics::Functional>| {
            let mut value = FunctionalSeries::new(name, "", Vec::new());
            let mut rate = FunctionalSeries::new("dissipation", "", Vec::new());
            for s in &traj.samples {
                let r = f(s)?;
                value.points.push((s.t, r.value));
                rate.points.push((s.t, r.dissipation));
            }
            Ok::<_, RunError>((value, rate))
        };
    if cfg.wants(Diagnostic::Energy) {
        let (value, rate) = functional("energy", &|s| energy(s, &cfg.law))?;
        out.csv(
            "series_energy.csv",
            &["t", "energy", "dissipation"],
            columns(&[&value, &rate]),
        )?;
        summary.monotonicity.push(monotonicity_check(&value, MONOTONICITY_TOL));
    }
    if cfg.wants(Diagnostic::BdEntropy) {
        let (value, rate) = functional("bd_entropy", &|s| bd_entropy(s, &cfg.law))?;
        out.csv(
            "series_bd_entropy.csv",
            &["t", "bd_entropy", "dissipation"],
            columns(&[&value, &rate]),
        )?;
        summary.monotonicity.push(monotonicity_check(&value, MONOTONICITY_TOL));
    }
    if cfg.wants(Diagnostic::Lipschitz) {
        let lip = lipschitz_diagnostic(&traj)?;
        out.csv("series_lipschitz.csv", &["t", "lipschitz"], columns(&[&lip]))?;
        summary.lipschitz_sup = lip.sup_from(T_MIN);
    }
    if cfg.wants(Diagnostic::SupNorms) {
        let sups = sup_norm_series(&traj)?;
        let refs: Vec<&FunctionalSeries> = sups.iter().collect();
        let mut header = vec!["t"];
        header.extend(sups.iter().map(|s| s.name.as_str()));
        out.csv("series_sup_norms.csv", &header, columns(&refs))?;
    }
    if cfg.wants(Diagnostic::KochTataru) {
        let profile = koch_tataru_profile(&traj)?;
        out.csv(
            "series_koch_tataru.csv",
            &["t", "sup_part", "carleson_part"],
            profile.iter().map(|(t, s, c)| vec![*t, *s, *c]),
        )?;
        summary.norms.push(koch_tataru_norm(&traj, last.t)?);
    }
    if cfg.wants(Diagnostic::BmoInv) {
        summary.norms.push(bmo_inv_norm(&init.m, &cfg.caloric)?);
    }
    if cfg.wants(Diagnostic::Growth) {
        for kind in [GrowthKind::Density, GrowthKind::Velocity] {
            summary
                .growth
                .push(growth_bound_check(&traj, &cfg.law, kind, cfg.growth_constant)?);
        }
    }
    out.json("norms.json", &summary)?;
    Ok((summary, traj))
}

/// Observed order between consecutive differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// Both differences vanish.
    Exact,
    Observed(f64),
    /// The coarser difference vanishes but the finer one does not.
    Undefined,
}

impl Order {
    fn between(coarse: f64, fine: f64) -> Order {
        match (coarse == 0.0, fine == 0.0) {
            (true, true) => Order::Exact,
            (true, false) => Order::Undefined,
            (false, true) => Order::Observed(f64::INFINITY),
            (false, false) => Order::Observed((coarse / fine).log2()),
        }
    }

    fn cell(&self) -> String {
        match self {
            Order::Exact => "exact".into(),
            Order::Undefined => "undefined".into(),
            Order::Observed(p) => fmt_f64(*p),
        }
    }

    pub fn at_least(&self, p: f64) -> bool {
        match self {
            Order::Exact => true,
            Order::Undefined => false,
            Order::Observed(q) => *q >= p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n_cells: usize,
    pub h: f64,
    /// `sup |f_h - f_{h/2}|` on the coarse nodes; absent on the finest level.
    pub diff_rho: Option<f64>,
    pub diff_v: Option<f64>,
    /// Order between this difference and the next finer one.
    pub order_rho: Option<Order>,
    pub order_v: Option<Order>,
}

/// Runs `cfg` at `h, h/2, ..., h/2^(levels-1)` concurrently and writes `convergence.csv`.
pub fn convergence_study(cfg: &ExperimentConfig, levels: usize, dir: &Path) -> Result<Vec<ConvergenceRow>, RunError> {
    if levels < 3 {
        return Err(RunError::Config("a convergence study needs at least 3 levels".into()));
    }
    cfg.validate()?;
    let configs = (0..levels)
        .map(|k| cfg.refined(1 << k))
        .collect::<Result<Vec<_>, _>>()?;
    let finals: Vec<AugmentedState> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| scope.spawn(move || solve(c).map(|(_, t)| t.samples.last().cloned().expect("sample"))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect::<Result<Vec<_>, RunError>>()
    })?;

    let coarse_diff = |a: &ScalarField, b: &ScalarField| -> f64 {
        a.values()
            .iter()
            .enumerate()
            .fold(0.0f64, |m, (i, x)| m.max((x - b.values()[2 * i]).abs()))
    };
    let diffs: Vec<(f64, f64)> = finals
        .windows(2)
        .map(|w| (coarse_diff(&w[0].rho, &w[1].rho), coarse_diff(&w[0].v, &w[1].v)))
        .collect();
    let rows: Vec<ConvergenceRow> = finals
        .iter()
        .enumerate()
        .map(|(k, s)| ConvergenceRow {
            n_cells: s.grid().n_cells(),
            h: s.grid().h(),
            diff_rho: diffs.get(k).map(|d| d.0),
            diff_v: diffs.get(k).map(|d| d.1),
            order_rho: diffs.get(k + 1).map(|d| Order::between(diffs[k].0, d.0)),
            order_v: diffs.get(k + 1).map(|d| Order::between(diffs[k].1, d.1)),
        })
        .collect();

    let mut text = String::from("n_cells,h,diff_rho,diff_v,order_rho,order_v\n");
    let num = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let ord = |x: Option<Order>| x.map(|o| o.cell()).unwrap_or_default();
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n_cells,
            fmt_f64(r.h),
            num(r.diff_rho),
            num(r.diff_v),
            ord(r.order_rho),
            ord(r.order_v)
        ));
    }
    let mut out = OutputDir::create(dir)?;
    out.csv_text("convergence.csv", &text)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub t_final: f64,
    pub iterations: usize,
    pub change: f64,
    pub rho: f64,
    pub v: f64,
    pub m: f64,
}

impl OracleReport {
    pub fn max_discrepancy(&self) -> f64 {
        self.rho.max(self.v).max(self.m)
    }
}

/// Finite-difference solve against the Picard/Duhamel solution at the final time; writes `oracle.json`.
pub fn oracle_compare(cfg: &ExperimentConfig, dir: &Path) -> Result<OracleReport, RunError> {
    let mut out = OutputDir::create(dir)?;
    let result = (|| -> Result<OracleReport, RunError> {
        cfg.validate()?;
        let (init, traj) = solve(cfg)?;
        let fd = traj.last().expect("sample");
        let picard = picard_mild_solve(&init, &cfg.law, fd.t, &cfg.picard)?;
        let mild = picard.trajectory.last().expect("sample");
        Ok(OracleReport {
            t_final: fd.t,
            iterations: picard.iterations,
            change: picard.change,
            rho: fd.rho.sup_distance(&mild.rho),
            v: fd.v.sup_distance(&mild.v),
            m: fd.m.sup_distance(&mild.m),
        })
    })();
    match result {
        Ok(report) => {
            out.json("oracle.json", &report)?;
            Ok(report)
        }
        Err(e) => {
            out.json("oracle.json", &e.report())?;
            Err(e)
        }
    }
}

fn read_field_csv(path: &Path, cfg: &ExperimentConfig) -> Result<AugmentedState, RunError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| RunError::Config(format!("{} has no `{name}` column", path.display())))
    };
    let (ir, im, iv) = (col("rho")?, col("m")?, col("v")?);
    let (mut rho, mut m, mut v) = (Vec::new(), Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        let get = |i: usize| -> Result<f64, RunError> {
            cells
                .get(i)
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| RunError::Config(format!("bad number in row {} of {}", k + 2, path.display())))
        };
        rho.push(get(ir)?);
        m.push(get(im)?);
        v.push(get(iv)?);
    }
    Ok(AugmentedState {
        t: 0.0,
        rho: ScalarField::new(cfg.grid, rho)?,
        m: ScalarField::with_parity(cfg.grid, m, Parity::Odd)?,
        v: ScalarField::with_parity(cfg.grid, v, Parity::Odd)?,
        mu: cfg.mu,
    })
}

/// Caloric norms of a stored field (or of the configured initial data); writes `norms.json`.
pub fn field_norms(cfg: &ExperimentConfig, field: Option<&Path>, dir: &Path) -> Result<Vec<NormReport>, RunError> {
    cfg.validate()?;
    let state = match field {
        Some(path) => read_field_csv(path, cfg)?,
        None => cfg.initial.build(cfg.grid, cfg.mu)?,
    };
    let deviation = state.rho.map(|r| r - 1.0);
    let rename = |mut r: NormReport, name: &str| {
        r.name = name.to_string();
        r
    };
    let norms = vec![
        rename(bmo_inv_norm(&state.m, &cfg.caloric)?, "bmo_inv_m"),
        rename(caloric_besov_proxy(&state.m, -1, &cfg.caloric)?, "caloric_minus_one_m"),
        rename(
            caloric_besov_proxy(&deviation, 1, &cfg.caloric)?,
            "caloric_plus_one_rho",
        ),
    ];
    let mut out = OutputDir::create(dir)?;
    out.json("norms.json", &norms)?;
    Ok(norms)
}

/// Seconds with millisecond resolution, for console output.
pub fn seconds(d: Duration) -> f64 {
    (d.as_millis() as f64) / 1000.0
}
