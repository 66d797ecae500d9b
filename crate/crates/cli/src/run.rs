//! Command execution and CSV reports.
//!
//! Every command writes its tables into the output directory together with
//! a `MANIFEST` of the files produced, also when it stops early.
//!
//! | command            | files                                        |
//! |--------------------|----------------------------------------------|
//! | `solve`            | `solve.csv`, `solve_summary.csv`             |
//! | `condition0`       | `condition0.csv`                             |
//! | `continuity`       | `continuity.csv`, `continuity_summary.csv`   |
//! | `estimate`         | `estimate.csv`, `estimate_summary.csv`       |
//! | `multipoint-check` | `multipoint.csv`, `multipoint_summary.csv`   |
//!
//! Exit codes: 0 solved or passed, 1 mathematical failure (singular problem,
//! failed or inconclusive condition), 2 usage or validation error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sobolev_bvp::{
    check_d_conditions, condition0_of, convergence_experiment, full_criterion, BvpSolver, ContinuityConfig, Error,
    Series, SolverConfig, TrendConfig, TwoSidedReport, Verdict,
};

use crate::build::{self, BuildError};
use crate::config::{Command, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Undef,
}

impl Cell {
    fn opt(x: Option<f64>) -> Self {
        x.map_or(Cell::Undef, Cell::Num)
    }

    fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(_) | Cell::Undef => "undef".into(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Rectangular table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "ragged CSV row");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub files: Vec<String>,
    pub message: String,
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn table(&mut self, name: &str, t: &CsvTable) -> std::io::Result<()> {
        self.text(name, &t.render())
    }

    fn text(&mut self, name: &str, body: &str) -> std::io::Result<()> {
        let mut f = fs::File::create(self.dir.join(name))?;
        f.write_all(body.as_bytes())?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn manifest(&self) -> std::io::Result<()> {
        let mut body = String::new();
        for f in &self.files {
            body.push_str(f);
            body.push('\n');
        }
        fs::write(self.dir.join("MANIFEST"), body)
    }
}

enum Failure {
    Usage(String),
    Math(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn core_failure(e: Error) -> Failure {
    match e {
        Error::NoUniqueSolution { .. } | Error::SingularFundamental { .. } | Error::SingularMatrix => {
            Failure::Math(e.to_string())
        }
        _ => Failure::Usage(e.to_string()),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        core_failure(e)
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Invalid(msg) => Failure::Usage(msg),
            BuildError::Core(e) => core_failure(e),
        }
    }
}

/// Run a validated configuration and write its reports into `out`.
pub fn run(command: Command, cfg: &ExperimentConfig, out: &Path) -> Outcome {
    if let Err(e) = fs::create_dir_all(out) {
        return Outcome {
            code: EXIT_USAGE,
            files: Vec::new(),
            message: format!("cannot create {}: {e}", out.display()),
        };
    }
    let mut w = Writer {
        dir: out.to_path_buf(),
        files: Vec::new(),
    };
    let result = match command {
        Command::Solve => solve(cfg, &mut w),
        Command::Condition0 => condition0(cfg, &mut w),
        Command::Continuity => continuity(cfg, &mut w),
        Command::Estimate => estimate(cfg, &mut w),
        Command::MultipointCheck => multipoint(cfg, &mut w),
    };
    let (code, message) = match result {
        Ok((true, msg)) => (EXIT_OK, msg),
        Ok((false, msg)) => (EXIT_FAIL, msg),
        Err(Failure::Math(msg)) => (EXIT_FAIL, msg),
        Err(Failure::Usage(msg)) => (EXIT_USAGE, msg),
        Err(Failure::Io(e)) => (EXIT_USAGE, format!("write error: {e}")),
    };
    if let Err(e) = w.manifest() {
        return Outcome {
            code: EXIT_USAGE,
            files: w.files,
            message: format!("write error: {e}"),
        };
    }
    Outcome {
        code,
        files: w.files,
        message,
    }
}

type Step = Result<(bool, String), Failure>;

fn solve(cfg: &ExperimentConfig, w: &mut Writer) -> Step {
    let prob = build::problem_at(cfg, cfg.eps)?;
    let solver = BvpSolver::new(
        &prob,
        &SolverConfig {
            tol_sing: cfg.tolerances.singular,
        },
    )?;
    let ch = solver.characteristic();
    let cond = solver.condition0();
    let mut summary = CsvTable::new(&[
        "eps",
        "condition0",
        "sigma_min",
        "sigma_max",
        "sigma_ratio",
        "residual_l",
        "residual_b",
    ]);
    let mut row = vec![
        Cell::Num(cfg.eps),
        Cell::text(cond.label()),
        Cell::Num(ch.sigma_min),
        Cell::Num(ch.sigma_max),
        Cell::Num(ch.ratio()),
    ];
    let rep = match solver.solve() {
        Ok(rep) => rep,
        Err(e @ Error::NoUniqueSolution { .. }) => {
            row.extend([Cell::Undef, Cell::Undef]);
            summary.push(row);
            w.table("solve_summary.csv", &summary)?;
            return Ok((false, e.to_string()));
        }
        Err(e) => return Err(e.into()),
    };
    let m = prob.params().m;
    let mut header = vec!["t".to_string()];
    for k in 1..=m {
        header.push(format!("y{k}_re"));
        header.push(format!("y{k}_im"));
    }
    let mut table = CsvTable {
        header,
        rows: Vec::new(),
    };
    for (i, t) in prob.grid().nodes().into_iter().enumerate() {
        let mut r = vec![Cell::Num(t)];
        for z in rep.y.at_node(0, i) {
            r.extend([Cell::Num(z.re), Cell::Num(z.im)]);
        }
        table.push(r);
    }
    w.table("solve.csv", &table)?;
    row.extend([Cell::Num(rep.residual_l), Cell::Num(rep.residual_b)]);
    summary.push(row);
    w.table("solve_summary.csv", &summary)?;
    Ok((
        true,
        format!("solved: residual_l {:e}, residual_b {:e}", rep.residual_l, rep.residual_b),
    ))
}

fn condition0(cfg: &ExperimentConfig, w: &mut Writer) -> Step {
    let prob = build::problem_at(cfg, cfg.eps)?;
    let (ch, cond) = condition0_of(&prob, cfg.tolerances.singular)?;
    let mut t = CsvTable::new(&["eps", "condition0", "sigma_min", "sigma_max", "sigma_ratio"]);
    t.push(vec![
        Cell::Num(cfg.eps),
        Cell::text(cond.label()),
        Cell::Num(ch.sigma_min),
        Cell::Num(ch.sigma_max),
        Cell::Num(ch.ratio()),
    ]);
    w.table("condition0.csv", &t)?;
    Ok((cond.is_nonsingular(), format!("condition (0): {} (sigma ratio {:e})", cond.label(), ch.ratio())))
}

fn trend(cfg: &ExperimentConfig) -> TrendConfig<f64> {
    TrendConfig::with_tol(cfg.tolerances.trend)
}

const SERIES_HEADER: &[&str] = &["check", "series", "eps", "value", "verdict"];

fn push_series(t: &mut CsvTable, check: &str, eps: &[f64], series: &[Series<f64>]) {
    for s in series {
        for (e, v) in eps.iter().zip(&s.values) {
            t.push(vec![
                Cell::text(check),
                Cell::text(s.label.clone()),
                Cell::Num(*e),
                Cell::Num(*v),
                Cell::text(s.verdict.to_string()),
            ]);
        }
    }
}

fn experiment_rows(t: &mut CsvTable, rep: &TwoSidedReport<f64>) {
    for row in &rep.rows {
        for (name, v) in [("error", row.error), ("discrepancy", Some(row.discrepancy)), ("ratio", row.ratio)] {
            t.push(vec![
                Cell::text("experiment"),
                Cell::text(name),
                Cell::Num(row.eps),
                Cell::opt(v),
                Cell::Undef,
            ]);
        }
    }
}

fn continuity(cfg: &ExperimentConfig, w: &mut Writer) -> Step {
    let fam = build::family(cfg)?;
    let ccfg = ContinuityConfig {
        trend: trend(cfg),
        min_samples: cfg.tolerances.min_samples,
        tol_sing: cfg.tolerances.singular,
        eps_cut: cfg.tolerances.eps_cut,
    };
    let rep = full_criterion(&fam, None, &ccfg)?;
    let eps = rep.eps.clone();
    let mut t = CsvTable::new(SERIES_HEADER);
    t.push(vec![
        Cell::text("condition0"),
        Cell::text("sigma_ratio"),
        Cell::Num(0.0),
        Cell::Num(rep.cond0.condition.ratio()),
        Cell::text(rep.cond0.verdict.to_string()),
    ]);
    push_series(&mut t, "limit_i", &eps, &rep.limit_i.coefficients);
    push_series(&mut t, "limit_ii", &eps, &rep.limit_ii.probes);
    if let Some(r24) = &rep.remark24 {
        push_series(&mut t, "remark24_alpha", &eps, &r24.alphas);
        push_series(&mut t, "remark24_phi", &eps, std::slice::from_ref(&r24.phi_norms));
        push_series(&mut t, "remark24_primitive", &eps, &r24.primitives);
    }
    if let Some(exp) = &rep.experiment {
        experiment_rows(&mut t, exp);
    }
    w.table("continuity.csv", &t)?;

    let mut s = CsvTable::new(&["check", "verdict"]);
    let mut verdicts = vec![
        ("condition0", rep.cond0.verdict),
        ("limit_i", rep.limit_i.verdict),
        ("limit_ii", rep.limit_ii.verdict),
    ];
    if let Some(r24) = &rep.remark24 {
        verdicts.push(("remark24", r24.verdict));
    }
    verdicts.push(("overall", rep.overall));
    for (name, v) in verdicts {
        s.push(vec![Cell::text(name), Cell::text(v.to_string())]);
    }
    w.table("continuity_summary.csv", &s)?;
    Ok((rep.overall == Verdict::Pass, format!("continuity: {}", rep.overall)))
}

fn estimate(cfg: &ExperimentConfig, w: &mut Writer) -> Step {
    let fam = build::family(cfg)?;
    let rep = convergence_experiment(&fam, cfg.tolerances.eps_cut)?;
    let mut t = CsvTable::new(&["eps", "error", "discrepancy", "ratio"]);
    for row in &rep.rows {
        t.push(vec![
            Cell::Num(row.eps),
            Cell::opt(row.error),
            Cell::Num(row.discrepancy),
            Cell::opt(row.ratio),
        ]);
    }
    w.table("estimate.csv", &t)?;
    let mut s = CsvTable::new(&["gamma_lo", "gamma_hi", "band", "fitted_rate", "discrepancy_rate"]);
    s.push(vec![
        Cell::opt(rep.gamma_lo),
        Cell::opt(rep.gamma_hi),
        Cell::opt(rep.band_width()),
        Cell::opt(rep.fitted_rate),
        Cell::opt(rep.discrepancy_rate),
    ]);
    w.table("estimate_summary.csv", &s)?;
    let failed: Vec<&str> = rep.rows.iter().filter_map(|r| r.failure.as_deref()).collect();
    if let Some(first) = failed.first() {
        return Ok((false, format!("{} instance(s) failed: {first}", failed.len())));
    }
    Ok((
        true,
        format!(
            "estimate: band {}, fitted rate {}",
            Cell::opt(rep.band_width()).render(),
            Cell::opt(rep.fitted_rate).render()
        ),
    ))
}

fn multipoint(cfg: &ExperimentConfig, w: &mut Writer) -> Step {
    let fam = build::multipoint_family(cfg)?;
    let rep = check_d_conditions(&fam, &trend(cfg))?;
    let mut t = CsvTable::new(SERIES_HEADER);
    for c in &rep.conditions {
        push_series(&mut t, c.name, &rep.eps, &c.series);
    }
    if let Some(li) = &rep.limit_ii {
        push_series(&mut t, "limit_ii", &rep.eps, &li.probes);
    }
    w.table("multipoint.csv", &t)?;
    let mut s = CsvTable::new(&["condition", "verdict"]);
    for c in &rep.conditions {
        s.push(vec![Cell::text(c.name), Cell::text(c.verdict.to_string())]);
    }
    if let Some(li) = &rep.limit_ii {
        s.push(vec![Cell::text("limit_ii"), Cell::text(li.verdict.to_string())]);
    }
    s.push(vec![Cell::text("overall"), Cell::text(rep.overall.to_string())]);
    w.table("multipoint_summary.csv", &s)?;
    if !rep.warnings.is_empty() {
        let mut body = rep.warnings.join("\n");
        body.push('\n');
        w.text("multipoint_warnings.txt", &body)?;
    }
    let probes_ok = rep.limit_ii.as_ref().is_none_or(|li| li.verdict == Verdict::Pass);
    Ok((
        rep.overall == Verdict::Pass && probes_ok,
        format!("multipoint-check: {}", rep.overall),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_rendering() {
        assert_eq!(Cell::Num(1.0).render(), "1.0000000000000000e0");
        assert_eq!(Cell::Num(-0.1).render(), "-1.0000000000000001e-1");
        assert_eq!(Cell::Num(f64::NAN).render(), "undef");
        assert_eq!(Cell::Num(f64::INFINITY).render(), "undef");
        assert_eq!(Cell::Undef.render(), "undef");
    }

    #[test]
    fn table_layout() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec![Cell::Num(2.0), Cell::text("pass")]);
        assert_eq!(t.render(), "a,b\n2.0000000000000000e0,pass\n");
    }
}
