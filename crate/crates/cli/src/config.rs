//! Experiment configuration files (JSON).
//!
//! Validation reports every problem it finds: unknown keys, type errors per
//! section, malformed expressions and inconsistent dimensions.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::expr::{parse, Expr, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Condition0,
    Continuity,
    Estimate,
    MultipointCheck,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Condition0 => "condition0",
            Command::Continuity => "continuity",
            Command::Estimate => "estimate",
            Command::MultipointCheck => "multipoint-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default)]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    #[serde(default)]
    pub n: usize,
    #[serde(default = "two")]
    pub p: f64,
}

impl Default for SpaceSpec {
    fn default() -> Self {
        Self { n: 0, p: 2.0 }
    }
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

/// Matrix of expressions, row-major as nested arrays.
pub type ExprMatrix = Vec<Vec<String>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum BoundarySpec {
    /// Linear rows in solution references, e.g. `"y(a) + eps*y'(0.5)"`.
    Rows { rows: Vec<String> },
    /// `sum_k alpha_k y^{(k-1)}(a) + int Phi y^{(n+r)}`.
    Canonical {
        alpha: Vec<ExprMatrix>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phi: Option<ExprMatrix>,
    },
    /// Grouped points with explicit limit points.
    Multipoint {
        limit_points: Vec<String>,
        terms: Vec<TermSpec>,
        /// Coefficients of the limiting form; defaults to the terms at
        /// `eps = 0`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        limit: Option<Vec<LimitTermSpec>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    /// `0` for points without a limit, `i >= 1` for `limit_points[i-1]`.
    pub group: usize,
    pub point: String,
    pub order: usize,
    pub coeff: ExprMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTermSpec {
    pub group: usize,
    pub order: usize,
    pub coeff: ExprMatrix,
}

/// Problem data at `eps = 0` replacing the general expressions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BaseSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<ExprMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub m: usize,
    pub r: usize,
    /// `coefficients[i]` multiplies `y^{(i)}`; zero when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<ExprMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Vec<String>>,
    pub boundary: BoundarySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<BaseSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EpsilonSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl EpsilonSpec {
    pub fn schedule(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        let start = self.start.unwrap_or(0.1);
        let ratio = self.ratio.unwrap_or(0.5);
        (0..=self.steps.unwrap_or(10)).map(|k| start * ratio.powi(k as i32)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Final-value threshold of the trend tests.
    #[serde(default = "default_trend")]
    pub trend: f64,
    /// Relative singular-value threshold of Condition (0).
    #[serde(default = "default_singular")]
    pub singular: f64,
    /// Bound on residuals of a solve.
    #[serde(default = "default_solve")]
    pub solve: f64,
    #[serde(default = "default_min_samples")]
    pub min_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_cut: Option<f64>,
}

fn default_trend() -> f64 {
    1e-2
}

fn default_singular() -> f64 {
    1e-8
}

fn default_solve() -> f64 {
    1e-6
}

fn default_min_samples() -> usize {
    4
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            trend: default_trend(),
            singular: default_singular(),
            solve: default_solve(),
            min_samples: default_min_samples(),
            eps_cut: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Optional; the command line names the command and must agree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub grid: GridSpec,
    #[serde(default)]
    pub space: SpaceSpec,
    pub problem: ProblemSpec,
    /// Parameter value for `solve` and `condition0`.
    #[serde(default)]
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<EpsilonSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

/// All problems found in a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl std::fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const TOP_KEYS: &[&str] = &["command", "grid", "space", "problem", "eps", "epsilon", "tolerances", "output"];
const GRID_KEYS: &[&str] = &["a", "b", "n"];
const SPACE_KEYS: &[&str] = &["n", "p"];
const PROBLEM_KEYS: &[&str] = &["m", "r", "coefficients", "rhs", "boundary", "c", "base"];
const BASE_KEYS: &[&str] = &["coefficients", "rhs", "boundary", "c"];
const EPS_KEYS: &[&str] = &["start", "ratio", "steps", "values"];
const TOL_KEYS: &[&str] = &["trend", "singular", "solve", "min_samples", "eps_cut"];
const TERM_KEYS: &[&str] = &["group", "point", "order", "coeff"];
const LIMIT_KEYS: &[&str] = &["group", "order", "coeff"];

fn unknown_keys(v: &Value, path: &str, allowed: &[&str], errors: &mut Vec<String>) {
    if let Value::Object(map) = v {
        for k in map.keys() {
            if !allowed.contains(&k.as_str()) {
                errors.push(format!("unknown key '{k}' in {path}"));
            }
        }
    }
}

fn boundary_keys(v: &Value, path: &str, errors: &mut Vec<String>) {
    let Value::Object(map) = v else { return };
    let allowed: &[&str] = match map.get("type").and_then(Value::as_str) {
        Some("rows") => &["type", "rows"],
        Some("canonical") => &["type", "alpha", "phi"],
        Some("multipoint") => &["type", "limit_points", "terms", "limit"],
        _ => return,
    };
    unknown_keys(v, path, allowed, errors);
    if let Some(Value::Array(terms)) = map.get("terms") {
        for (k, t) in terms.iter().enumerate() {
            unknown_keys(t, &format!("{path}.terms[{k}]"), TERM_KEYS, errors);
        }
    }
    if let Some(Value::Array(terms)) = map.get("limit") {
        for (k, t) in terms.iter().enumerate() {
            unknown_keys(t, &format!("{path}.limit[{k}]"), LIMIT_KEYS, errors);
        }
    }
}

fn section<T: serde::de::DeserializeOwned>(root: &Value, key: &str, errors: &mut Vec<String>) -> Option<T> {
    let v = root.get(key)?;
    match serde_json::from_value(v.clone()) {
        Ok(x) => Some(x),
        Err(e) => {
            errors.push(format!("{key}: {e}"));
            None
        }
    }
}

/// Parse and validate a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        ConfigErrors(vec![format!("syntax error at line {}, column {}: {e}", e.line(), e.column())])
    })?;
    let mut errors = Vec::new();
    if !root.is_object() {
        return Err(ConfigErrors(vec!["configuration must be a JSON object".into()]));
    }
    unknown_keys(&root, "configuration", TOP_KEYS, &mut errors);
    if let Some(v) = root.get("grid") {
        unknown_keys(v, "grid", GRID_KEYS, &mut errors);
    }
    if let Some(v) = root.get("space") {
        unknown_keys(v, "space", SPACE_KEYS, &mut errors);
    }
    if let Some(v) = root.get("epsilon") {
        unknown_keys(v, "epsilon", EPS_KEYS, &mut errors);
    }
    if let Some(v) = root.get("tolerances") {
        unknown_keys(v, "tolerances", TOL_KEYS, &mut errors);
    }
    if let Some(p) = root.get("problem") {
        unknown_keys(p, "problem", PROBLEM_KEYS, &mut errors);
        if let Some(b) = p.get("boundary") {
            boundary_keys(b, "problem.boundary", &mut errors);
        }
        if let Some(base) = p.get("base") {
            unknown_keys(base, "problem.base", BASE_KEYS, &mut errors);
            if let Some(b) = base.get("boundary") {
                boundary_keys(b, "problem.base.boundary", &mut errors);
            }
        }
    }
    for key in ["grid", "problem"] {
        if root.get(key).is_none() {
            errors.push(format!("missing key '{key}'"));
        }
    }
    let command: Option<Command> = section(&root, "command", &mut errors);
    let grid: Option<GridSpec> = section(&root, "grid", &mut errors);
    let space: Option<SpaceSpec> = section(&root, "space", &mut errors);
    let problem: Option<ProblemSpec> = section(&root, "problem", &mut errors);
    let eps: Option<f64> = section(&root, "eps", &mut errors);
    let epsilon: Option<EpsilonSpec> = section(&root, "epsilon", &mut errors);
    let tolerances: Option<Tolerances> = section(&root, "tolerances", &mut errors);
    let output: Option<String> = section(&root, "output", &mut errors);

    let cfg = match (grid, problem) {
        (Some(grid), Some(problem)) => Some(ExperimentConfig {
            command,
            grid,
            space: space.unwrap_or_default(),
            problem,
            eps: eps.unwrap_or(0.0),
            epsilon,
            tolerances: tolerances.unwrap_or_default(),
            output,
        }),
        _ => None,
    };
    if let Some(cfg) = &cfg {
        errors.extend(validate(cfg));
    }
    match cfg {
        Some(cfg) if errors.is_empty() => Ok(cfg),
        _ => Err(ConfigErrors(errors)),
    }
}

/// Semantic checks on a typed configuration.
pub fn validate(cfg: &ExperimentConfig) -> Vec<String> {
    let mut errors = Vec::new();
    let g = &cfg.grid;
    if g.n % 2 != 0 {
        errors.push(format!("grid size must be even (got {})", g.n));
    }
    if g.n < 2 {
        errors.push("grid size must be at least 2".into());
    }
    if !(g.b > g.a) {
        errors.push(format!("grid needs a < b (got a = {}, b = {})", g.a, g.b));
    }
    if !(cfg.space.p >= 1.0) || !cfg.space.p.is_finite() {
        errors.push(format!("space.p must be finite and >= 1 (got {})", cfg.space.p));
    }
    if let Some(eps) = &cfg.epsilon {
        validate_epsilon(eps, &mut errors);
    }
    let t = &cfg.tolerances;
    for (name, v) in [("trend", t.trend), ("singular", t.singular), ("solve", t.solve)] {
        if !(v > 0.0) || !v.is_finite() {
            errors.push(format!("tolerances.{name} must be positive (got {v})"));
        }
    }
    validate_problem(&cfg.problem, cfg.space.n, cfg.command, &mut errors);
    errors
}

fn validate_epsilon(eps: &EpsilonSpec, errors: &mut Vec<String>) {
    if let Some(values) = &eps.values {
        if eps.start.is_some() || eps.ratio.is_some() || eps.steps.is_some() {
            errors.push("epsilon: give either values or start/ratio/steps".into());
        }
        if values.is_empty() {
            errors.push("epsilon schedule is empty".into());
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            errors.push("epsilon values must be positive".into());
        }
        if values.windows(2).any(|w| !(w[1] < w[0])) {
            errors.push("epsilon schedule must strictly decrease".into());
        }
    } else {
        if let Some(s) = eps.start {
            if !(s > 0.0) || !s.is_finite() {
                errors.push(format!("epsilon.start must be positive (got {s})"));
            }
        }
        if let Some(r) = eps.ratio {
            if !(r > 0.0 && r < 1.0) {
                errors.push("epsilon schedule must strictly decrease (ratio must lie in (0, 1))".into());
            }
        }
    }
}

fn check_expr(src: &str, path: &str, allow_t: bool, errors: &mut Vec<String>) -> Option<Expr> {
    match parse(src, false) {
        Ok(e) => {
            if !allow_t && e.uses(Var::T) {
                errors.push(format!("{path}: '{src}' may not depend on t"));
            }
            Some(e)
        }
        Err(err) => {
            errors.push(format!("{path}: {err} in '{src}'"));
            None
        }
    }
}

fn check_matrix(mat: &ExprMatrix, rows: usize, cols: usize, path: &str, allow_t: bool, errors: &mut Vec<String>) {
    if mat.len() != rows || mat.iter().any(|r| r.len() != cols) {
        errors.push(format!("{path}: expected a {rows}x{cols} matrix"));
        return;
    }
    for (i, row) in mat.iter().enumerate() {
        for (j, src) in row.iter().enumerate() {
            check_expr(src, &format!("{path}[{i}][{j}]"), allow_t, errors);
        }
    }
}

fn check_vector(v: &[String], len: usize, path: &str, allow_t: bool, errors: &mut Vec<String>) {
    if v.len() != len {
        errors.push(format!("{path}: expected {len} entries, got {}", v.len()));
        return;
    }
    for (i, src) in v.iter().enumerate() {
        check_expr(src, &format!("{path}[{i}]"), allow_t, errors);
    }
}

fn validate_problem(p: &ProblemSpec, n: usize, command: Option<Command>, errors: &mut Vec<String>) {
    let (m, r) = (p.m, p.r);
    if m == 0 || r == 0 {
        errors.push("problem.m and problem.r must be positive".into());
        return;
    }
    let rm = r * m;
    let check_coeffs = |c: &Vec<ExprMatrix>, path: &str, errors: &mut Vec<String>| {
        if c.len() != r {
            errors.push(format!("{path}: expected {r} coefficient matrices, got {}", c.len()));
        } else {
            for (i, a) in c.iter().enumerate() {
                check_matrix(a, m, m, &format!("{path}[{i}]"), true, errors);
            }
        }
    };
    if let Some(c) = &p.coefficients {
        check_coeffs(c, "problem.coefficients", errors);
    }
    if let Some(f) = &p.rhs {
        check_vector(f, m, "problem.rhs", true, errors);
    }
    if let Some(c) = &p.c {
        check_vector(c, rm, "problem.c", false, errors);
    }
    validate_boundary(&p.boundary, m, r, n, "problem.boundary", errors);
    if let Some(base) = &p.base {
        if let Some(c) = &base.coefficients {
            check_coeffs(c, "problem.base.coefficients", errors);
        }
        if let Some(f) = &base.rhs {
            check_vector(f, m, "problem.base.rhs", true, errors);
        }
        if let Some(c) = &base.c {
            check_vector(c, rm, "problem.base.c", false, errors);
        }
        if let Some(b) = &base.boundary {
            validate_boundary(b, m, r, n, "problem.base.boundary", errors);
        }
    }
    if command == Some(Command::MultipointCheck) && !matches!(p.boundary, BoundarySpec::Multipoint { .. }) {
        errors.push("multipoint-check needs a boundary of type 'multipoint'".into());
    }
}

fn validate_boundary(b: &BoundarySpec, m: usize, r: usize, n: usize, path: &str, errors: &mut Vec<String>) {
    let rm = r * m;
    let top = n + r;
    match b {
        BoundarySpec::Rows { rows } => {
            if rows.len() != rm {
                errors.push(format!("{path}.rows: expected {rm} rows, got {}", rows.len()));
            }
            for (k, src) in rows.iter().enumerate() {
                match parse(src, true) {
                    Ok(e) => {
                        if e.uses(Var::T) {
                            errors.push(format!("{path}.rows[{k}]: '{src}' may not depend on t"));
                        }
                        for y in e.y_refs() {
                            if y.comp >= m {
                                errors.push(format!("{path}.rows[{k}]: component {} exceeds m = {m}", y.comp + 1));
                            }
                            if y.order >= top {
                                errors.push(format!(
                                    "{path}.rows[{k}]: derivative order {} exceeds n + r - 1 = {}",
                                    y.order,
                                    top - 1
                                ));
                            }
                        }
                    }
                    Err(err) => errors.push(format!("{path}.rows[{k}]: {err} in '{src}'")),
                }
            }
        }
        BoundarySpec::Canonical { alpha, phi } => {
            if alpha.len() != top {
                errors.push(format!("{path}.alpha: expected n + r = {top} matrices, got {}", alpha.len()));
            }
            for (k, a) in alpha.iter().enumerate() {
                check_matrix(a, rm, m, &format!("{path}.alpha[{k}]"), false, errors);
            }
            if let Some(phi) = phi {
                check_matrix(phi, rm, m, &format!("{path}.phi"), true, errors);
            }
        }
        BoundarySpec::Multipoint { limit_points, terms, limit } => {
            if limit_points.is_empty() {
                errors.push(format!("{path}.limit_points: at least one limit point is required"));
            }
            for (k, src) in limit_points.iter().enumerate() {
                let lp = format!("{path}.limit_points[{k}]");
                if let Some(e) = check_expr(src, &lp, false, errors) {
                    if e.uses(Var::Eps) {
                        errors.push(format!("{lp}: limit points may not depend on eps"));
                    }
                }
            }
            for (k, term) in terms.iter().enumerate() {
                let tp = format!("{path}.terms[{k}]");
                if term.group > limit_points.len() {
                    errors.push(format!("{tp}: group {} exceeds the number of limit points", term.group));
                }
                if term.order >= top {
                    errors.push(format!("{tp}: derivative order {} exceeds n + r - 1 = {}", term.order, top - 1));
                }
                check_expr(&term.point, &format!("{tp}.point"), false, errors);
                check_matrix(&term.coeff, rm, m, &format!("{tp}.coeff"), false, errors);
            }
            for (k, term) in limit.iter().flatten().enumerate() {
                let tp = format!("{path}.limit[{k}]");
                if term.group == 0 || term.group > limit_points.len() {
                    errors.push(format!("{tp}: group must be between 1 and {}", limit_points.len()));
                }
                if term.order >= top {
                    errors.push(format!("{tp}: derivative order {} exceeds n + r - 1 = {}", term.order, top - 1));
                }
                check_matrix(&term.coeff, rm, m, &format!("{tp}.coeff"), false, errors);
            }
        }
    }
}

/// Canonical JSON text of a configuration.
pub fn serialize(cfg: &ExperimentConfig) -> String {
    let mut s = serde_json::to_string_pretty(cfg).expect("configuration serializes");
    s.push('\n');
    s
}
