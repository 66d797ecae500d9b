//! Construction of problem instances and families from a configuration.

use std::cell::RefCell;
use std::collections::HashMap;

use num_complex::Complex64;
use sobolev_bvp::{
    BoundaryOperator, CMatrix, CanonicalBoundaryForm, DifferentialSystem, Grid, GridFunction, MultipointBoundaryForm,
    MultipointFamily, MultipointNode, ParamFamily, ProblemInstance, Shape, SobolevParams,
};

use crate::config::{BoundarySpec, EpsilonSpec, ExperimentConfig, ExprMatrix, ProblemSpec};
use crate::expr::{parse, Env, Expr, YRef};

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    /// The data cannot be turned into a problem (bad values, nonlinear rows).
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] sobolev_bvp::Error),
}

type Result<T> = std::result::Result<T, BuildError>;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(BuildError::Invalid(msg.into()))
}

/// Problem geometry shared by every instance of a configuration.
#[derive(Debug, Clone, Copy)]
pub struct Setup {
    pub grid: Grid<f64>,
    pub params: SobolevParams<f64>,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let grid = Grid::new(cfg.grid.a, cfg.grid.b, cfg.grid.n)?;
        let params = SobolevParams::new(cfg.space.n, cfg.space.p, cfg.problem.m, cfg.problem.r)?;
        Ok(Self { grid, params })
    }

    fn env(&self, t: f64, eps: f64) -> Env {
        Env {
            t,
            eps,
            a: self.grid.a(),
            b: self.grid.b(),
        }
    }
}

fn parsed(src: &str) -> Result<Expr> {
    parse(src, false).map_err(|e| BuildError::Invalid(format!("{e} in '{src}'")))
}

fn finite(z: Complex64, what: &str, eps: f64) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        invalid(format!("{what} is not finite at eps = {eps}"))
    }
}

fn scalar(s: &Setup, src: &str, eps: f64, what: &str) -> Result<Complex64> {
    let z = parsed(src)?
        .eval(&s.env(s.grid.a(), eps))
        .map_err(|e| BuildError::Invalid(format!("{what}: {e}")))?;
    finite(z, what, eps)
}

fn constant_matrix(s: &Setup, mat: &ExprMatrix, eps: f64, what: &str) -> Result<CMatrix<f64>> {
    let rows = mat.len();
    let cols = mat.first().map_or(0, Vec::len);
    let mut data = Vec::with_capacity(rows * cols);
    for (i, row) in mat.iter().enumerate() {
        for (j, src) in row.iter().enumerate() {
            data.push(scalar(s, src, eps, &format!("{what}[{i}][{j}]"))?);
        }
    }
    Ok(CMatrix::from_row_slice(rows, cols, &data))
}

/// Sample expressions (row-major) with their symbolic derivatives.
fn sampled(s: &Setup, entries: &[&String], shape: Shape, order: usize, eps: f64, what: &str) -> Result<GridFunction<f64>> {
    let stacks: Vec<Vec<Expr>> = entries
        .iter()
        .map(|src| Ok(parsed(src)?.derivatives(order)))
        .collect::<Result<_>>()?;
    let bad: RefCell<Option<String>> = RefCell::new(None);
    let f = GridFunction::sample_unchecked(s.grid, shape, order, |j, t| {
        let env = s.env(t, eps);
        stacks
            .iter()
            .enumerate()
            .map(|(k, st)| {
                let z = st[j].eval(&env).unwrap_or(Complex64::new(f64::NAN, 0.0));
                if !(z.re.is_finite() && z.im.is_finite()) && bad.borrow().is_none() {
                    *bad.borrow_mut() = Some(format!("{what} entry {k}, derivative {j}, is not finite at t = {t}, eps = {eps}"));
                }
                z
            })
            .collect()
    });
    // the sampler cannot return early, so collect the first bad value instead
    let f = f?;
    if let Some(msg) = bad.into_inner() {
        return invalid(msg);
    }
    Ok(f)
}

fn matrix_function(s: &Setup, mat: &ExprMatrix, order: usize, eps: f64, what: &str) -> Result<GridFunction<f64>> {
    let rows = mat.len();
    let cols = mat.first().map_or(0, Vec::len);
    let entries: Vec<&String> = mat.iter().flatten().collect();
    sampled(s, &entries, Shape::Matrix(rows, cols), order, eps, what)
}

/// Which problem data to use: the general expressions or the `eps = 0`
/// overrides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Member,
    Base,
}

fn pick<'a, X>(general: &'a Option<X>, base: Option<&'a Option<X>>, role: Role) -> Option<&'a X> {
    match (role, base) {
        (Role::Base, Some(Some(x))) => Some(x),
        _ => general.as_ref(),
    }
}

fn system(s: &Setup, p: &ProblemSpec, eps: f64, role: Role) -> Result<DifferentialSystem<f64>> {
    let (m, r, n) = (p.m, p.r, s.params.n);
    let base = p.base.as_ref();
    let coeffs = match pick(&p.coefficients, base.map(|b| &b.coefficients), role) {
        Some(c) => c
            .iter()
            .enumerate()
            .map(|(i, a)| matrix_function(s, a, n, eps, &format!("coefficient A{i}")))
            .collect::<Result<Vec<_>>>()?,
        None => (0..r).map(|_| GridFunction::zeros(s.grid, Shape::Matrix(m, m), n)).collect(),
    };
    let rhs = match pick(&p.rhs, base.map(|b| &b.rhs), role) {
        Some(f) => sampled(s, &f.iter().collect::<Vec<_>>(), Shape::Vector(m), n, eps, "rhs")?,
        None => GridFunction::zeros(s.grid, Shape::Vector(m), n),
    };
    Ok(DifferentialSystem::new(s.params, coeffs, rhs)?)
}

fn boundary_data(s: &Setup, p: &ProblemSpec, eps: f64, role: Role) -> Result<Vec<Complex64>> {
    let rm = p.r * p.m;
    match pick(&p.c, p.base.as_ref().map(|b| &b.c), role) {
        Some(c) => c
            .iter()
            .enumerate()
            .map(|(k, src)| scalar(s, src, eps, &format!("c[{k}]")))
            .collect(),
        None => Ok(vec![Complex64::new(0.0, 0.0); rm]),
    }
}

/// Linear functional of one boundary row: `(point, order, component, coefficient)`.
type RowTerms = Vec<(f64, usize, usize, Complex64)>;

/// Coefficients of a boundary row, found by evaluating it on unit values of
/// the solution references. Rows with a constant term or nonlinear
/// dependence are rejected.
pub fn linearize_row(src: &str, env: &Env, top: usize) -> Result<RowTerms> {
    let e = parse(src, true).map_err(|err| BuildError::Invalid(format!("{err} in '{src}'")))?;
    let mut keys: Vec<(u64, usize, usize)> = Vec::new();
    let mut refs: Vec<(f64, usize, usize)> = Vec::new();
    for y in e.y_refs() {
        let t = point_of(&y, env, src)?;
        if y.order >= top {
            return invalid(format!("row '{src}': derivative order {} exceeds {}", y.order, top - 1));
        }
        let key = (t.to_bits(), y.order, y.comp);
        if !keys.contains(&key) {
            keys.push(key);
            refs.push((t, y.order, y.comp));
        }
    }
    let eval = |vals: &dyn Fn(usize) -> Complex64| -> Result<Complex64> {
        let lookup: HashMap<(u64, usize, usize), Complex64> =
            keys.iter().enumerate().map(|(k, key)| (*key, vals(k))).collect();
        let yval = |y: &YRef| {
            let t = y.point.eval(env).ok()?.re;
            lookup.get(&(t.to_bits(), y.order, y.comp)).copied()
        };
        e.eval_with(env, &yval)
            .map_err(|err| BuildError::Invalid(format!("row '{src}': {err}")))
    };
    let zero = Complex64::new(0.0, 0.0);
    let offset = eval(&|_| zero)?;
    if offset.norm() > 0.0 {
        return invalid(format!("row '{src}' has a constant term; move it into c"));
    }
    let mut coeffs = Vec::with_capacity(refs.len());
    for k in 0..refs.len() {
        let v = eval(&|j| if j == k { Complex64::new(1.0, 0.0) } else { zero })?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return invalid(format!("row '{src}' is not finite at eps = {}", env.eps));
        }
        coeffs.push(v);
    }
    // linearity on two generic argument vectors
    let scale: f64 = 1.0 + coeffs.iter().map(|c| c.norm()).sum::<f64>();
    let probes: [fn(usize) -> Complex64; 2] = [
        |_| Complex64::new(1.0, 0.0),
        |k| Complex64::new(0.37 * (k + 1) as f64, -0.21 * k as f64),
    ];
    for probe in probes {
        let got = eval(&|k| probe(k))?;
        let want: Complex64 = coeffs.iter().enumerate().map(|(k, c)| c * probe(k)).sum();
        let scaled = eval(&|k| probe(k) * 2.5)?;
        if (got - want).norm() > 1e-9 * scale || (scaled - want * 2.5).norm() > 1e-9 * scale {
            return invalid(format!("row '{src}' is not linear in the solution"));
        }
    }
    Ok(refs.into_iter().zip(coeffs).map(|((t, l, comp), c)| (t, l, comp, c)).collect())
}

fn point_of(y: &YRef, env: &Env, src: &str) -> Result<f64> {
    let t = y
        .point
        .eval(env)
        .map_err(|e| BuildError::Invalid(format!("row '{src}': {e}")))?;
    if t.im != 0.0 || !t.re.is_finite() {
        return invalid(format!("row '{src}': evaluation point {} is not a real number at eps = {}", y.point, env.eps));
    }
    Ok(t.re)
}

fn rows_form(s: &Setup, rows: &[String], m: usize, eps: f64) -> Result<MultipointBoundaryForm<f64>> {
    let rm = rows.len();
    let top = s.params.top_order();
    let mut terms: Vec<(f64, usize, CMatrix<f64>)> = Vec::new();
    for (k, src) in rows.iter().enumerate() {
        for (t, l, comp, c) in linearize_row(src, &s.env(s.grid.a(), eps), top)? {
            let idx = match terms.iter().position(|(tt, ll, _)| *tt == t && *ll == l) {
                Some(i) => i,
                None => {
                    terms.push((t, l, CMatrix::zeros(rm, m)));
                    terms.len() - 1
                }
            };
            let cell = &mut terms[idx].2[(k, comp)];
            *cell += c;
        }
    }
    Ok(MultipointBoundaryForm::from_point_terms(&s.params, &s.grid, &terms)?)
}

/// Multipoint form of a configuration at `eps`, or its limiting form.
pub fn multipoint_form(s: &Setup, spec: &BoundarySpec, eps: f64, limit: bool) -> Result<MultipointBoundaryForm<f64>> {
    let BoundarySpec::Multipoint {
        limit_points,
        terms,
        limit: limit_terms,
    } = spec
    else {
        return invalid("boundary is not of type 'multipoint'");
    };
    let (rm, m) = (s.params.r * s.params.m, s.params.m);
    let top = s.params.top_order();
    let lp: Vec<f64> = limit_points
        .iter()
        .enumerate()
        .map(|(k, src)| Ok(scalar(s, src, 0.0, &format!("limit point {k}"))?.re))
        .collect::<Result<_>>()?;
    let mut groups: Vec<Vec<MultipointNode<f64>>> = vec![Vec::new(); lp.len() + 1];
    let empty = || vec![CMatrix::zeros(rm, m); top];
    match (limit, limit_terms) {
        (true, Some(lt)) => {
            for (i, &t) in lp.iter().enumerate() {
                groups[i + 1].push(MultipointNode { point: t, coeffs: empty() });
            }
            for (k, term) in lt.iter().enumerate() {
                let a = constant_matrix(s, &term.coeff, 0.0, &format!("limit[{k}].coeff"))?;
                let node = &mut groups[term.group][0];
                accumulate(&mut node.coeffs[term.order], &a);
            }
        }
        _ => {
            let eps = if limit { 0.0 } else { eps };
            // nodes are keyed by their point expression, so distinct
            // wandering points stay distinct even where they coincide
            let mut keys: Vec<Vec<&str>> = vec![Vec::new(); lp.len() + 1];
            for (k, term) in terms.iter().enumerate() {
                let what = format!("terms[{k}]");
                let t = scalar(s, &term.point, eps, &format!("{what}.point"))?;
                if t.im != 0.0 {
                    return invalid(format!("{what}.point is not real"));
                }
                let a = constant_matrix(s, &term.coeff, eps, &format!("{what}.coeff"))?;
                let g = term.group;
                let idx = match keys[g].iter().position(|p| *p == term.point.as_str()) {
                    Some(i) => i,
                    None => {
                        keys[g].push(&term.point);
                        groups[g].push(MultipointNode { point: t.re, coeffs: empty() });
                        groups[g].len() - 1
                    }
                };
                let node = &mut groups[g][idx];
                accumulate(&mut node.coeffs[term.order], &a);
            }
        }
    }
    Ok(MultipointBoundaryForm::new(&s.params, &s.grid, lp, groups)?)
}

fn accumulate(acc: &mut CMatrix<f64>, a: &CMatrix<f64>) {
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            acc[(i, j)] += a[(i, j)];
        }
    }
}

fn boundary(s: &Setup, spec: &BoundarySpec, eps: f64, role: Role) -> Result<BoundaryOperator<f64>> {
    let m = s.params.m;
    Ok(match spec {
        BoundarySpec::Rows { rows } => BoundaryOperator::Multipoint(rows_form(s, rows, m, eps)?),
        BoundarySpec::Canonical { alpha, phi } => {
            let alphas = alpha
                .iter()
                .enumerate()
                .map(|(k, a)| constant_matrix(s, a, eps, &format!("alpha[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            let form = match phi {
                Some(phi) => CanonicalBoundaryForm::new(&s.params, alphas, matrix_function(s, phi, 0, eps, "phi")?)?,
                None => CanonicalBoundaryForm::without_kernel(&s.params, s.grid, alphas)?,
            };
            BoundaryOperator::Canonical(form)
        }
        BoundarySpec::Multipoint { .. } => BoundaryOperator::Multipoint(multipoint_form(s, spec, eps, role == Role::Base)?),
    })
}

fn instance(s: &Setup, p: &ProblemSpec, eps: f64, role: Role) -> Result<ProblemInstance<f64>> {
    let sys = system(s, p, eps, role)?;
    let spec = match (role, p.base.as_ref().and_then(|b| b.boundary.as_ref())) {
        (Role::Base, Some(b)) => b,
        _ => &p.boundary,
    };
    let b = boundary(s, spec, eps, role)?;
    let c = boundary_data(s, p, eps, role)?;
    Ok(ProblemInstance::new(sys, b, c)?)
}

/// Problem at `eps`; `eps = 0` selects the limiting problem with its
/// overrides.
pub fn problem_at(cfg: &ExperimentConfig, eps: f64) -> Result<ProblemInstance<f64>> {
    let s = Setup::new(cfg)?;
    let role = if eps == 0.0 { Role::Base } else { Role::Member };
    instance(&s, &cfg.problem, eps, role)
}

pub fn schedule(cfg: &ExperimentConfig) -> Vec<f64> {
    cfg.epsilon.as_ref().map_or_else(|| EpsilonSpec::default().schedule(), EpsilonSpec::schedule)
}

pub fn family(cfg: &ExperimentConfig) -> Result<ParamFamily<f64>> {
    let s = Setup::new(cfg)?;
    let base = instance(&s, &cfg.problem, 0.0, Role::Base)?;
    let instances = schedule(cfg)
        .into_iter()
        .map(|eps| Ok((eps, instance(&s, &cfg.problem, eps, Role::Member)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ParamFamily::new(base, instances)?)
}

pub fn multipoint_family(cfg: &ExperimentConfig) -> Result<MultipointFamily<f64>> {
    let s = Setup::new(cfg)?;
    let spec = &cfg.problem.boundary;
    let base = match cfg.problem.base.as_ref().and_then(|b| b.boundary.as_ref()) {
        Some(b) => multipoint_form(&s, b, 0.0, true)?,
        None => multipoint_form(&s, spec, 0.0, true)?,
    };
    let members = schedule(cfg)
        .into_iter()
        .map(|eps| Ok((eps, multipoint_form(&s, spec, eps, false)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MultipointFamily {
        params: s.params,
        grid: s.grid,
        base,
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(eps: f64) -> Env {
        Env {
            t: 0.0,
            eps,
            a: 0.0,
            b: 1.0,
        }
    }

    #[test]
    fn linear_rows() {
        let terms = linearize_row("y(a) + eps*y'(0.5) - 2*y2(b)", &env(0.25), 2).unwrap();
        assert_eq!(terms.len(), 3);
        assert_eq!(terms[0], (0.0, 0, 0, Complex64::new(1.0, 0.0)));
        assert_eq!(terms[1], (0.5, 1, 0, Complex64::new(0.25, 0.0)));
        assert_eq!(terms[2], (1.0, 0, 1, Complex64::new(-2.0, 0.0)));
        // repeated references accumulate
        let terms = linearize_row("y(0) + 3*y(0)", &env(0.1), 1).unwrap();
        assert_eq!(terms, vec![(0.0, 0, 0, Complex64::new(4.0, 0.0))]);
    }

    #[test]
    fn rejected_rows() {
        assert!(linearize_row("y(0)^2", &env(0.1), 1).is_err());
        assert!(linearize_row("y(0) + 1", &env(0.1), 1).is_err());
        assert!(linearize_row("y(0)*y(1)", &env(0.1), 1).is_err());
        assert!(linearize_row("y''(0)", &env(0.1), 2).is_err());
        assert!(linearize_row("y(1/eps)", &env(0.0), 1).is_err());
    }
}
