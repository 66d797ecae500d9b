//! Parameter families `eps -> (L(eps), B(eps))` and the continuity
//! criterion at `eps = 0`: Condition (0), Limit Conditions (I) and (II),
//! and the two-sided estimate of error by discrepancy.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::funcspace::{cumulative_integral, real, Conjugate, Grid, GridFunction, Shape, SobolevParams};
use crate::linalg::CMatrix;
use crate::scalar::{euclidean_norm, Real, C};
use crate::solver::{condition0_of, discrepancy, solve_bvp, Condition0, DEFAULT_SINGULAR_TOL};
use crate::system::{BoundaryOperator, CanonicalBoundaryForm, ProblemInstance};
use crate::trend::{loglog_slope, Series, TrendConfig, Verdict};

/// Geometric schedule `eps_k = start * ratio^k`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsSchedule<T> {
    pub start: T,
    pub ratio: T,
    pub steps: usize,
}

impl<T: Real> Default for EpsSchedule<T> {
    fn default() -> Self {
        Self {
            start: T::lit(0.1),
            ratio: T::lit(0.5),
            steps: 10,
        }
    }
}

impl<T: Real> EpsSchedule<T> {
    pub fn new(start: T, ratio: T, steps: usize) -> Result<Self> {
        if !(start > T::zero()) || !(ratio > T::zero() && ratio < T::one()) {
            return Err(Error::InvalidFamily(format!(
                "schedule needs start > 0 and ratio in (0, 1), got {start} and {ratio}"
            )));
        }
        Ok(Self { start, ratio, steps })
    }

    pub fn values(&self) -> Vec<T> {
        (0..=self.steps).map(|k| self.start * self.ratio.powi(k as i32)).collect()
    }
}

/// Base problem at `eps = 0` and instances along a decreasing schedule.
#[derive(Debug, Clone)]
pub struct ParamFamily<T> {
    base: ProblemInstance<T>,
    instances: Vec<(T, ProblemInstance<T>)>,
    pub label: String,
}

impl<T: Real> ParamFamily<T> {
    pub fn new(base: ProblemInstance<T>, instances: Vec<(T, ProblemInstance<T>)>) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::InvalidFamily("family has no instances".into()));
        }
        for (k, (eps, inst)) in instances.iter().enumerate() {
            if !(*eps > T::zero()) {
                return Err(Error::InvalidFamily(format!("eps must be positive, got {eps}")));
            }
            if k > 0 && !(*eps < instances[k - 1].0) {
                return Err(Error::InvalidFamily("epsilon schedule must strictly decrease".into()));
            }
            if inst.params() != base.params() {
                return Err(Error::InvalidFamily(format!("parameters differ at eps = {eps}")));
            }
            if inst.grid() != base.grid() {
                return Err(Error::GridMismatch);
            }
        }
        Ok(Self {
            base,
            instances,
            label: String::new(),
        })
    }

    /// Sample `make(eps)` at `0` and along the schedule.
    pub fn from_fn(schedule: &EpsSchedule<T>, make: impl Fn(T) -> Result<ProblemInstance<T>>) -> Result<Self> {
        let base = make(T::zero())?;
        let instances = schedule
            .values()
            .into_iter()
            .map(|e| make(e).map(|p| (e, p)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, instances)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn base(&self) -> &ProblemInstance<T> {
        &self.base
    }

    pub fn instances(&self) -> &[(T, ProblemInstance<T>)] {
        &self.instances
    }

    pub fn eps(&self) -> Vec<T> {
        self.instances.iter().map(|(e, _)| *e).collect()
    }

    pub fn params(&self) -> &SobolevParams<T> {
        self.base.params()
    }

    pub fn grid(&self) -> &Grid<T> {
        self.base.grid()
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Named probe function for Limit Condition (II).
#[derive(Debug, Clone)]
pub struct Probe<T> {
    pub label: String,
    pub y: GridFunction<T>,
}

/// Monomials `t^d`, `d = 0..=n+r+2`, and `sin t`, `cos t`, placed in each
/// component in turn; stack order `n + r`.
pub fn default_probes<T: Real>(params: &SobolevParams<T>, grid: &Grid<T>) -> Result<Vec<Probe<T>>> {
    let order = params.top_order();
    let m = params.m;
    let mut scalars: Vec<(String, Box<dyn Fn(usize, T) -> T>)> = Vec::new();
    for d in 0..=order + 2 {
        scalars.push((
            format!("t^{d}"),
            Box::new(move |j: usize, t: T| {
                if j > d {
                    T::zero()
                } else {
                    let falling = (d - j + 1..=d).fold(T::one(), |acc, v| acc * T::from_count(v));
                    falling * t.powi((d - j) as i32)
                }
            }),
        ));
    }
    scalars.push((
        "sin t".into(),
        Box::new(|j: usize, t: T| match j % 4 {
            0 => t.sin(),
            1 => t.cos(),
            2 => -t.sin(),
            _ => -t.cos(),
        }),
    ));
    scalars.push((
        "cos t".into(),
        Box::new(|j: usize, t: T| match j % 4 {
            0 => t.cos(),
            1 => -t.sin(),
            2 => -t.cos(),
            _ => t.sin(),
        }),
    ));
    let mut out = Vec::with_capacity(scalars.len() * m);
    for comp in 0..m {
        for (name, f) in &scalars {
            let y = GridFunction::sample_unchecked(*grid, Shape::Vector(m), order, |j, t| {
                let mut v = vec![C::new(T::zero(), T::zero()); m];
                v[comp] = real(f(j, t));
                v
            })?;
            let label = if m == 1 { name.clone() } else { format!("{name} e{}", comp + 1) };
            out.push(Probe { label, y });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitIReport<T> {
    /// `||A_i(eps_k) - A_i(0)||_{n,p}` for `i = 0..r`.
    pub coefficients: Vec<Series<T>>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitIIReport<T> {
    /// `||B(eps_k) y - B(0) y||` per probe.
    pub probes: Vec<Series<T>>,
    pub verdict: Verdict,
    pub note: &'static str,
}

pub const PROBE_NOTE: &str = "finitely many probes witness strong convergence, they do not prove it";

#[derive(Debug, Clone, PartialEq)]
pub struct Remark24Report<T> {
    /// `(2a)`: `|alpha_k(eps) - alpha_k(0)|` per `k`.
    pub alphas: Vec<Series<T>>,
    pub alpha_verdict: Verdict,
    /// `(2b)`: `||Phi(eps)||_{L_q}`, judged by the boundedness heuristic.
    pub phi_norms: Series<T>,
    /// `(2c)`: deviations of `int_a^t Phi` at interior checkpoints.
    pub primitives: Vec<Series<T>>,
    pub primitive_verdict: Verdict,
    pub verdict: Verdict,
}

/// Condition (0) of the base problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition0Report<T> {
    pub condition: Condition0<T>,
    pub sigma_min: T,
    pub sigma_max: T,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedRow<T> {
    pub eps: T,
    /// `||y(., 0) - y(., eps)||_{n+r,p}`; `None` when the instance failed.
    pub error: Option<T>,
    pub discrepancy: T,
    /// `error / discrepancy`; `None` when the discrepancy is at roundoff
    /// level or the solve failed.
    pub ratio: Option<T>,
    /// Solver error for this instance, if any.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedReport<T> {
    pub rows: Vec<TwoSidedRow<T>>,
    /// Rows with `eps <= eps_cut` enter the ratio band.
    pub eps_cut: T,
    pub gamma_lo: Option<T>,
    pub gamma_hi: Option<T>,
    /// Log-log slope of the error against `eps`.
    pub fitted_rate: Option<T>,
    /// Log-log slope of the discrepancy against `eps`.
    pub discrepancy_rate: Option<T>,
    /// Number of rows whose ratio is undefined.
    pub undefined_ratios: usize,
}

impl<T: Real> TwoSidedReport<T> {
    pub fn band_width(&self) -> Option<T> {
        match (self.gamma_lo, self.gamma_hi) {
            (Some(lo), Some(hi)) if lo > T::zero() => Some(hi / lo),
            _ => None,
        }
    }

    pub fn errors(&self) -> Vec<Option<T>> {
        self.rows.iter().map(|r| r.error).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport<T> {
    pub eps: Vec<T>,
    pub cond0: Condition0Report<T>,
    pub limit_i: LimitIReport<T>,
    pub limit_ii: LimitIIReport<T>,
    pub remark24: Option<Remark24Report<T>>,
    pub overall: Verdict,
    /// Convergence experiment, attached when the overall verdict passes.
    pub experiment: Option<TwoSidedReport<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityConfig<T> {
    pub trend: TrendConfig<T>,
    /// Minimum number of schedule samples.
    pub min_samples: usize,
    pub tol_sing: T,
    /// Upper `eps` for the ratio band; `None` uses every row.
    pub eps_cut: Option<T>,
}

impl<T: Real> Default for ContinuityConfig<T> {
    fn default() -> Self {
        Self {
            trend: TrendConfig::default(),
            min_samples: 4,
            tol_sing: T::lit(DEFAULT_SINGULAR_TOL),
            eps_cut: None,
        }
    }
}

fn check_samples<T: Real>(fam: &ParamFamily<T>, min_samples: usize) -> Result<()> {
    if fam.len() < min_samples {
        return Err(Error::InvalidFamily(format!(
            "{} schedule samples, at least {min_samples} required",
            fam.len()
        )));
    }
    Ok(())
}

/// Limit Condition (I): `A_i(eps) -> A_i(0)` in `W^n_p`, judged by the
/// trend test on `||A_i(eps_k) - A_i(0)||_{n,p}`.
pub fn check_limit_i<T: Real>(fam: &ParamFamily<T>, cfg: &TrendConfig<T>, min_samples: usize) -> Result<LimitIReport<T>> {
    check_samples(fam, min_samples)?;
    let SobolevParams { n, p, r, .. } = *fam.params();
    let mut coefficients = Vec::with_capacity(r);
    for i in 0..r {
        let a0 = fam.base.system().coeff(i).truncate(n)?;
        let values = fam
            .instances
            .iter()
            .map(|(_, inst)| inst.system().coeff(i).truncate(n)?.sub(&a0)?.sobolev_norm(n, p))
            .collect::<Result<Vec<T>>>()?;
        coefficients.push(Series {
            label: format!("A_{i}"),
            verdict: cfg.converges_to_zero(&values),
            values,
        });
    }
    Ok(LimitIReport {
        verdict: Verdict::all(coefficients.iter().map(|s| s.verdict)),
        coefficients,
    })
}

/// Limit Condition (II) witnessed on probes: `B(eps_k) y -> B(0) y`.
pub fn check_limit_ii_probes<T: Real>(fam: &ParamFamily<T>, probes: &[Probe<T>], cfg: &TrendConfig<T>) -> Result<LimitIIReport<T>> {
    let members: Vec<(T, BoundaryOperator<T>)> = fam
        .instances
        .iter()
        .map(|(e, inst)| (*e, inst.boundary().clone()))
        .collect();
    check_limit_ii_operators(fam.base.boundary(), &members, probes, cfg)
}

/// Probe check for an explicit operator family.
pub fn check_limit_ii_operators<T: Real>(
    base: &BoundaryOperator<T>,
    members: &[(T, BoundaryOperator<T>)],
    probes: &[Probe<T>],
    cfg: &TrendConfig<T>,
) -> Result<LimitIIReport<T>> {
    let need = base.required_order();
    let mut series = Vec::with_capacity(probes.len());
    for probe in probes {
        if probe.y.order() < need {
            return Err(Error::InsufficientSmoothness {
                needed: need,
                available: probe.y.order(),
            });
        }
        let b0 = base.apply(&probe.y)?;
        let values = members
            .iter()
            .map(|(_, op)| {
                let be = op.apply(&probe.y)?;
                let diff: Vec<C<T>> = be.iter().zip(&b0).map(|(a, b)| *a - *b).collect();
                Ok(euclidean_norm(&diff))
            })
            .collect::<Result<Vec<T>>>()?;
        series.push(Series {
            label: probe.label.clone(),
            verdict: cfg.converges_to_zero(&values),
            values,
        });
    }
    Ok(LimitIIReport {
        verdict: Verdict::all(series.iter().map(|s| s.verdict)),
        probes: series,
        note: PROBE_NOTE,
    })
}

fn canonical<T>(op: &BoundaryOperator<T>) -> Result<&CanonicalBoundaryForm<T>> {
    match op {
        BoundaryOperator::Canonical(c) => Ok(c),
        BoundaryOperator::Multipoint(_) => Err(Error::UnsupportedForm(
            "conditions (2a)-(2c) need canonical boundary forms".into(),
        )),
    }
}

/// Number of interior checkpoints for `(2c)`.
pub const PRIMITIVE_CHECKPOINTS: usize = 9;

fn primitive_at_checkpoints<T: Real>(phi: &GridFunction<T>) -> Result<Vec<CMatrix<T>>> {
    let grid = *phi.grid();
    let (rows, cols) = match phi.shape() {
        Shape::Matrix(r, c) => (r, c),
        s => return Err(Error::Dimension(format!("Phi must be a matrix function, got {s:?}"))),
    };
    let nodes = grid.num_nodes();
    let prims: Vec<Vec<C<T>>> = (0..rows * cols)
        .map(|comp| {
            let series: Vec<C<T>> = (0..nodes).map(|i| phi.at_node(0, i)[comp]).collect();
            cumulative_integral(&series, grid.h())
        })
        .collect();
    let prim_layer: Vec<C<T>> = (0..nodes).flat_map(|i| prims.iter().map(move |p| p[i])).collect();
    let prim = GridFunction::from_layers_unchecked(grid, phi.shape(), vec![prim_layer])?;
    let width = grid.b() - grid.a();
    (1..=PRIMITIVE_CHECKPOINTS)
        .map(|k| {
            let t = grid.a() + width * T::from_count(k) / T::from_count(PRIMITIVE_CHECKPOINTS + 1);
            Ok(CMatrix::from_row_slice(rows, cols, &prim.eval_at(0, t)?))
        })
        .collect()
}

/// Conditions (2a)-(2c) for canonical forms `(alpha(eps), Phi(eps))`.
pub fn check_remark24<T: Real>(fam: &ParamFamily<T>, cfg: &TrendConfig<T>) -> Result<Remark24Report<T>> {
    let base = canonical(fam.base.boundary())?;
    let forms = fam
        .instances
        .iter()
        .map(|(_, inst)| canonical(inst.boundary()))
        .collect::<Result<Vec<_>>>()?;

    let alphas: Vec<Series<T>> = (0..base.alphas().len())
        .map(|k| {
            let values: Vec<T> = forms.iter().map(|f| (&f.alphas()[k] - &base.alphas()[k]).entry_norm()).collect();
            Series {
                label: format!("alpha_{}", k + 1),
                verdict: cfg.converges_to_zero(&values),
                values,
            }
        })
        .collect();
    let alpha_verdict = Verdict::all(alphas.iter().map(|s| s.verdict));

    let q = fam.params().q();
    let norms = forms
        .iter()
        .map(|f| match q {
            Conjugate::Finite(q) => f.phi().lp_norm(0, q),
            Conjugate::Infinity => f.phi().sup_norm(0),
        })
        .collect::<Result<Vec<T>>>()?;
    let phi_norms = Series {
        label: match q {
            Conjugate::Finite(q) => format!("||Phi||_L{q}"),
            Conjugate::Infinity => "||Phi||_Linf".into(),
        },
        verdict: cfg.bounded(&norms),
        values: norms,
    };

    let base_prims = primitive_at_checkpoints(base.phi())?;
    let member_prims = forms
        .iter()
        .map(|f| primitive_at_checkpoints(f.phi()))
        .collect::<Result<Vec<_>>>()?;
    let primitives: Vec<Series<T>> = (0..PRIMITIVE_CHECKPOINTS)
        .map(|c| {
            let values: Vec<T> = member_prims.iter().map(|p| (&p[c] - &base_prims[c]).entry_norm()).collect();
            Series {
                label: format!("checkpoint {}/{}", c + 1, PRIMITIVE_CHECKPOINTS + 1),
                verdict: cfg.converges_to_zero(&values),
                values,
            }
        })
        .collect();
    let primitive_verdict = Verdict::all(primitives.iter().map(|s| s.verdict));
    Ok(Remark24Report {
        verdict: Verdict::all([alpha_verdict, phi_norms.verdict, primitive_verdict]),
        alphas,
        alpha_verdict,
        phi_norms,
        primitives,
        primitive_verdict,
    })
}

/// Solve the base problem and every instance, and compare the error
/// `||y(., 0) - y(., eps)||_{n+r,p}` with the discrepancy of `y(., 0)`.
///
/// Instances are solved in parallel. A failing instance yields a row with
/// `error = None` and the failure message; a singular base problem is an
/// error.
pub fn convergence_experiment<T: Real>(fam: &ParamFamily<T>, eps_cut: Option<T>) -> Result<TwoSidedReport<T>> {
    let SobolevParams { n, p, r, .. } = *fam.params();
    let top = n + r;
    let y0 = solve_bvp(&fam.base)?.y;
    let scale = y0.sobolev_norm(top, p)?.max(T::one());
    let floor = T::lit(100.0) * T::epsilon() * scale;

    let rows = fam
        .instances
        .par_iter()
        .map(|(eps, inst)| -> Result<TwoSidedRow<T>> {
            let d = discrepancy(inst, &y0)?;
            let ratio_of = |e: T| if d > floor { Some(e / d) } else { None };
            Ok(match solve_bvp(inst) {
                Ok(rep) => {
                    let e = y0.sub(&rep.y)?.sobolev_norm(top, p)?;
                    TwoSidedRow {
                        eps: *eps,
                        error: Some(e),
                        discrepancy: d,
                        ratio: ratio_of(e),
                        failure: None,
                    }
                }
                Err(err) => TwoSidedRow {
                    eps: *eps,
                    error: None,
                    discrepancy: d,
                    ratio: None,
                    failure: Some(err.to_string()),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let eps_cut = eps_cut.unwrap_or_else(T::infinity);
    let band: Vec<T> = rows.iter().filter(|r| r.eps <= eps_cut).filter_map(|r| r.ratio).collect();
    let gamma_lo = band.iter().copied().reduce(T::min);
    let gamma_hi = band.iter().copied().reduce(T::max);

    let fit = |values: Vec<(T, T)>| -> Option<T> {
        let (x, y): (Vec<T>, Vec<T>) = values.into_iter().filter(|(_, v)| *v > floor).unzip();
        if x.len() < 4 {
            return None;
        }
        loglog_slope(&x, &y)
    };
    let fitted_rate = fit(rows.iter().filter_map(|r| r.error.map(|e| (r.eps, e))).collect());
    let discrepancy_rate = fit(rows.iter().map(|r| (r.eps, r.discrepancy)).collect());
    Ok(TwoSidedReport {
        undefined_ratios: rows.iter().filter(|r| r.ratio.is_none()).count(),
        rows,
        eps_cut,
        gamma_lo,
        gamma_hi,
        fitted_rate,
        discrepancy_rate,
    })
}

/// Condition (0), (I), (II) and, for canonical forms, (2a)-(2c).
///
/// The overall verdict is the conjunction. On a pass the convergence
/// experiment is attached as corroboration.
pub fn full_criterion<T: Real>(fam: &ParamFamily<T>, probes: Option<&[Probe<T>]>, cfg: &ContinuityConfig<T>) -> Result<ContinuityReport<T>> {
    check_samples(fam, cfg.min_samples)?;
    let (m, condition) = condition0_of(&fam.base, cfg.tol_sing)?;
    let cond0 = Condition0Report {
        condition,
        sigma_min: m.sigma_min,
        sigma_max: m.sigma_max,
        verdict: if condition.is_nonsingular() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    };
    let limit_i = check_limit_i(fam, &cfg.trend, cfg.min_samples)?;
    let owned;
    let probes = match probes {
        Some(p) => p,
        None => {
            owned = default_probes(fam.params(), fam.grid())?;
            &owned
        }
    };
    let limit_ii = check_limit_ii_probes(fam, probes, &cfg.trend)?;
    let all_canonical = std::iter::once(&fam.base)
        .chain(fam.instances.iter().map(|(_, i)| i))
        .all(|i| matches!(i.boundary(), BoundaryOperator::Canonical(_)));
    let remark24 = if all_canonical {
        Some(check_remark24(fam, &cfg.trend)?)
    } else {
        None
    };
    let overall = Verdict::all(
        [cond0.verdict, limit_i.verdict, limit_ii.verdict]
            .into_iter()
            .chain(remark24.as_ref().map(|r| r.verdict)),
    );
    let experiment = if overall.is_pass() {
        Some(convergence_experiment(fam, cfg.eps_cut)?)
    } else {
        None
    };
    Ok(ContinuityReport {
        eps: fam.eps(),
        cond0,
        limit_i,
        limit_ii,
        remark24,
        overall,
        experiment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::DifferentialSystem;

    fn decay_family(steps: usize, coeff: impl Fn(f64) -> f64, n: usize) -> ParamFamily<f64> {
        let g = Grid::new(0.0, 1.0, 2000).unwrap();
        let params = SobolevParams::new(n, 2.0, 1, 1).unwrap();
        let sched = EpsSchedule::new(0.1, 0.5, steps).unwrap();
        ParamFamily::from_fn(&sched, |eps| {
            let a = GridFunction::constant(g, Shape::Matrix(1, 1), n, &[real(coeff(eps))])?;
            let f = GridFunction::zeros(g, Shape::Vector(1), n);
            let sys = DifferentialSystem::new(params, vec![a], f)?;
            let mut alphas = vec![CMatrix::identity(1)];
            alphas.resize(n + 1, CMatrix::zeros(1, 1));
            let b = CanonicalBoundaryForm::without_kernel(&params, g, alphas)?;
            ProblemInstance::new(sys, BoundaryOperator::Canonical(b), vec![real(1.0)])
        })
        .unwrap()
    }

    #[test]
    fn schedule_values() {
        let v = EpsSchedule::<f64>::default().values();
        assert_eq!(v.len(), 11);
        assert_eq!(v[0], 0.1);
        assert!((v[10] - 0.1 / 1024.0).abs() < 1e-18);
    }

    #[test]
    fn rejects_increasing_schedule() {
        let fam = decay_family(2, |e| 1.0 + e, 0);
        let insts = vec![(0.1, fam.base().clone()), (0.2, fam.base().clone())];
        let err = ParamFamily::new(fam.base().clone(), insts).unwrap_err();
        assert!(err.to_string().contains("epsilon schedule must strictly decrease"));
    }

    #[test]
    fn constant_family_passes_with_zero_deviations() {
        let fam = decay_family(6, |_| 1.0, 0);
        let cfg = TrendConfig::default();
        let li = check_limit_i(&fam, &cfg, 4).unwrap();
        assert_eq!(li.verdict, Verdict::Pass);
        assert!(li.coefficients[0].values.iter().all(|v| *v == 0.0));
        let probes = default_probes(fam.params(), fam.grid()).unwrap();
        assert_eq!(probes.len(), 6);
        let lii = check_limit_ii_probes(&fam, &probes, &cfg).unwrap();
        assert_eq!(lii.verdict, Verdict::Pass);
        let exp = convergence_experiment(&fam, None).unwrap();
        assert!(exp.rows.iter().all(|r| r.error == Some(0.0) && r.ratio.is_none()));
        assert_eq!(exp.undefined_ratios, exp.rows.len());
    }

    #[test]
    fn linear_perturbation_deviation_matches_closed_form() {
        let fam = decay_family(6, |e| 1.0 + e, 0);
        let li = check_limit_i(&fam, &TrendConfig::default(), 4).unwrap();
        for (v, e) in li.coefficients[0].values.iter().zip(fam.eps()) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_samples() {
        let fam = decay_family(1, |e| 1.0 + e, 0);
        assert!(matches!(check_limit_i(&fam, &TrendConfig::default(), 4), Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn remark24_static_passes() {
        let fam = decay_family(6, |e| 1.0 + e, 0);
        let rep = check_remark24(&fam, &TrendConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
    }
}
