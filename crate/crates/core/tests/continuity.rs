mod common;

use std::time::Instant;

use common::*;
use sobolev_bvp::{
    check_limit_i, check_limit_ii_probes, check_remark24, convergence_experiment, default_probes, full_criterion, real,
    solve_bvp, BoundaryOperator, CMatrix, CanonicalBoundaryForm, ContinuityConfig, DifferentialSystem, EpsSchedule,
    Grid, GridFunction, MultipointBoundaryForm, MultipointNode, ParamFamily, ProblemInstance, Shape, SobolevParams,
    TrendConfig, Verdict,
};

fn unit() -> Grid<f64> {
    Grid::new(0.0, 1.0, 2000).unwrap()
}

/// `y' + a(t, eps) y = f(t, eps)`, `y(0) = 1`.
fn first_order_family(
    steps: usize,
    a: impl Fn(f64, f64) -> f64,
    f: impl Fn(f64, f64) -> f64,
) -> ParamFamily<f64> {
    let g = unit();
    let sched = EpsSchedule::new(0.1, 0.5, steps).unwrap();
    ParamFamily::from_fn(&sched, |eps| {
        let params = SobolevParams::new(0, 2.0, 1, 1)?;
        let coeff = GridFunction::sample_unchecked(g, Shape::Matrix(1, 1), 0, |_, t| vec![real(a(t, eps))])?;
        let rhs = GridFunction::sample_unchecked(g, Shape::Vector(1), 0, |_, t| vec![real(f(t, eps))])?;
        let sys = DifferentialSystem::new(params, vec![coeff], rhs)?;
        let b = CanonicalBoundaryForm::without_kernel(&params, g, vec![CMatrix::identity(1)])?;
        ProblemInstance::new(sys, BoundaryOperator::Canonical(b), vec![real(1.0)])
    })
    .unwrap()
}

fn decay_family(steps: usize) -> ParamFamily<f64> {
    first_order_family(steps, |_, e| 1.0 + e, |_, _| 0.0)
}

#[test]
fn two_sided_band_for_decay_family() {
    let start = Instant::now();
    let rep = convergence_experiment(&decay_family(10), None).unwrap();
    assert!(start.elapsed().as_secs_f64() < 30.0);
    assert!(rep.rows.iter().all(|r| r.ratio.is_some_and(|x| x.is_finite() && x > 0.0)));
    assert!(rep.band_width().unwrap() <= 50.0);
    let rate = rep.fitted_rate.unwrap();
    assert!((rate - 1.0).abs() <= 0.1, "{rate}");
    assert!((rate - rep.discrepancy_rate.unwrap()).abs() <= 0.2);
}

#[test]
fn discrepancy_closed_form() {
    // L(eps) y0 - f = eps e^{-t}, so d = eps ||e^{-t}||_2
    let rep = convergence_experiment(&decay_family(4), None).unwrap();
    let norm = ((1.0 - (-2.0f64).exp()) / 2.0).sqrt();
    for row in &rep.rows {
        assert!((row.discrepancy - row.eps * norm).abs() < 1e-8);
    }
}

#[test]
fn quadratic_rhs_perturbation_rate() {
    let fam = first_order_family(10, |_, _| 1.0, |t, e| e * e * t.cos());
    let rep = convergence_experiment(&fam, None).unwrap();
    let rate = rep.fitted_rate.unwrap();
    assert!((rate - 2.0).abs() <= 0.1, "{rate}");
}

#[test]
fn limit_i_examples() {
    let cfg = TrendConfig::default();
    let fam = first_order_family(10, |t, e| 1.0 + e * t.sin(), |_, _| 0.0);
    let li = check_limit_i(&fam, &cfg, 4).unwrap();
    assert_eq!(li.verdict, Verdict::Pass);
    // ||sin||_{L_2(0,1)} = sqrt(1/2 - sin 2 / 4)
    let sin_norm = (0.5 - 2.0f64.sin() / 4.0).sqrt();
    for (v, e) in li.coefficients[0].values.iter().zip(fam.eps()) {
        assert!((v - e * sin_norm).abs() < 1e-8);
    }

    let osc = first_order_family(10, |t, e| if e > 0.0 { 1.0 + (t / e).sin() } else { 1.0 }, |_, _| 0.0);
    let li = check_limit_i(&osc, &cfg, 4).unwrap();
    assert_ne!(li.verdict, Verdict::Pass);
}

#[test]
fn probes_and_wandering_point() {
    let cfg = TrendConfig::default();
    let fam = decay_family(10);
    let probes = default_probes(fam.params(), fam.grid()).unwrap();
    let rep = check_limit_ii_probes(&fam, &probes, &cfg).unwrap();
    assert_eq!(rep.verdict, Verdict::Pass);
    assert!(rep.probes.iter().all(|s| s.values.iter().all(|v| *v == 0.0)));

    // B(eps) y = y(0) + y(t0(eps)) with a wandering t0, B(0) y = y(0)
    let g = unit();
    let params = SobolevParams::new(0, 2.0, 1, 1).unwrap();
    let sys = fam.base().system().clone();
    let form = |eps: f64| {
        let wander = if eps > 0.0 {
            vec![MultipointNode {
                point: 0.5 + 0.25 * (1.0 / eps).sin(),
                coeffs: vec![CMatrix::identity(1)],
            }]
        } else {
            vec![]
        };
        let at0 = MultipointNode {
            point: 0.0,
            coeffs: vec![CMatrix::identity(1)],
        };
        MultipointBoundaryForm::new(&params, &g, vec![0.0], vec![wander, vec![at0]]).unwrap()
    };
    let make = |eps: f64| ProblemInstance::new(sys.clone(), BoundaryOperator::Multipoint(form(eps)), vec![real(1.0)]);
    let wandering = ParamFamily::from_fn(&EpsSchedule::default(), make).unwrap();
    let rep = check_limit_ii_probes(&wandering, &probes, &cfg).unwrap();
    assert_eq!(rep.verdict, Verdict::Fail);
    let t_probe = rep.probes.iter().find(|s| s.label == "t^1").unwrap();
    assert_eq!(t_probe.verdict, Verdict::Fail);
}

fn kernel_family(steps: usize, intervals: usize, phi: impl Fn(f64, f64) -> f64) -> ParamFamily<f64> {
    let g = Grid::new(0.0, 1.0, intervals).unwrap();
    let params = SobolevParams::new(0, 2.0, 1, 1).unwrap();
    let sched = EpsSchedule::new(0.1, 0.5, steps).unwrap();
    ParamFamily::from_fn(&sched, |eps| {
        let a = GridFunction::constant(g, Shape::Matrix(1, 1), 0, &[real(1.0)])?;
        let sys = DifferentialSystem::new(params, vec![a], GridFunction::zeros(g, Shape::Vector(1), 0))?;
        let k = GridFunction::sample_unchecked(g, Shape::Matrix(1, 1), 0, |_, t| vec![real(phi(t, eps))])?;
        let b = CanonicalBoundaryForm::new(&params, vec![CMatrix::identity(1)], k)?;
        ProblemInstance::new(sys, BoundaryOperator::Canonical(b), vec![real(1.0)])
    })
    .unwrap()
}

#[test]
fn remark24_examples() {
    let cfg = TrendConfig::default();
    let same = kernel_family(8, 2000, |t, _| t);
    assert_eq!(check_remark24(&same, &cfg).unwrap().verdict, Verdict::Pass);

    // oscillating kernel: bounded L_2 norm, primitives O(eps)
    let osc = kernel_family(6, 20000, |t, e| if e > 0.0 { (t / e).sin() } else { 0.0 });
    let rep = check_remark24(&osc, &cfg).unwrap();
    assert_eq!(rep.phi_norms.verdict, Verdict::Pass);
    assert_eq!(rep.primitive_verdict, Verdict::Pass);
    assert_eq!(rep.verdict, Verdict::Pass);
    for (s, e) in rep.primitives.iter().flat_map(|s| s.values.iter().zip(osc.eps())) {
        assert!(*s <= 2.0 * e + 1e-6);
    }

    // spike eps^{-1} on [0, eps]: L_2 norm eps^{-1/2} grows
    let spike = kernel_family(6, 20000, |t, e| if e > 0.0 && t <= e { 1.0 / e } else { 0.0 });
    let rep = check_remark24(&spike, &cfg).unwrap();
    assert_eq!(rep.phi_norms.verdict, Verdict::Fail);
    for (v, e) in rep.phi_norms.values.iter().zip(spike.eps()) {
        let want = e.powf(-0.5);
        assert!((v - want).abs() / want < 0.05, "{v} vs {want}");
    }
}

#[test]
fn remark24_rejects_multipoint() {
    let g = unit();
    let base = scalar_problem(g, 0, &[1.0], |_, _| 0.0, &[(0.0, 0, 0)], &[1.0]);
    let fam = ParamFamily::new(base.clone(), vec![(0.1, base.clone()), (0.05, base)]).unwrap();
    assert!(check_remark24(&fam, &TrendConfig::default()).is_err());
}

#[test]
fn full_criterion_examples() {
    let cfg = ContinuityConfig::default();
    let rep = full_criterion(&decay_family(10), None, &cfg).unwrap();
    assert_eq!(rep.overall, Verdict::Pass);
    let exp = rep.experiment.unwrap();
    let errs: Vec<f64> = exp.rows.iter().map(|r| r.error.unwrap()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]));

    let constant = first_order_family(6, |_, _| 1.0, |_, _| 0.0);
    let rep = full_criterion(&constant, None, &cfg).unwrap();
    assert_eq!(rep.overall, Verdict::Pass);
    assert!(rep.experiment.unwrap().rows.iter().all(|r| r.error == Some(0.0)));

    // resonant base: y'' + (pi^2 + eps) y = 0, y(0) = y(1) = 0
    let g = unit();
    let pi2 = std::f64::consts::PI.powi(2);
    let resonant = ParamFamily::from_fn(&EpsSchedule::default(), |e| {
        Ok(scalar_problem(g, 0, &[pi2 + e, 0.0], |_, _| 0.0, &[(0.0, 0, 0), (1.0, 0, 1)], &[0.0, 0.0]))
    })
    .unwrap();
    let rep = full_criterion(&resonant, None, &cfg).unwrap();
    assert_eq!(rep.cond0.verdict, Verdict::Fail);
    assert_eq!(rep.limit_i.verdict, Verdict::Pass);
    assert_eq!(rep.limit_ii.verdict, Verdict::Pass);
    assert_eq!(rep.overall, Verdict::Fail);
    assert!(solve_bvp(resonant.base()).is_err());
    assert!(resonant.instances().iter().all(|(_, p)| solve_bvp(p).is_ok()));
}
