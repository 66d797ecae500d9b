mod common;

use common::*;
use proptest::prelude::*;
use sobolev_bvp::{
    apply_boundary_operator, apply_differential_operator, companion_lift_solution, companion_reduce, lift_boundary_form,
    real, BoundaryOperator, BvpSolver, CMatrix, CanonicalBoundaryForm, Grid, GridFunction, Shape,
    SolverConfig, C,
};

fn grid() -> Grid<f64> {
    Grid::new(0.0, 1.0, 200).unwrap()
}

fn complex() -> impl Strategy<Value = C<f64>> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| C::new(a, b))
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, len)
}

/// Vector polynomial with `m` components, stack of the given order.
fn poly(m: usize, order: usize) -> impl Strategy<Value = GridFunction<f64>> {
    polys(m).prop_map(move |e| poly_vector(grid(), order, &e))
}

/// Coefficients of `m` polynomials of degree 5.
fn polys(m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(coeffs(6), m)
}

fn close(a: &[C<f64>], b: &[C<f64>], tol: f64) -> bool {
    let scale = 1.0 + a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol * scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn norm_homogeneity(g in poly(2, 2), lambda in complex(), p in 1.0..4.0f64) {
        let lhs = g.scale(lambda).sobolev_norm(2, p).unwrap();
        let rhs = lambda.norm() * g.sobolev_norm(2, p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn triangle_inequality(g in poly(2, 1), h in poly(2, 1), p in 1.0..4.0f64) {
        let sum = g.linear_combination(real(1.0), &h, real(1.0)).unwrap();
        let (ng, nh) = (g.sobolev_norm(1, p).unwrap(), h.sobolev_norm(1, p).unwrap());
        prop_assert!(sum.sobolev_norm(1, p).unwrap() <= ng + nh + 1e-12 * (ng + nh).max(1.0));
    }

    #[test]
    fn sobolev_norm_monotone_in_order(g in poly(1, 3), p in 1.0..4.0f64) {
        for n in 0..3 {
            prop_assert!(g.sobolev_norm(n, p).unwrap() <= g.sobolev_norm(n + 1, p).unwrap());
        }
    }

    #[test]
    fn operators_are_linear(seed in 0u64..1000, y in polys(2), z in polys(2), a in complex(), b in complex()) {
        let prob = random_poly_problem(seed, 2);
        let g = *prob.grid();
        let (y, z) = (poly_vector(g, 3, &y), poly_vector(g, 3, &z));
        let comb = y.linear_combination(a, &z, b).unwrap();
        let l = |v: &GridFunction<f64>| apply_differential_operator(prob.system(), v).unwrap();
        let lhs = l(&comb);
        let rhs = l(&y).linear_combination(a, &l(&z), b).unwrap();
        let scale = lhs.sobolev_norm(1, 2.0).unwrap().max(1.0);
        prop_assert!(lhs.sub(&rhs).unwrap().sobolev_norm(1, 2.0).unwrap() <= 1e-12 * scale);

        let bop = |v: &GridFunction<f64>| apply_boundary_operator(prob.boundary(), v).unwrap();
        let rhs: Vec<C<f64>> = bop(&y).iter().zip(bop(&z)).map(|(u, v)| a * u + b * v).collect();
        prop_assert!(close(&bop(&comb), &rhs, 1e-12));
    }

    #[test]
    fn reduction_matches_operator(seed in 0u64..1000, r in 2usize..4, y in polys(2)) {
        let prob = random_poly_problem(seed, r);
        let y = poly_vector(*prob.grid(), prob.params().top_order(), &y);
        let g = *prob.grid();
        let ly = apply_differential_operator(prob.system(), &y).unwrap();
        let ly_f = ly.sub(prob.system().rhs()).unwrap();
        let first = companion_reduce(&prob).unwrap();
        let res = first.residual(&companion_lift_solution(&y, r).unwrap()).unwrap();
        let m = 2;
        for node in 0..g.num_nodes() {
            for j in 0..=prob.params().n {
                let block = res.at_node(j, node);
                let (head, last) = block.split_at((r - 1) * m);
                prop_assert!(head.iter().all(|z| z.norm() <= 1e-10));
                prop_assert!(close(last, ly_f.at_node(j, node), 1e-10));
            }
        }
    }

    #[test]
    fn canonical_lift_identity(alpha in coeffs(4 * 2 * 3), kernel in coeffs(4), y in polys(2)) {
        // r = 2, m = 2, n = 1: three alphas of shape 4 x 2
        let prob = random_poly_problem(7, 2);
        let params = *prob.params();
        let g = *prob.grid();
        let alphas: Vec<CMatrix<f64>> = (0..3)
            .map(|k| CMatrix::from_fn(4, 2, |i, j| real(alpha[k * 8 + i * 2 + j])))
            .collect();
        let phi = GridFunction::sample_unchecked(g, Shape::Matrix(4, 2), 0, |_, t| {
            (0..8).map(|e| real(kernel[e % 4] * (t + e as f64).sin())).collect()
        }).unwrap();
        let b = BoundaryOperator::Canonical(CanonicalBoundaryForm::new(&params, alphas, phi).unwrap());
        let y = poly_vector(g, 3, &y);
        let direct = apply_boundary_operator(&b, &y).unwrap();
        let lifted = lift_boundary_form(&b, &params).unwrap().apply(&companion_lift_solution(&y, 2).unwrap()).unwrap();
        prop_assert!(close(&direct, &lifted, 1e-8));
    }

    #[test]
    fn solution_map_is_linear(seed in 0u64..1000, f1 in coeffs(8), f2 in coeffs(8), c in coeffs(8), a in complex(), b in complex()) {
        let prob = random_poly_problem(seed, 2);
        let solver = BvpSolver::new(&prob, &SolverConfig::default()).unwrap();
        prop_assume!(solver.condition0().is_nonsingular());
        let g = *prob.grid();
        let f1 = poly_vector(g, 1, &[f1[..4].to_vec(), f1[4..].to_vec()]);
        let f2 = poly_vector(g, 1, &[f2[..4].to_vec(), f2[4..].to_vec()]);
        let c1: Vec<C<f64>> = c[..4].iter().map(|x| real(*x)).collect();
        let c2: Vec<C<f64>> = c[4..].iter().map(|x| real(*x)).collect();
        let y1 = solver.solve_with(&f1, &c1).unwrap().y;
        let y2 = solver.solve_with(&f2, &c2).unwrap().y;
        let f = f1.linear_combination(a, &f2, b).unwrap();
        let cc: Vec<C<f64>> = c1.iter().zip(&c2).map(|(x, y)| a * x + b * y).collect();
        let y = solver.solve_with(&f, &cc).unwrap().y;
        let diff = y.sub(&y1.linear_combination(a, &y2, b).unwrap()).unwrap().sobolev_norm(3, 2.0).unwrap();
        prop_assert!(diff <= 1e-10 * y.sobolev_norm(3, 2.0).unwrap().max(1.0));
        // solver output is a consistent stack
        prop_assert!(y.check_consistency(1e-6).is_ok());
    }
}

#[test]
fn quadrature_converges_at_fourth_order() {
    let exact = ((std::f64::consts::E.powi(2) - 1.0) / 2.0).sqrt();
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for n in [10, 20, 40, 80] {
        let g = Grid::<f64>::new(0.0, 1.0, n).unwrap();
        let f = GridFunction::sample_unchecked(g, Shape::Scalar, 0, |_, t| vec![real(t.exp())]).unwrap();
        errs.push((f.lp_norm(0, 2.0).unwrap() - exact).abs());
        hs.push(1.0 / n as f64);
    }
    let slope = sobolev_bvp::trend::loglog_slope(&hs, &errs).unwrap();
    assert!((slope - 4.0).abs() <= 0.5, "slope {slope}");
}
