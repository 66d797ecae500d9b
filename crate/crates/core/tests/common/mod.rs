#![allow(dead_code)]

use sobolev_bvp::{
    real, BoundaryOperator, CMatrix, DifferentialSystem, Grid, GridFunction, MultipointBoundaryForm, ProblemInstance,
    Shape, SobolevParams, C,
};

/// Boundary term `(point, derivative order, row)` with a unit coefficient.
pub type Term = (f64, usize, usize);

pub fn unit_row(rm: usize, m: usize, row: usize, col: usize) -> CMatrix<f64> {
    CMatrix::from_fn(rm, m, |i, j| real(if i == row && j == col { 1.0 } else { 0.0 }))
}

/// Scalar equation `y^{(r)} + sum a[i] y^{(i)} = f` with constant
/// coefficients and pointwise boundary rows.
pub fn scalar_problem(
    grid: Grid<f64>,
    n: usize,
    a: &[f64],
    f: impl Fn(usize, f64) -> f64,
    terms: &[Term],
    c: &[f64],
) -> ProblemInstance<f64> {
    let r = a.len();
    let params = SobolevParams::new(n, 2.0, 1, r).unwrap();
    let coeffs = a
        .iter()
        .map(|x| GridFunction::constant(grid, Shape::Matrix(1, 1), n, &[real(*x)]).unwrap())
        .collect();
    let rhs = GridFunction::sample_unchecked(grid, Shape::Vector(1), n, |j, t| vec![real(f(j, t))]).unwrap();
    let sys = DifferentialSystem::new(params, coeffs, rhs).unwrap();
    let terms: Vec<(f64, usize, CMatrix<f64>)> = terms.iter().map(|(t, l, row)| (*t, *l, unit_row(r, 1, *row, 0))).collect();
    let form = MultipointBoundaryForm::from_point_terms(&params, &grid, &terms).unwrap();
    ProblemInstance::new(sys, BoundaryOperator::Multipoint(form), c.iter().map(|x| real(*x)).collect()).unwrap()
}

pub fn scalar_exact(grid: Grid<f64>, order: usize, y: impl Fn(usize, f64) -> f64) -> GridFunction<f64> {
    GridFunction::sample_unchecked(grid, Shape::Vector(1), order, |j, t| vec![real(y(j, t))]).unwrap()
}

/// Coefficients of a polynomial matrix entry, lowest degree first.
pub fn poly_eval(c: &[f64], j: usize, t: f64) -> f64 {
    let mut s = 0.0;
    for (d, ck) in c.iter().enumerate() {
        if d < j {
            continue;
        }
        let falling: f64 = (d - j + 1..=d).map(|v| v as f64).product();
        s += ck * falling * t.powi((d - j) as i32);
    }
    s
}

/// Matrix function whose entry `(i, k)` is the polynomial `entries[i*m+k]`.
pub fn poly_matrix(grid: Grid<f64>, m: usize, order: usize, entries: &[Vec<f64>]) -> GridFunction<f64> {
    GridFunction::sample_unchecked(grid, Shape::Matrix(m, m), order, |j, t| {
        entries.iter().map(|e| real(poly_eval(e, j, t))).collect::<Vec<C<f64>>>()
    })
    .unwrap()
}

pub fn poly_vector(grid: Grid<f64>, order: usize, entries: &[Vec<f64>]) -> GridFunction<f64> {
    GridFunction::sample_unchecked(grid, Shape::Vector(entries.len()), order, |j, t| {
        entries.iter().map(|e| real(poly_eval(e, j, t))).collect::<Vec<C<f64>>>()
    })
    .unwrap()
}

/// Seeded generator for reproducible test data.
pub fn rng(seed: u64) -> rand::rngs::StdRng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut rand::rngs::StdRng, n: usize) -> Vec<f64> {
    use rand::Rng;
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Random order-`r` system with polynomial coefficients, `m = 2`, `n = 1`.
pub fn random_poly_problem(seed: u64, r: usize) -> ProblemInstance<f64> {
    let mut rng = rng(seed);
    let (m, n) = (2, 1);
    let g = Grid::new(0.0, 1.0, 1000).unwrap();
    let params = SobolevParams::new(n, 2.0, m, r).unwrap();
    let coeffs = (0..r)
        .map(|_| {
            let entries: Vec<Vec<f64>> = (0..m * m).map(|_| uniform(&mut rng, 3)).collect();
            poly_matrix(g, m, n, &entries)
        })
        .collect();
    let rhs_entries: Vec<Vec<f64>> = (0..m).map(|_| uniform(&mut rng, 4)).collect();
    let sys = DifferentialSystem::new(params, coeffs, poly_vector(g, n, &rhs_entries)).unwrap();
    let rm = r * m;
    let mut terms = Vec::new();
    for l in 0..r {
        for comp in 0..m {
            terms.push((0.0, l, unit_row(rm, m, l * m + comp, comp)));
        }
    }
    for l in 0..r {
        let noise = uniform(&mut rng, rm * m);
        let a = CMatrix::from_fn(rm, m, |i, j| real(0.1 * noise[i * m + j]));
        terms.push((1.0, l, a));
    }
    let form = MultipointBoundaryForm::from_point_terms(&params, &g, &terms).unwrap();
    let c: Vec<C<f64>> = uniform(&mut rng, rm).into_iter().map(real).collect();
    ProblemInstance::new(sys, BoundaryOperator::Multipoint(form), c).unwrap()
}
