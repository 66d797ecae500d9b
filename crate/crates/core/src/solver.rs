//! Shooting solver: fundamental matrix of the first-order system, the
//! characteristic matrix `[B~ X]`, Condition (0), and variation of
//! parameters.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::funcspace::{cumulative_integral, GridFunction, Shape, SobolevParams};
use crate::linalg::{CMatrix, Lu};
use crate::scalar::{binomial, euclidean_norm, Real, C};
use crate::system::{
    acc_matvec, apply_boundary_operator, apply_differential_operator, companion_reduce, FirstOrderProblem,
    LiftedBoundary, ProblemInstance,
};

/// Relative singular-value threshold of Condition (0).
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-8;
/// Relative singular-value threshold below which `X(t)` counts as singular.
pub const FUNDAMENTAL_SINGULAR_TOL: f64 = 1e-12;

/// `X' + A~ X = 0`, `X(a) = I`, with nodewise inverses.
#[derive(Debug, Clone)]
pub struct FundamentalMatrix<T> {
    x: GridFunction<T>,
    inverses: Vec<CMatrix<T>>,
}

impl<T: Real> FundamentalMatrix<T> {
    /// `rm x rm` matrix function with stack order `order(A~) + 1`.
    pub fn x(&self) -> &GridFunction<T> {
        &self.x
    }

    pub fn size(&self) -> usize {
        match self.x.shape() {
            Shape::Matrix(r, _) => r,
            _ => unreachable!(),
        }
    }

    pub fn at(&self, i: usize) -> CMatrix<T> {
        let k = self.size();
        CMatrix::from_row_slice(k, k, self.x.at_node(0, i))
    }

    pub fn inverse_at(&self, i: usize) -> &CMatrix<T> {
        &self.inverses[i]
    }

    /// Column `j` as a vector function with the full stack.
    pub fn column(&self, j: usize) -> Result<GridFunction<T>> {
        let k = self.size();
        let comps: Vec<usize> = (0..k).map(|i| i * k + j).collect();
        self.x.select(&comps, Shape::Vector(k))
    }
}

fn matmul_into<T: Real>(out: &mut [C<T>], a: &[C<T>], b: &[C<T>], k: usize, coef: C<T>) {
    for i in 0..k {
        for l in 0..k {
            let ail = a[i * k + l] * coef;
            if ail.is_zero() {
                continue;
            }
            for j in 0..k {
                out[i * k + j] += ail * b[l * k + j];
            }
        }
    }
}

/// Integrate `X' = -A~ X` from `X(a) = I` with classical RK4 on the grid.
///
/// `A~` at half steps comes from cubic interpolation of its samples.
/// Derivative layers follow from `X^{(k+1)} = -sum_i C(k,i) A~^{(i)} X^{(k-i)}`.
pub fn fundamental_matrix<T: Real>(atilde: &GridFunction<T>) -> Result<FundamentalMatrix<T>> {
    let k = match atilde.shape() {
        Shape::Matrix(r, c) if r == c => r,
        s => return Err(Error::Dimension(format!("A~ must be square, got {s:?}"))),
    };
    let grid = *atilde.grid();
    let nodes = grid.num_nodes();
    let h = grid.h();
    let kk = k * k;
    let half = T::lit(0.5);
    let neg = -C::<T>::one();

    let mut x0 = vec![C::zero(); nodes * kk];
    x0[..kk].copy_from_slice(CMatrix::<T>::identity(k).as_slice());
    let rhs = |a: &[C<T>], x: &[C<T>]| {
        let mut out = vec![C::zero(); kk];
        matmul_into(&mut out, a, x, k, neg);
        out
    };
    let axpy = |x: &[C<T>], d: &[C<T>], s: T| -> Vec<C<T>> { x.iter().zip(d).map(|(a, b)| *a + *b * s).collect() };
    for i in 0..nodes - 1 {
        let t = grid.node(i);
        let a0 = atilde.at_node(0, i);
        let a1 = atilde.eval_at(0, t + half * h)?;
        let a2 = atilde.at_node(0, i + 1);
        let x = &x0[i * kk..(i + 1) * kk];
        let k1 = rhs(a0, x);
        let k2 = rhs(&a1, &axpy(x, &k1, half * h));
        let k3 = rhs(&a1, &axpy(x, &k2, half * h));
        let k4 = rhs(a2, &axpy(x, &k3, h));
        let six = h / T::lit(6.0);
        let next: Vec<C<T>> = (0..kk)
            .map(|e| x[e] + (k1[e] + (k2[e] + k3[e]) * T::lit(2.0) + k4[e]) * six)
            .collect();
        x0[(i + 1) * kk..(i + 2) * kk].copy_from_slice(&next);
    }

    let n = atilde.order();
    let mut layers = vec![x0];
    for d in 0..=n {
        let mut layer = vec![C::zero(); nodes * kk];
        for i in 0..nodes {
            let out = &mut layer[i * kk..(i + 1) * kk];
            for s in 0..=d {
                let coef = neg * binomial::<T>(d, s);
                matmul_into(out, atilde.at_node(s, i), &layers[d - s][i * kk..(i + 1) * kk], k, coef);
            }
        }
        layers.push(layer);
    }
    let x = GridFunction::from_layers_unchecked(grid, Shape::Matrix(k, k), layers)?;

    let tol = T::lit(FUNDAMENTAL_SINGULAR_TOL);
    let mut inverses = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let xi = CMatrix::from_row_slice(k, k, x.at_node(0, i));
        let sv = xi.singular_values();
        let (smax, smin) = (sv[0], sv[k - 1]);
        if !(smin > tol * smax) {
            return Err(Error::SingularFundamental {
                node: i,
                ratio: (smin / smax).to_f64().unwrap_or(0.0),
            });
        }
        inverses.push(xi.inverse()?);
    }
    Ok(FundamentalMatrix { x, inverses })
}

/// `M = [B~ X]` and its extreme singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicMatrix<T> {
    pub m: CMatrix<T>,
    pub sigma_min: T,
    pub sigma_max: T,
}

impl<T: Real> CharacteristicMatrix<T> {
    pub fn from_matrix(m: CMatrix<T>) -> Self {
        let sv = m.singular_values();
        Self {
            sigma_max: sv.first().copied().unwrap_or(T::zero()),
            sigma_min: sv.last().copied().unwrap_or(T::zero()),
            m,
        }
    }

    /// `sigma_min / sigma_max`, zero for the zero matrix.
    pub fn ratio(&self) -> T {
        if self.sigma_max > T::zero() {
            self.sigma_min / self.sigma_max
        } else {
            T::zero()
        }
    }
}

pub fn characteristic_matrix<T: Real>(f: &FundamentalMatrix<T>, btilde: &LiftedBoundary<T>) -> Result<CharacteristicMatrix<T>> {
    let k = f.size();
    let mut m = CMatrix::zeros(k, k);
    for j in 0..k {
        let col = btilde.apply(&f.column(j)?)?;
        if col.len() != k {
            return Err(Error::Dimension(format!("B~ returns {} rows, expected {k}", col.len())));
        }
        for (i, v) in col.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(CharacteristicMatrix::from_matrix(m))
}

/// Outcome of the Condition (0) test, with `sigma_min / sigma_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Condition0<T> {
    Nonsingular { ratio: T },
    Singular { ratio: T },
}

impl<T: Real> Condition0<T> {
    pub fn is_nonsingular(&self) -> bool {
        matches!(self, Condition0::Nonsingular { .. })
    }

    pub fn ratio(&self) -> T {
        match self {
            Condition0::Nonsingular { ratio } | Condition0::Singular { ratio } => *ratio,
        }
    }

    pub fn label(&self) -> &'static str {
        if self.is_nonsingular() {
            "nonsingular"
        } else {
            "singular"
        }
    }
}

/// Nonsingular iff `sigma_min > tol_sing * sigma_max`.
pub fn condition0_check<T: Real>(m: &CharacteristicMatrix<T>, tol_sing: T) -> Condition0<T> {
    let ratio = m.ratio();
    if m.sigma_min > tol_sing * m.sigma_max {
        Condition0::Nonsingular { ratio }
    } else {
        Condition0::Singular { ratio }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub tol_sing: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            tol_sing: T::lit(DEFAULT_SINGULAR_TOL),
        }
    }
}

/// Solution of one instance together with its residuals.
#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    /// `m`-vector function with stack order `n + r`.
    pub y: GridFunction<T>,
    /// `||L y - f||_{n,p}`.
    pub residual_l: T,
    /// `||B y - c||` in the Euclidean norm of `C^{rm}`.
    pub residual_b: T,
    pub condition0: Condition0<T>,
    pub sigma_min: T,
    pub sigma_max: T,
}

/// Reduced problem with its fundamental matrix and factorized `M`; solves
/// for any data `(f, c)` of the same operator.
#[derive(Debug, Clone)]
pub struct BvpSolver<T> {
    instance: ProblemInstance<T>,
    first: FirstOrderProblem<T>,
    fundamental: FundamentalMatrix<T>,
    charmat: CharacteristicMatrix<T>,
    condition0: Condition0<T>,
    lu: Option<Lu<T>>,
}

impl<T: Real> BvpSolver<T> {
    /// Reduce, integrate `X` and test Condition (0). A singular `M` is not
    /// an error here; [`BvpSolver::solve`] reports it.
    pub fn new(prob: &ProblemInstance<T>, cfg: &SolverConfig<T>) -> Result<Self> {
        let first = companion_reduce(prob)?;
        let fundamental = fundamental_matrix(first.atilde())?;
        let charmat = characteristic_matrix(&fundamental, first.btilde())?;
        let condition0 = condition0_check(&charmat, cfg.tol_sing);
        let lu = if condition0.is_nonsingular() {
            Some(charmat.m.lu()?)
        } else {
            None
        };
        Ok(Self {
            instance: prob.clone(),
            first,
            fundamental,
            charmat,
            condition0,
            lu,
        })
    }

    pub fn instance(&self) -> &ProblemInstance<T> {
        &self.instance
    }

    pub fn first_order(&self) -> &FirstOrderProblem<T> {
        &self.first
    }

    pub fn fundamental(&self) -> &FundamentalMatrix<T> {
        &self.fundamental
    }

    pub fn characteristic(&self) -> &CharacteristicMatrix<T> {
        &self.charmat
    }

    pub fn condition0(&self) -> Condition0<T> {
        self.condition0
    }

    fn singular_error(&self) -> Error {
        Error::NoUniqueSolution {
            sigma_min: self.charmat.sigma_min.to_f64().unwrap_or(f64::NAN),
            sigma_max: self.charmat.sigma_max.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Solve with the instance's own data.
    pub fn solve(&self) -> Result<SolveReport<T>> {
        self.solve_with(self.instance.system().rhs(), self.instance.c())
    }

    /// Solve `L y = f`, `B y = c` for new data.
    pub fn solve_with(&self, f: &GridFunction<T>, c: &[C<T>]) -> Result<SolveReport<T>> {
        let lu = self.lu.as_ref().ok_or_else(|| self.singular_error())?;
        let prob = self.instance.with_data(f.clone(), c.to_vec())?;
        let params = *prob.params();
        let SobolevParams { n, m, r, .. } = params;
        let rm = r * m;
        let grid = *prob.grid();
        let nodes = grid.num_nodes();
        let atilde = self.first.atilde();
        let ftilde = lift_rhs(f, &params)?;

        // x_p = X(t) int_a^t X^{-1} f~
        let mut g: Vec<Vec<C<T>>> = vec![Vec::with_capacity(nodes); rm];
        for i in 0..nodes {
            let v = self.fundamental.inverse_at(i).mul_vec(ftilde.at_node(0, i));
            for (comp, val) in v.into_iter().enumerate() {
                g[comp].push(val);
            }
        }
        let integrals: Vec<Vec<C<T>>> = g.iter().map(|s| cumulative_integral(s, grid.h())).collect();
        let mut xp0 = Vec::with_capacity(nodes * rm);
        for i in 0..nodes {
            let v: Vec<C<T>> = (0..rm).map(|comp| integrals[comp][i]).collect();
            xp0.extend(self.fundamental.at(i).mul_vec(&v));
        }
        let xp = complete_stack(atilde, &ftilde, xp0.clone(), n + 1)?;

        let bx = self.first.btilde().apply(&xp)?;
        let rhs: Vec<C<T>> = c.iter().zip(&bx).map(|(a, b)| *a - *b).collect();
        let w = lu.solve(&rhs);
        let mut x0 = xp0;
        for i in 0..nodes {
            let corr = self.fundamental.at(i).mul_vec(&w);
            for (o, v) in x0[i * rm..(i + 1) * rm].iter_mut().zip(corr) {
                *o += v;
            }
        }
        let x = complete_stack(atilde, &ftilde, x0, n + 1)?;
        let y = unlift(&x, r, m)?;

        let ly = apply_differential_operator(prob.system(), &y)?;
        let residual_l = ly.sub(&f.truncate(n)?)?.sobolev_norm(n, params.p)?;
        let by = apply_boundary_operator(prob.boundary(), &y)?;
        let diff: Vec<C<T>> = by.iter().zip(c).map(|(a, b)| *a - *b).collect();
        Ok(SolveReport {
            y,
            residual_l,
            residual_b: euclidean_norm(&diff),
            condition0: self.condition0,
            sigma_min: self.charmat.sigma_min,
            sigma_max: self.charmat.sigma_max,
        })
    }
}

/// `f~ = col(0, ..., 0, f)` truncated to order `n`.
fn lift_rhs<T: Real>(f: &GridFunction<T>, params: &SobolevParams<T>) -> Result<GridFunction<T>> {
    let SobolevParams { n, m, r, .. } = *params;
    let rm = r * m;
    let nodes = f.grid().num_nodes();
    let layers = (0..=n)
        .map(|k| {
            let mut layer = vec![C::zero(); nodes * rm];
            for i in 0..nodes {
                layer[i * rm + (r - 1) * m..(i + 1) * rm].copy_from_slice(f.at_node(k, i));
            }
            layer
        })
        .collect();
    GridFunction::from_layers_unchecked(*f.grid(), Shape::Vector(rm), layers)
}

/// Fill the derivative layers of `x` from `x' = f~ - A~ x` and its Leibniz
/// derivatives, up to `order`.
fn complete_stack<T: Real>(atilde: &GridFunction<T>, ftilde: &GridFunction<T>, x0: Vec<C<T>>, order: usize) -> Result<GridFunction<T>> {
    let grid = *atilde.grid();
    let k = ftilde.ncomp();
    let nodes = grid.num_nodes();
    let mut layers = vec![x0];
    for d in 0..order {
        let mut layer = Vec::with_capacity(nodes * k);
        for i in 0..nodes {
            let mut out = ftilde.at_node(d, i).to_vec();
            for s in 0..=d {
                let coef = -C::new(binomial::<T>(d, s), T::zero());
                acc_matvec(&mut out, atilde.at_node(s, i), &layers[d - s][i * k..(i + 1) * k], k, coef);
            }
            layer.extend(out);
        }
        layers.push(layer);
    }
    GridFunction::from_layers_unchecked(grid, Shape::Vector(k), layers)
}

/// `y` with stack order `r - 1 + order(x)` from `x = col(y, ..., y^{(r-1)})`.
fn unlift<T: Real>(x: &GridFunction<T>, r: usize, m: usize) -> Result<GridFunction<T>> {
    let nodes = x.grid().num_nodes();
    let top = r - 1 + x.order();
    let layers = (0..=top)
        .map(|l| {
            let block = l.min(r - 1);
            let layer = l - block;
            let mut out = Vec::with_capacity(nodes * m);
            for i in 0..nodes {
                out.extend_from_slice(&x.at_node(layer, i)[block * m..(block + 1) * m]);
            }
            out
        })
        .collect();
    GridFunction::from_layers_unchecked(*x.grid(), Shape::Vector(m), layers)
}

/// Solve one instance; fails with [`Error::NoUniqueSolution`] when
/// Condition (0) does not hold.
pub fn solve_bvp<T: Real>(prob: &ProblemInstance<T>) -> Result<SolveReport<T>> {
    BvpSolver::new(prob, &SolverConfig::default())?.solve()
}

/// Condition (0) of an instance without solving.
pub fn condition0_of<T: Real>(prob: &ProblemInstance<T>, tol_sing: T) -> Result<(CharacteristicMatrix<T>, Condition0<T>)> {
    let s = BvpSolver::new(prob, &SolverConfig { tol_sing })?;
    Ok((s.charmat.clone(), s.condition0))
}

/// `d(eps) = ||L(eps) y0 - f(eps)||_{n,p} + ||B(eps) y0 - c(eps)||`.
pub fn discrepancy<T: Real>(prob_eps: &ProblemInstance<T>, y0: &GridFunction<T>) -> Result<T> {
    let SobolevParams { n, p, r, .. } = *prob_eps.params();
    if y0.order() < n + r {
        return Err(Error::Order {
            requested: n + r,
            available: y0.order(),
        });
    }
    let ly = apply_differential_operator(prob_eps.system(), y0)?;
    let dl = ly.sub(&prob_eps.system().rhs().truncate(n)?)?.sobolev_norm(n, p)?;
    let by = apply_boundary_operator(prob_eps.boundary(), y0)?;
    let diff: Vec<C<T>> = by.iter().zip(prob_eps.c()).map(|(a, b)| *a - *b).collect();
    Ok(dl + euclidean_norm(&diff))
}
