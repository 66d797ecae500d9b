//! Problem data: differential systems of order `r`, boundary operators, and
//! the reduction of an order-`r` problem to a first-order one.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::funcspace::{simpson, Grid, GridFunction, Shape, SobolevParams};
use crate::linalg::CMatrix;
use crate::multipoint::{MultipointBoundaryForm, MultipointNode};
use crate::scalar::{binomial, Real, C};

/// `y^{(r)} + sum_{j=1}^{r} A_{r-j} y^{(r-j)} = f` on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialSystem<T> {
    params: SobolevParams<T>,
    /// `coeffs[i]` multiplies `y^{(i)}`, `i = 0..r`.
    coeffs: Vec<GridFunction<T>>,
    rhs: GridFunction<T>,
}

impl<T: Real> DifferentialSystem<T> {
    pub fn new(params: SobolevParams<T>, coeffs: Vec<GridFunction<T>>, rhs: GridFunction<T>) -> Result<Self> {
        let (m, r, n) = (params.m, params.r, params.n);
        if coeffs.len() != r {
            return Err(Error::Dimension(format!("expected {r} coefficient matrices, got {}", coeffs.len())));
        }
        let grid = *rhs.grid();
        for (i, a) in coeffs.iter().enumerate() {
            if a.grid() != &grid {
                return Err(Error::GridMismatch);
            }
            if a.shape() != Shape::Matrix(m, m) {
                return Err(Error::Dimension(format!("A_{i} has shape {:?}, expected {m}x{m}", a.shape())));
            }
            if a.order() < n {
                return Err(Error::InsufficientSmoothness {
                    needed: n,
                    available: a.order(),
                });
            }
        }
        if rhs.shape() != Shape::Vector(m) {
            return Err(Error::Dimension(format!("rhs has shape {:?}, expected vector({m})", rhs.shape())));
        }
        if rhs.order() < n {
            return Err(Error::InsufficientSmoothness {
                needed: n,
                available: rhs.order(),
            });
        }
        Ok(Self { params, coeffs, rhs })
    }

    pub fn params(&self) -> &SobolevParams<T> {
        &self.params
    }

    pub fn grid(&self) -> &Grid<T> {
        self.rhs.grid()
    }

    /// Coefficient `A_i` multiplying `y^{(i)}`.
    pub fn coeff(&self, i: usize) -> &GridFunction<T> {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[GridFunction<T>] {
        &self.coeffs
    }

    pub fn rhs(&self) -> &GridFunction<T> {
        &self.rhs
    }

    /// Same operator with a different right-hand side.
    pub fn with_rhs(&self, rhs: GridFunction<T>) -> Result<Self> {
        Self::new(self.params, self.coeffs.clone(), rhs)
    }
}

/// `B y = sum_{k=1}^{n+r} alpha_k y^{(k-1)}(a) + int_a^b Phi(t) y^{(n+r)}(t) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalBoundaryForm<T> {
    alphas: Vec<CMatrix<T>>,
    phi: GridFunction<T>,
}

impl<T: Real> CanonicalBoundaryForm<T> {
    pub fn new(params: &SobolevParams<T>, alphas: Vec<CMatrix<T>>, phi: GridFunction<T>) -> Result<Self> {
        let (rm, m) = (params.rm(), params.m);
        if alphas.len() != params.top_order() {
            return Err(Error::Dimension(format!(
                "expected {} alpha matrices, got {}",
                params.top_order(),
                alphas.len()
            )));
        }
        if let Some(k) = alphas.iter().position(|a| a.shape() != (rm, m)) {
            return Err(Error::Dimension(format!("alpha_{} is not {rm}x{m}", k + 1)));
        }
        if phi.shape() != Shape::Matrix(rm, m) {
            return Err(Error::Dimension(format!("Phi has shape {:?}, expected {rm}x{m}", phi.shape())));
        }
        Ok(Self { alphas, phi })
    }

    /// Canonical form without integral term.
    pub fn without_kernel(params: &SobolevParams<T>, grid: Grid<T>, alphas: Vec<CMatrix<T>>) -> Result<Self> {
        let phi = GridFunction::zeros(grid, Shape::Matrix(params.rm(), params.m), 0);
        Self::new(params, alphas, phi)
    }

    pub fn alphas(&self) -> &[CMatrix<T>] {
        &self.alphas
    }

    pub fn phi(&self) -> &GridFunction<T> {
        &self.phi
    }

    fn dims(&self) -> BoundaryDims {
        let (rm, m) = self.alphas[0].shape();
        BoundaryDims {
            rm,
            m,
            top_order: self.alphas.len(),
        }
    }
}

/// `(rm, m, n + r)` of a boundary operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryDims {
    pub rm: usize,
    pub m: usize,
    pub top_order: usize,
}

/// Continuous linear operator `B : (W^{n+r}_p)^m -> C^{rm}`.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryOperator<T> {
    Canonical(CanonicalBoundaryForm<T>),
    Multipoint(MultipointBoundaryForm<T>),
}

impl<T: Real> BoundaryOperator<T> {
    pub fn dims(&self) -> BoundaryDims {
        match self {
            BoundaryOperator::Canonical(c) => c.dims(),
            BoundaryOperator::Multipoint(mp) => mp.dims(),
        }
    }

    /// Smallest stack order of `y` the operator needs.
    pub fn required_order(&self) -> usize {
        let d = self.dims();
        match self {
            BoundaryOperator::Canonical(_) => d.top_order,
            BoundaryOperator::Multipoint(_) => d.top_order - 1,
        }
    }

    /// `B y` for a vector grid function `y` of stack order `>= n + r`
    /// (`>= n + r - 1` for multipoint operators).
    pub fn apply(&self, y: &GridFunction<T>) -> Result<Vec<C<T>>> {
        let d = self.dims();
        if y.ncomp() != d.m {
            return Err(Error::Dimension(format!("B expects {} components, got {}", d.m, y.ncomp())));
        }
        self.apply_jet(&Jet::direct(y, d.m))
    }

    fn apply_jet(&self, y: &Jet<'_, T>) -> Result<Vec<C<T>>> {
        let need = self.required_order();
        if y.available() < need {
            return Err(Error::InsufficientSmoothness {
                needed: need,
                available: y.available(),
            });
        }
        match self {
            BoundaryOperator::Canonical(form) => {
                let d = form.dims();
                if form.phi.grid() != y.grid() {
                    return Err(Error::GridMismatch);
                }
                let mut out = vec![C::zero(); d.rm];
                for (k, alpha) in form.alphas.iter().enumerate() {
                    acc_matvec(&mut out, alpha.as_slice(), &y.node(k, 0), d.m, C::one());
                }
                let grid = y.grid();
                let samples: Vec<Vec<C<T>>> = (0..grid.num_nodes())
                    .map(|i| {
                        let mut v = vec![C::zero(); d.rm];
                        acc_matvec(&mut v, form.phi.at_node(0, i), &y.node(d.top_order, i), d.m, C::one());
                        v
                    })
                    .collect();
                for (row, o) in out.iter_mut().enumerate() {
                    let col: Vec<C<T>> = samples.iter().map(|v| v[row]).collect();
                    *o += simpson(&col, grid.h());
                }
                Ok(out)
            }
            BoundaryOperator::Multipoint(form) => {
                let d = form.dims();
                let mut out = vec![C::zero(); d.rm];
                for node in form.groups().iter().flatten() {
                    for (l, alpha) in node.coeffs.iter().enumerate() {
                        if alpha.as_slice().iter().all(|z| z.is_zero()) {
                            continue;
                        }
                        let v = y.eval(l, node.point)?;
                        acc_matvec(&mut out, alpha.as_slice(), &v, d.m, C::one());
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Boundary operator acting on `x = col(y, y', ..., y^{(r-1)})`.
///
/// `y^{(l)}` is read from block `min(l, r-1)` of `x` at derivative layer
/// `l - min(l, r-1)`, so `B~ x = B y` holds identically.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedBoundary<T> {
    op: BoundaryOperator<T>,
    r: usize,
    m: usize,
}

impl<T: Real> LiftedBoundary<T> {
    pub fn operator(&self) -> &BoundaryOperator<T> {
        &self.op
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `B~ x` for an `rm`-vector function `x` with stack order `>= n + 1`.
    pub fn apply(&self, x: &GridFunction<T>) -> Result<Vec<C<T>>> {
        if x.ncomp() != self.r * self.m {
            return Err(Error::Dimension(format!(
                "lifted operator expects {} components, got {}",
                self.r * self.m,
                x.ncomp()
            )));
        }
        self.op.apply_jet(&Jet::lifted(x, self.r, self.m))
    }
}

/// Lift a boundary operator to first-order form (identity when `r = 1`).
pub fn lift_boundary_form<T: Real>(op: &BoundaryOperator<T>, params: &SobolevParams<T>) -> Result<LiftedBoundary<T>> {
    let d = op.dims();
    if d.rm != params.rm() || d.m != params.m || d.top_order != params.top_order() {
        return Err(Error::Dimension(format!(
            "boundary operator dims {d:?} do not match n={}, m={}, r={}",
            params.n, params.m, params.r
        )));
    }
    Ok(LiftedBoundary {
        op: op.clone(),
        r: params.r,
        m: params.m,
    })
}

/// Read access to `y^{(l)}` either directly from a stack or through the
/// companion layout.
pub(crate) struct Jet<'a, T> {
    f: &'a GridFunction<T>,
    r: usize,
    m: usize,
}

impl<'a, T: Real> Jet<'a, T> {
    pub(crate) fn direct(f: &'a GridFunction<T>, m: usize) -> Self {
        Self { f, r: 1, m }
    }

    pub(crate) fn lifted(f: &'a GridFunction<T>, r: usize, m: usize) -> Self {
        Self { f, r, m }
    }

    fn locate(&self, l: usize) -> (usize, usize) {
        let block = l.min(self.r - 1);
        (block, l - block)
    }

    pub(crate) fn available(&self) -> usize {
        self.r - 1 + self.f.order()
    }

    pub(crate) fn grid(&self) -> &Grid<T> {
        self.f.grid()
    }

    pub(crate) fn node(&self, l: usize, i: usize) -> Vec<C<T>> {
        let (block, layer) = self.locate(l);
        self.f.at_node(layer, i)[block * self.m..(block + 1) * self.m].to_vec()
    }

    pub(crate) fn eval(&self, l: usize, t: T) -> Result<Vec<C<T>>> {
        let (block, layer) = self.locate(l);
        let v = self.f.eval_at(layer, t)?;
        Ok(v[block * self.m..(block + 1) * self.m].to_vec())
    }
}

/// `out += coef * M v` for a row-major `M` with `cols` columns.
#[inline]
pub(crate) fn acc_matvec<T: Real>(out: &mut [C<T>], mat: &[C<T>], v: &[C<T>], cols: usize, coef: C<T>) {
    for (i, o) in out.iter_mut().enumerate() {
        let row = &mat[i * cols..(i + 1) * cols];
        let s = row.iter().zip(v).fold(C::<T>::zero(), |acc, (a, b)| acc + *a * *b);
        *o += s * coef;
    }
}

/// One boundary-value problem `L y = f`, `B y = c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance<T> {
    system: DifferentialSystem<T>,
    boundary: BoundaryOperator<T>,
    c: Vec<C<T>>,
}

impl<T: Real> ProblemInstance<T> {
    pub fn new(system: DifferentialSystem<T>, boundary: BoundaryOperator<T>, c: Vec<C<T>>) -> Result<Self> {
        let params = *system.params();
        let d = boundary.dims();
        if d.rm != params.rm() || d.m != params.m || d.top_order != params.top_order() {
            return Err(Error::Dimension(format!(
                "boundary operator dims {d:?} incompatible with m={}, r={}, n={}",
                params.m, params.r, params.n
            )));
        }
        if c.len() != params.rm() {
            return Err(Error::Dimension(format!("c has length {}, expected {}", c.len(), params.rm())));
        }
        match &boundary {
            BoundaryOperator::Canonical(form) => {
                if form.phi().grid() != system.grid() {
                    return Err(Error::GridMismatch);
                }
            }
            BoundaryOperator::Multipoint(form) => form.validate_interval(system.grid())?,
        }
        Ok(Self { system, boundary, c })
    }

    pub fn system(&self) -> &DifferentialSystem<T> {
        &self.system
    }

    pub fn boundary(&self) -> &BoundaryOperator<T> {
        &self.boundary
    }

    pub fn c(&self) -> &[C<T>] {
        &self.c
    }

    pub fn params(&self) -> &SobolevParams<T> {
        self.system.params()
    }

    pub fn grid(&self) -> &Grid<T> {
        self.system.grid()
    }

    /// Same operator `(L, B)` with new data `(f, c)`.
    pub fn with_data(&self, rhs: GridFunction<T>, c: Vec<C<T>>) -> Result<Self> {
        Self::new(self.system.with_rhs(rhs)?, self.boundary.clone(), c)
    }
}

/// `L y` as an order-`n` stack; derivatives of products by the Leibniz rule.
pub fn apply_differential_operator<T: Real>(sys: &DifferentialSystem<T>, y: &GridFunction<T>) -> Result<GridFunction<T>> {
    let SobolevParams { n, m, r, .. } = *sys.params();
    if y.ncomp() != m {
        return Err(Error::Dimension(format!("L expects {m} components, got {}", y.ncomp())));
    }
    if y.grid() != sys.grid() {
        return Err(Error::GridMismatch);
    }
    if y.order() < n + r {
        return Err(Error::InsufficientSmoothness {
            needed: n + r,
            available: y.order(),
        });
    }
    let nodes = y.grid().num_nodes();
    let mut layers = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut layer = Vec::with_capacity(nodes * m);
        for node in 0..nodes {
            let mut out = y.at_node(r + k, node).to_vec();
            for i in 0..r {
                let a = sys.coeff(i);
                for s in 0..=k {
                    let coef = C::new(binomial::<T>(k, s), T::zero());
                    acc_matvec(&mut out, a.at_node(s, node), y.at_node(i + k - s, node), m, coef);
                }
            }
            layer.extend(out);
        }
        layers.push(layer);
    }
    GridFunction::from_layers_unchecked(*y.grid(), Shape::Vector(m), layers)
}

/// `B y`; see [`BoundaryOperator::apply`].
pub fn apply_boundary_operator<T: Real>(b: &BoundaryOperator<T>, y: &GridFunction<T>) -> Result<Vec<C<T>>> {
    b.apply(y)
}

/// First-order form `x' + A~ x = f~`, `B~ x = c` of an order-`r` problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderProblem<T> {
    params: SobolevParams<T>,
    atilde: GridFunction<T>,
    ftilde: GridFunction<T>,
    btilde: LiftedBoundary<T>,
    c: Vec<C<T>>,
}

impl<T: Real> FirstOrderProblem<T> {
    /// Parameters of the original order-`r` problem.
    pub fn params(&self) -> &SobolevParams<T> {
        &self.params
    }

    pub fn atilde(&self) -> &GridFunction<T> {
        &self.atilde
    }

    pub fn ftilde(&self) -> &GridFunction<T> {
        &self.ftilde
    }

    pub fn btilde(&self) -> &LiftedBoundary<T> {
        &self.btilde
    }

    pub fn c(&self) -> &[C<T>] {
        &self.c
    }

    pub fn grid(&self) -> &Grid<T> {
        self.atilde.grid()
    }

    /// Residual `x' + A~ x - f~` as an order-`n` stack (`x` needs order
    /// `n + 1`).
    pub fn residual(&self, x: &GridFunction<T>) -> Result<GridFunction<T>> {
        let n = self.params.n;
        let rm = self.params.rm();
        if x.ncomp() != rm {
            return Err(Error::Dimension(format!("x must have {rm} components")));
        }
        if x.order() < n + 1 {
            return Err(Error::InsufficientSmoothness {
                needed: n + 1,
                available: x.order(),
            });
        }
        let nodes = x.grid().num_nodes();
        let mut layers = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut layer = Vec::with_capacity(nodes * rm);
            for node in 0..nodes {
                let mut out: Vec<C<T>> = x
                    .at_node(k + 1, node)
                    .iter()
                    .zip(self.ftilde.at_node(k, node))
                    .map(|(a, b)| *a - *b)
                    .collect();
                for s in 0..=k {
                    let coef = C::new(binomial::<T>(k, s), T::zero());
                    acc_matvec(&mut out, self.atilde.at_node(s, node), x.at_node(k - s, node), rm, coef);
                }
                layer.extend(out);
            }
            layers.push(layer);
        }
        GridFunction::from_layers_unchecked(*x.grid(), Shape::Vector(rm), layers)
    }

    /// The first-order problem as an ordinary instance with `r = 1` and
    /// `m = rm`.
    pub fn as_instance(&self) -> Result<ProblemInstance<T>> {
        let SobolevParams { n, p, m, r } = self.params;
        let rm = r * m;
        let params = SobolevParams::new(n, p, rm, 1)?;
        // y^{(l)} lives in block min(l, r-1) at order l - min(l, r-1)
        let remap = |coeffs: &[CMatrix<T>]| -> Vec<CMatrix<T>> {
            let mut out = vec![CMatrix::zeros(rm, rm); n + 1];
            for (l, alpha) in coeffs.iter().enumerate() {
                let block = l.min(r - 1);
                let mut wide = CMatrix::zeros(rm, rm);
                wide.set_block(0, block * m, alpha);
                out[l - block] = &out[l - block] + &wide;
            }
            out
        };
        let boundary = match self.btilde.operator() {
            BoundaryOperator::Canonical(form) => {
                let alphas = remap(form.alphas());
                let grid = *form.phi().grid();
                let phi = GridFunction::sample_unchecked(grid, Shape::Matrix(rm, rm), 0, |_, _| vec![C::zero(); rm * rm])?;
                let mut layer = phi.into_layers().remove(0);
                for i in 0..grid.num_nodes() {
                    let src = form.phi().at_node(0, i);
                    for row in 0..rm {
                        for col in 0..m {
                            layer[i * rm * rm + row * rm + (r - 1) * m + col] = src[row * m + col];
                        }
                    }
                }
                let phi = GridFunction::from_layers_unchecked(grid, Shape::Matrix(rm, rm), vec![layer])?;
                BoundaryOperator::Canonical(CanonicalBoundaryForm::new(&params, alphas, phi)?)
            }
            BoundaryOperator::Multipoint(form) => {
                let groups = form
                    .groups()
                    .iter()
                    .map(|g| {
                        g.iter()
                            .map(|node| MultipointNode {
                                point: node.point,
                                coeffs: remap(&node.coeffs),
                            })
                            .collect()
                    })
                    .collect();
                BoundaryOperator::Multipoint(MultipointBoundaryForm::new(
                    &params,
                    self.grid(),
                    form.limit_points().to_vec(),
                    groups,
                )?)
            }
        };
        let sys = DifferentialSystem::new(params, vec![self.atilde.clone()], self.ftilde.clone())?;
        ProblemInstance::new(sys, boundary, self.c.clone())
    }
}

/// Reduce an order-`r` problem to first order with `x = col(y, ..., y^{(r-1)})`.
///
/// The superdiagonal blocks are `-I` so that `x_k' = x_{k+1}` in the
/// `x' + A~ x = f~` convention; the last block row is `(A_0, ..., A_{r-1})`.
pub fn companion_reduce<T: Real>(prob: &ProblemInstance<T>) -> Result<FirstOrderProblem<T>> {
    let params = *prob.params();
    let SobolevParams { n, m, r, .. } = params;
    let rm = r * m;
    let grid = *prob.grid();
    let sys = prob.system();
    let btilde = lift_boundary_form(prob.boundary(), &params)?;
    let rhs_vec = sys.rhs();
    if r == 1 {
        return Ok(FirstOrderProblem {
            params,
            atilde: sys.coeff(0).truncate(n)?,
            ftilde: rhs_vec.truncate(n)?,
            btilde,
            c: prob.c().to_vec(),
        });
    }
    let nodes = grid.num_nodes();
    let mut a_layers = Vec::with_capacity(n + 1);
    let mut f_layers = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut al = vec![C::zero(); nodes * rm * rm];
        let mut fl = vec![C::zero(); nodes * rm];
        for node in 0..nodes {
            let base = node * rm * rm;
            if k == 0 {
                for b in 0..r - 1 {
                    for d in 0..m {
                        al[base + (b * m + d) * rm + (b + 1) * m + d] = -C::<T>::one();
                    }
                }
            }
            for i in 0..r {
                let a = sys.coeff(i).at_node(k, node);
                for row in 0..m {
                    for col in 0..m {
                        al[base + ((r - 1) * m + row) * rm + i * m + col] = a[row * m + col];
                    }
                }
            }
            let f = rhs_vec.at_node(k, node);
            fl[node * rm + (r - 1) * m..node * rm + rm].copy_from_slice(f);
        }
        a_layers.push(al);
        f_layers.push(fl);
    }
    Ok(FirstOrderProblem {
        params,
        atilde: GridFunction::from_layers_unchecked(grid, Shape::Matrix(rm, rm), a_layers)?,
        ftilde: GridFunction::from_layers_unchecked(grid, Shape::Vector(rm), f_layers)?,
        btilde,
        c: prob.c().to_vec(),
    })
}

/// `x = col(y, y', ..., y^{(r-1)})` with stack order `y.order() - r + 1`.
pub fn companion_lift_solution<T: Real>(y: &GridFunction<T>, r: usize) -> Result<GridFunction<T>> {
    let m = y.ncomp();
    if y.order() + 1 < r {
        return Err(Error::InsufficientSmoothness {
            needed: r - 1,
            available: y.order(),
        });
    }
    let order = y.order() + 1 - r;
    let nodes = y.grid().num_nodes();
    let layers = (0..=order)
        .map(|k| {
            let mut layer = Vec::with_capacity(nodes * r * m);
            for node in 0..nodes {
                for b in 0..r {
                    layer.extend_from_slice(y.at_node(b + k, node));
                }
            }
            layer
        })
        .collect();
    GridFunction::from_layers_unchecked(*y.grid(), Shape::Vector(r * m), layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::real;
    use num_complex::Complex;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid<f64> {
        Grid::new(0.0, 1.0, n).unwrap()
    }

    fn const_mat(g: Grid<f64>, m: usize, order: usize, vals: &[f64]) -> GridFunction<f64> {
        let v: Vec<C<f64>> = vals.iter().map(|&x| real(x)).collect();
        GridFunction::constant(g, Shape::Matrix(m, m), order, &v).unwrap()
    }

    fn poly(g: Grid<f64>, coeffs: &[f64], order: usize) -> GridFunction<f64> {
        let cs = coeffs.to_vec();
        GridFunction::sample(
            g,
            Shape::Vector(1),
            order,
            move |j, t| {
                // j-th derivative of sum c_k t^k
                let mut s = 0.0;
                for (k, c) in cs.iter().enumerate() {
                    if k >= j {
                        let mut f = 1.0;
                        for i in 0..j {
                            f *= (k - i) as f64;
                        }
                        s += c * f * t.powi((k - j) as i32);
                    }
                }
                vec![real(s)]
            },
            1e-6,
        )
        .unwrap()
    }

    #[test]
    fn l_on_quadratic_with_zero_coeffs() {
        let g = grid(20);
        let params = SobolevParams::new(0, 2.0, 1, 2).unwrap();
        let z = const_mat(g, 1, 0, &[0.0]);
        let rhs = GridFunction::zeros(g, Shape::Vector(1), 0);
        let sys = DifferentialSystem::new(params, vec![z.clone(), z], rhs).unwrap();
        let y = poly(g, &[0.0, 0.0, 1.0], 2);
        let ly = apply_differential_operator(&sys, &y).unwrap();
        assert!(ly.layer(0).iter().all(|z| (*z - real(2.0)).norm() < 1e-14));
    }

    #[test]
    fn l_on_exponential_and_sine() {
        let g = grid(200);
        let params = SobolevParams::new(0, 2.0, 1, 1).unwrap();
        let sys = DifferentialSystem::new(
            params,
            vec![const_mat(g, 1, 0, &[1.0])],
            GridFunction::zeros(g, Shape::Vector(1), 0),
        )
        .unwrap();
        let y = GridFunction::sample(g, Shape::Vector(1), 1, |j, t| vec![real(if j == 0 { (-t).exp() } else { -(-t).exp() })], 1e-6)
            .unwrap();
        let ly = apply_differential_operator(&sys, &y).unwrap();
        assert!(ly.sup_norm(0).unwrap() <= 1e-10);

        let params = SobolevParams::new(0, 2.0, 1, 2).unwrap();
        let sys = DifferentialSystem::new(
            params,
            vec![const_mat(g, 1, 0, &[PI * PI]), const_mat(g, 1, 0, &[0.0])],
            GridFunction::zeros(g, Shape::Vector(1), 0),
        )
        .unwrap();
        let y = GridFunction::sample(
            g,
            Shape::Vector(1),
            2,
            |j, t| {
                let w = PI;
                vec![real(match j {
                    0 => (w * t).sin(),
                    1 => w * (w * t).cos(),
                    _ => -w * w * (w * t).sin(),
                })]
            },
            1e-6,
        )
        .unwrap();
        let ly = apply_differential_operator(&sys, &y).unwrap();
        assert!(ly.sup_norm(0).unwrap() <= 1e-8);
    }

    #[test]
    fn l_leibniz_layers() {
        // n = 1, r = 1, A_0 = t, y = t^2: Ly = 2t + t^3, (Ly)' = 2 + 3t^2
        let g = grid(20);
        let params = SobolevParams::new(1, 2.0, 1, 1).unwrap();
        let a = GridFunction::sample(g, Shape::Matrix(1, 1), 1, |j, t| vec![real(if j == 0 { t } else { 1.0 })], 1e-6).unwrap();
        let sys = DifferentialSystem::new(params, vec![a], GridFunction::zeros(g, Shape::Vector(1), 1)).unwrap();
        let y = poly(g, &[0.0, 0.0, 1.0], 2);
        let ly = apply_differential_operator(&sys, &y).unwrap();
        for (i, t) in g.nodes().iter().enumerate() {
            assert!((ly.at_node(0, i)[0].re - (2.0 * t + t.powi(3))).abs() < 1e-13);
            assert!((ly.at_node(1, i)[0].re - (2.0 + 3.0 * t * t)).abs() < 1e-13);
        }
        assert!(apply_differential_operator(&sys, &y.truncate(1).unwrap()).is_err());
    }

    #[test]
    fn boundary_examples() {
        let g = grid(100);
        // y(a) with alpha_1 = I
        let p = SobolevParams::new(0, 2.0, 2, 1).unwrap();
        let b = CanonicalBoundaryForm::without_kernel(&p, g, vec![CMatrix::identity(2)]).unwrap();
        let v = [Complex::new(1.0, 2.0), Complex::new(-3.0, 0.5)];
        let y = GridFunction::constant(g, Shape::Vector(2), 1, &v).unwrap();
        let by = BoundaryOperator::Canonical(b).apply(&y).unwrap();
        assert_eq!(by, v.to_vec());

        // int_0^1 y' dt with y = t^2
        let p = SobolevParams::new(0, 2.0, 1, 1).unwrap();
        let phi = GridFunction::constant(g, Shape::Matrix(1, 1), 0, &[real(1.0)]).unwrap();
        let b = CanonicalBoundaryForm::new(&p, vec![CMatrix::zeros(1, 1)], phi).unwrap();
        let y = poly(g, &[0.0, 0.0, 1.0], 1);
        let by = BoundaryOperator::Canonical(b).apply(&y).unwrap();
        assert!((by[0] - real(1.0)).norm() < 1e-10);
    }

    #[test]
    fn companion_r2_structure() {
        let g = grid(10);
        let params = SobolevParams::new(0, 2.0, 1, 2).unwrap();
        let sys = DifferentialSystem::new(
            params,
            vec![const_mat(g, 1, 0, &[3.0]), const_mat(g, 1, 0, &[5.0])],
            GridFunction::constant(g, Shape::Vector(1), 0, &[real(7.0)]).unwrap(),
        )
        .unwrap();
        let b = CanonicalBoundaryForm::without_kernel(
            &params,
            g,
            vec![CMatrix::from_real_rows(&[&[1.0], &[0.0]]), CMatrix::from_real_rows(&[&[0.0], &[1.0]])],
        )
        .unwrap();
        let prob = ProblemInstance::new(sys, BoundaryOperator::Canonical(b), vec![real(0.0), real(1.0)]).unwrap();
        let fop = companion_reduce(&prob).unwrap();
        // x1' = x2  <=>  x1' + (-1) x2 = 0 ; x2' + a0 x1 + a1 x2 = f
        assert_eq!(
            fop.atilde().at_node(0, 3),
            &[real(0.0), real(-1.0), real(3.0), real(5.0)]
        );
        assert_eq!(fop.ftilde().at_node(0, 3), &[real(0.0), real(7.0)]);
    }

    #[test]
    fn companion_r1_identity() {
        let g = grid(10);
        let params = SobolevParams::new(0, 2.0, 1, 1).unwrap();
        let a = const_mat(g, 1, 0, &[2.0]);
        let f = GridFunction::constant(g, Shape::Vector(1), 0, &[real(1.0)]).unwrap();
        let sys = DifferentialSystem::new(params, vec![a.clone()], f.clone()).unwrap();
        let b = BoundaryOperator::Canonical(CanonicalBoundaryForm::without_kernel(&params, g, vec![CMatrix::identity(1)]).unwrap());
        let prob = ProblemInstance::new(sys, b.clone(), vec![real(1.0)]).unwrap();
        let fop = companion_reduce(&prob).unwrap();
        assert_eq!(fop.atilde(), &a);
        assert_eq!(fop.ftilde(), &f);
        assert_eq!(fop.btilde().operator(), &b);
    }

    #[test]
    fn lifted_r2_n1_with_kernel_agrees() {
        // y = t^3 on [0,1], n = 1, r = 2, Phi = t
        let g = grid(200);
        let params = SobolevParams::new(1, 2.0, 1, 2).unwrap();
        let alphas = vec![
            CMatrix::from_real_rows(&[&[1.0], &[2.0]]),
            CMatrix::from_real_rows(&[&[-1.0], &[0.5]]),
            CMatrix::from_real_rows(&[&[0.25], &[3.0]]),
        ];
        let phi = GridFunction::sample_unchecked(g, Shape::Matrix(2, 1), 0, |_, t| vec![real(t), real(1.0 - t)]).unwrap();
        let op = BoundaryOperator::Canonical(CanonicalBoundaryForm::new(&params, alphas, phi).unwrap());
        let y = poly(g, &[0.0, 0.0, 0.0, 1.0], 3);
        let by = op.apply(&y).unwrap();
        let lifted = lift_boundary_form(&op, &params).unwrap();
        let x = companion_lift_solution(&y, 2).unwrap();
        let bx = lifted.apply(&x).unwrap();
        for (u, v) in by.iter().zip(&bx) {
            assert!((u - v).norm() < 1e-12);
        }
        // closed form: y''' = 6 ; int t*6 = 3 ; int (1-t)*6 = 3 ; y(0)=y'(0)=y''(0)=0
        assert!((by[0] - real(3.0)).norm() < 1e-8);
        assert!((by[1] - real(3.0)).norm() < 1e-8);
    }
}
