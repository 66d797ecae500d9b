//! Grid functions carrying explicit derivative stacks, together with the
//! quadrature, interpolation and norm machinery of the Sobolev scale
//! `W^n_p([a,b])`.
//!
//! A [`GridFunction`] stores samples of `x, x', ..., x^{(k)}` on a uniform
//! grid. Derivatives are never formed by finite differences: producers
//! (closed-form samplers, the solver) supply every layer, and the stack is
//! validated by comparing `x^{(j)}(b) - x^{(j)}(a)` with the Simpson integral
//! of `x^{(j+1)}`.

use num_complex::Complex;
use num_traits::{One, Zero};
use std::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Default relative tolerance of the stack consistency test.
pub const DEFAULT_CONSISTENCY_TOL: f64 = 1e-6;

/// Uniform grid `t_i = a + i (b - a) / N`, `N` even.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    a: T,
    b: T,
    intervals: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(a: T, b: T, intervals: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::InvalidGrid(format!("need finite a < b, got [{a}, {b}]")));
        }
        if intervals < 2 || intervals % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "grid size must be even and at least 2, got {intervals}"
            )));
        }
        Ok(Self { a, b, intervals })
    }

    #[inline]
    pub fn a(&self) -> T {
        self.a
    }

    #[inline]
    pub fn b(&self) -> T {
        self.b
    }

    #[inline]
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.intervals + 1
    }

    #[inline]
    pub fn h(&self) -> T {
        (self.b - self.a) / T::from_count(self.intervals)
    }

    #[inline]
    pub fn node(&self, i: usize) -> T {
        if i == self.intervals {
            self.b
        } else {
            self.a + T::from_count(i) * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.num_nodes()).map(|i| self.node(i)).collect()
    }

    pub fn contains(&self, t: T) -> bool {
        t >= self.a && t <= self.b
    }

    pub(crate) fn check_point(&self, t: T) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain {
                t: t.to_f64().unwrap_or(f64::NAN),
                a: self.a.to_f64().unwrap_or(f64::NAN),
                b: self.b.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    /// Lagrange interpolation stencil around `t`: first node index and
    /// weights. Four nodes (cubic) unless the grid is too small.
    pub(crate) fn stencil(&self, t: T) -> (usize, Vec<T>) {
        let n = self.intervals;
        let width = (n + 1).min(4);
        let s = (t - self.a) / self.h();
        let k = s.floor().to_usize().unwrap_or(0).min(n);
        let start = k.saturating_sub(1).min(n + 1 - width);
        // snap to a node so nodal values are reproduced exactly
        let nearest = s.round();
        if (s - nearest).abs() <= T::lit(64.0) * T::epsilon() * (T::one() + s.abs()) {
            let idx = nearest.to_usize().unwrap_or(0).min(n);
            let start = idx.min(n + 1 - width).max(idx.saturating_sub(width - 1));
            let mut w = vec![T::zero(); width];
            w[idx - start] = T::one();
            return (start, w);
        }
        let local = s - T::from_count(start);
        let w = (0..width)
            .map(|i| {
                let mut num = T::one();
                let mut den = T::one();
                for j in 0..width {
                    if j != i {
                        num *= local - T::from_count(j);
                        den *= T::from_count(i) - T::from_count(j);
                    }
                }
                num / den
            })
            .collect();
        (start, w)
    }
}

/// Conjugate exponent `q` with `1/p + 1/q = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conjugate<T> {
    Finite(T),
    Infinity,
}

/// Smoothness/integrability indices of the problem and its dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevParams<T> {
    /// Smoothness index `n >= 0`.
    pub n: usize,
    /// Integrability exponent `p` in `[1, inf)`.
    pub p: T,
    /// Number of unknown components.
    pub m: usize,
    /// Order of the differential system.
    pub r: usize,
}

impl<T: Real> SobolevParams<T> {
    pub fn new(n: usize, p: T, m: usize, r: usize) -> Result<Self> {
        if !(p.is_finite() && p >= T::one()) {
            return Err(Error::InvalidParams(format!("p must lie in [1, inf), got {p}")));
        }
        if m == 0 || r == 0 {
            return Err(Error::InvalidParams(format!("m and r must be positive, got m={m}, r={r}")));
        }
        Ok(Self { n, p, m, r })
    }

    pub fn q(&self) -> Conjugate<T> {
        if self.p == T::one() {
            Conjugate::Infinity
        } else {
            Conjugate::Finite(self.p / (self.p - T::one()))
        }
    }

    /// `1/q`, zero when `p = 1`.
    pub fn q_inv(&self) -> T {
        T::one() - T::one() / self.p
    }

    /// Dimension `rm` of the boundary data.
    pub fn rm(&self) -> usize {
        self.r * self.m
    }

    /// Highest derivative order `n + r` of a solution.
    pub fn top_order(&self) -> usize {
        self.n + self.r
    }
}

/// Value shape of a grid function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    Vector(usize),
    Matrix(usize, usize),
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::Scalar => 1,
            Shape::Vector(d) => d,
            Shape::Matrix(r, c) => r * c,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Composite Simpson rule over equally spaced samples (odd count).
pub fn simpson<T, V>(values: &[V], h: T) -> V
where
    T: Real,
    V: Copy + Zero + Add<Output = V> + Mul<T, Output = V>,
{
    let n = values.len();
    debug_assert!(n >= 3 && n % 2 == 1, "Simpson needs an even number of intervals");
    let mut odd = V::zero();
    let mut even = V::zero();
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            odd = odd + *v;
        } else {
            even = even + *v;
        }
    }
    (values[0] + values[n - 1] + odd * T::lit(4.0) + even * T::lit(2.0)) * (h / T::lit(3.0))
}

/// Running integral `F_i = int_{t_0}^{t_i} g`, fourth-order accurate at every
/// node.
///
/// Even prefixes use composite Simpson; an odd prefix adds a single interval
/// integrated with the cubic through four neighbouring samples.
pub fn cumulative_integral<T, V>(values: &[V], h: T) -> Vec<V>
where
    T: Real,
    V: Copy + Zero + Add<Output = V> + Mul<T, Output = V>,
{
    let n = values.len();
    let mut out = vec![V::zero(); n];
    if n < 2 {
        return out;
    }
    let c24 = h / T::lit(24.0);
    let panel = h / T::lit(3.0);
    let single = |i: usize| -> V {
        // integral over [t_{i-1}, t_i]
        if n < 4 {
            // trapezoid fallback on tiny grids
            return (values[i - 1] + values[i]) * (h / T::lit(2.0));
        }
        if i == 1 {
            (values[0] * T::lit(9.0) + values[1] * T::lit(19.0) + values[2] * T::lit(-5.0) + values[3])
                * c24
        } else if i + 1 < n {
            (values[i - 2] * T::lit(-1.0)
                + values[i - 1] * T::lit(13.0)
                + values[i] * T::lit(13.0)
                + values[i + 1] * T::lit(-1.0))
                * c24
        } else {
            (values[i - 3] + values[i - 2] * T::lit(-5.0) + values[i - 1] * T::lit(19.0) + values[i] * T::lit(9.0))
                * c24
        }
    };
    let mut acc = V::zero();
    let mut i = 2;
    while i < n {
        let prev = acc;
        acc = acc + (values[i - 2] + values[i - 1] * T::lit(4.0) + values[i]) * panel;
        out[i] = acc;
        out[i - 1] = prev + single(i - 1);
        i += 2;
    }
    if n % 2 == 0 {
        out[n - 1] = acc + single(n - 1);
    }
    out
}

/// Complex scalar, vector or matrix valued function on a [`Grid`] with its
/// derivatives `0..=order` sampled at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    grid: Grid<T>,
    shape: Shape,
    /// `layers[j][node * ncomp + comp]`
    layers: Vec<Vec<C<T>>>,
}

/// Sample a closed-form evaluator into a stack-consistent grid function.
///
/// `sampler(j, t)` returns the components of the `j`-th derivative at `t`
/// (row-major for matrices).
pub fn make_grid_function<T: Real>(
    grid: Grid<T>,
    shape: Shape,
    order: usize,
    sampler: impl Fn(usize, T) -> Vec<C<T>>,
) -> Result<GridFunction<T>> {
    GridFunction::sample(grid, shape, order, sampler, T::lit(DEFAULT_CONSISTENCY_TOL))
}

impl<T: Real> GridFunction<T> {
    pub fn sample(
        grid: Grid<T>,
        shape: Shape,
        order: usize,
        sampler: impl Fn(usize, T) -> Vec<C<T>>,
        tol: T,
    ) -> Result<Self> {
        let f = Self::sample_unchecked(grid, shape, order, sampler)?;
        f.check_consistency(tol)?;
        Ok(f)
    }

    /// Sample without the consistency test. Used for order-0 data (kernels)
    /// and for intermediate quantities whose stacks are consistent by
    /// construction.
    pub fn sample_unchecked(
        grid: Grid<T>,
        shape: Shape,
        order: usize,
        sampler: impl Fn(usize, T) -> Vec<C<T>>,
    ) -> Result<Self> {
        let d = shape.len();
        let nodes = grid.nodes();
        let mut layers = Vec::with_capacity(order + 1);
        for j in 0..=order {
            let mut layer = Vec::with_capacity(nodes.len() * d);
            for &t in &nodes {
                let v = sampler(j, t);
                if v.len() != d {
                    return Err(Error::Dimension(format!(
                        "sampler returned {} components for shape {:?}",
                        v.len(),
                        shape
                    )));
                }
                layer.extend(v);
            }
            layers.push(layer);
        }
        Ok(Self { grid, shape, layers })
    }

    /// Scalar convenience wrapper around [`make_grid_function`].
    pub fn scalar(grid: Grid<T>, order: usize, sampler: impl Fn(usize, T) -> C<T>) -> Result<Self> {
        make_grid_function(grid, Shape::Scalar, order, |j, t| vec![sampler(j, t)])
    }

    pub fn from_layers(grid: Grid<T>, shape: Shape, layers: Vec<Vec<C<T>>>, tol: T) -> Result<Self> {
        let f = Self::from_layers_unchecked(grid, shape, layers)?;
        f.check_consistency(tol)?;
        Ok(f)
    }

    pub fn from_layers_unchecked(grid: Grid<T>, shape: Shape, layers: Vec<Vec<C<T>>>) -> Result<Self> {
        let expected = grid.num_nodes() * shape.len();
        if layers.is_empty() {
            return Err(Error::Dimension("grid function needs at least one layer".into()));
        }
        if let Some(bad) = layers.iter().position(|l| l.len() != expected) {
            return Err(Error::Dimension(format!(
                "layer {bad} has {} samples, expected {expected}",
                layers[bad].len()
            )));
        }
        Ok(Self { grid, shape, layers })
    }

    pub fn zeros(grid: Grid<T>, shape: Shape, order: usize) -> Self {
        let len = grid.num_nodes() * shape.len();
        Self {
            grid,
            shape,
            layers: vec![vec![C::zero(); len]; order + 1],
        }
    }

    /// Constant function (all derivative layers zero).
    pub fn constant(grid: Grid<T>, shape: Shape, order: usize, value: &[C<T>]) -> Result<Self> {
        if value.len() != shape.len() {
            return Err(Error::Dimension("constant value does not match shape".into()));
        }
        let mut f = Self::zeros(grid, shape, order);
        for chunk in f.layers[0].chunks_mut(shape.len()) {
            chunk.copy_from_slice(value);
        }
        Ok(f)
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn shape(&self) -> Shape {
        self.shape
    }

    #[inline]
    pub fn ncomp(&self) -> usize {
        self.shape.len()
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layer(&self, j: usize) -> &[C<T>] {
        &self.layers[j]
    }

    pub fn layers(&self) -> &[Vec<C<T>>] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Vec<C<T>>> {
        self.layers
    }

    /// Components of layer `j` at node `i`.
    #[inline]
    pub fn at_node(&self, j: usize, i: usize) -> &[C<T>] {
        let d = self.ncomp();
        &self.layers[j][i * d..(i + 1) * d]
    }

    fn component_series(&self, j: usize, c: usize) -> impl Iterator<Item = C<T>> + '_ {
        let d = self.ncomp();
        self.layers[j].iter().skip(c).step_by(d).copied()
    }

    fn check_order(&self, j: usize) -> Result<()> {
        if j > self.order() {
            Err(Error::Order {
                requested: j,
                available: self.order(),
            })
        } else {
            Ok(())
        }
    }

    /// Largest normalised residual
    /// `|x^{(j)}(b) - x^{(j)}(a) - Simpson(x^{(j+1)})| / (1 + max|x^{(j)}|, max|x^{(j+1)}|)`
    /// over components, for every `j < order`.
    pub fn consistency_residuals(&self) -> Vec<T> {
        let h = self.grid.h();
        let last = self.grid.intervals();
        (0..self.order())
            .map(|j| {
                (0..self.ncomp())
                    .map(|c| {
                        let lower: Vec<C<T>> = self.component_series(j, c).collect();
                        let upper: Vec<C<T>> = self.component_series(j + 1, c).collect();
                        let scale = lower
                            .iter()
                            .chain(upper.iter())
                            .fold(T::zero(), |m, z| m.max(z.norm()));
                        let jump = lower[last] - lower[0];
                        (jump - simpson(&upper, h)).norm() / (T::one() + scale)
                    })
                    .fold(T::zero(), T::max)
            })
            .collect()
    }

    pub fn check_consistency(&self, tol: T) -> Result<()> {
        for (layer, res) in self.consistency_residuals().into_iter().enumerate() {
            if !(res <= tol) {
                return Err(Error::InconsistentStack {
                    layer,
                    residual: res.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }

    /// Value of derivative layer `j` at `t`, by four-point Lagrange
    /// interpolation (one-sided near the endpoints); exact at nodes.
    pub fn eval_at(&self, j: usize, t: T) -> Result<Vec<C<T>>> {
        self.check_order(j)?;
        self.grid.check_point(t)?;
        let (start, w) = self.grid.stencil(t);
        // weights sum to one: expand around the first stencil node so that
        // constants are reproduced without rounding
        let base = self.at_node(j, start);
        let mut out = base.to_vec();
        for (k, wk) in w.iter().enumerate().skip(1) {
            if wk.is_zero() {
                continue;
            }
            for ((o, v), b) in out.iter_mut().zip(self.at_node(j, start + k)).zip(base) {
                *o += (*v - *b) * *wk;
            }
        }
        if w[0].is_zero() && w.iter().skip(1).all(|x| x.is_zero() || *x == T::one()) {
            // snapped to a node other than the first
            if let Some(k) = w.iter().position(|x| *x == T::one()) {
                return Ok(self.at_node(j, start + k).to_vec());
            }
        }
        Ok(out)
    }

    /// `L_p` norm of layer `j`; vector and matrix shapes sum the component
    /// norms.
    pub fn lp_norm(&self, j: usize, p: T) -> Result<T> {
        self.check_order(j)?;
        check_p(p)?;
        let h = self.grid.h();
        Ok((0..self.ncomp())
            .map(|c| {
                let pw: Vec<T> = self.component_series(j, c).map(|z| z.norm().powf(p)).collect();
                simpson(&pw, h).powf(T::one() / p)
            })
            .fold(T::zero(), |a, b| a + b))
    }

    /// `W^n_p` norm `(sum_{j<=n} int |x^{(j)}|^p)^{1/p}`, component-summed.
    pub fn sobolev_norm(&self, n: usize, p: T) -> Result<T> {
        if n > self.order() {
            return Err(Error::InsufficientSmoothness {
                needed: n,
                available: self.order(),
            });
        }
        check_p(p)?;
        let h = self.grid.h();
        Ok((0..self.ncomp())
            .map(|c| {
                let total = (0..=n).fold(T::zero(), |acc, j| {
                    let pw: Vec<T> = self.component_series(j, c).map(|z| z.norm().powf(p)).collect();
                    acc + simpson(&pw, h)
                });
                total.powf(T::one() / p)
            })
            .fold(T::zero(), |a, b| a + b))
    }

    /// Nodal supremum of `|x^{(j)}|`, component-summed.
    pub fn sup_norm(&self, j: usize) -> Result<T> {
        self.check_order(j)?;
        Ok((0..self.ncomp())
            .map(|c| self.component_series(j, c).fold(T::zero(), |m, z| m.max(z.norm())))
            .fold(T::zero(), |a, b| a + b))
    }

    /// Discrete Hölder seminorm of layer `j` with exponent `theta = 1/q`.
    ///
    /// Maximum over node pairs of `|x(t) - x(s)| / |t - s|^theta`. For
    /// `theta = 1` the sup of the next layer is included when present (the
    /// limit of difference quotients of merging pairs). For `theta = 0` the
    /// value is `2 sup|x|`, a diameter bound used as a diagnostic.
    pub fn holder_seminorm(&self, j: usize, theta: T) -> Result<T> {
        self.check_order(j)?;
        if !(theta >= T::zero() && theta <= T::one()) {
            return Err(Error::InvalidParams(format!("Hölder exponent must lie in [0, 1], got {theta}")));
        }
        if theta.is_zero() {
            return Ok(T::lit(2.0) * self.sup_norm(j)?);
        }
        let nodes = self.grid.nodes();
        let mut total = T::zero();
        for c in 0..self.ncomp() {
            let xs: Vec<C<T>> = self.component_series(j, c).collect();
            let mut best = T::zero();
            for i in 0..xs.len() {
                for k in i + 1..xs.len() {
                    let q = (xs[k] - xs[i]).norm() / (nodes[k] - nodes[i]).powf(theta);
                    if q > best {
                        best = q;
                    }
                }
            }
            if theta == T::one() && j < self.order() {
                best = best.max(self.component_series(j + 1, c).fold(T::zero(), |m, z| m.max(z.norm())));
            }
            total += best;
        }
        Ok(total)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.shape != other.shape {
            return Err(Error::Dimension(format!(
                "shape {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    /// `alpha * self + beta * other`, truncated to the common order.
    pub fn linear_combination(&self, alpha: C<T>, other: &Self, beta: C<T>) -> Result<Self> {
        self.check_compatible(other)?;
        let order = self.order().min(other.order());
        let layers = (0..=order)
            .map(|j| {
                self.layers[j]
                    .iter()
                    .zip(&other.layers[j])
                    .map(|(x, y)| *x * alpha + *y * beta)
                    .collect()
            })
            .collect();
        Ok(Self {
            grid: self.grid,
            shape: self.shape,
            layers,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.linear_combination(C::one(), other, C::one())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.linear_combination(C::one(), other, -C::<T>::one())
    }

    pub fn scale(&self, lambda: C<T>) -> Self {
        Self {
            grid: self.grid,
            shape: self.shape,
            layers: self
                .layers
                .iter()
                .map(|l| l.iter().map(|z| *z * lambda).collect())
                .collect(),
        }
    }

    /// Keep layers `0..=order`.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        self.check_order(order)?;
        Ok(Self {
            grid: self.grid,
            shape: self.shape,
            layers: self.layers[..=order].to_vec(),
        })
    }

    /// New function made of the listed components, reinterpreted as `shape`.
    pub fn select(&self, components: &[usize], shape: Shape) -> Result<Self> {
        if shape.len() != components.len() {
            return Err(Error::Dimension("selection does not match target shape".into()));
        }
        if let Some(&bad) = components.iter().find(|&&c| c >= self.ncomp()) {
            return Err(Error::Dimension(format!("component {bad} out of range")));
        }
        let n = self.grid.num_nodes();
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let mut out = Vec::with_capacity(n * components.len());
                for i in 0..n {
                    let row = &l[i * self.ncomp()..(i + 1) * self.ncomp()];
                    out.extend(components.iter().map(|&c| row[c]));
                }
                out
            })
            .collect();
        Ok(Self {
            grid: self.grid,
            shape,
            layers,
        })
    }
}

fn check_p<T: Real>(p: T) -> Result<()> {
    if p.is_finite() && p >= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("p must lie in [1, inf), got {p}")))
    }
}

/// Helper for samplers: real value as a complex scalar.
#[inline]
pub fn real<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}
