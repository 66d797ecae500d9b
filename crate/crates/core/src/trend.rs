//! Finite-sample surrogates for limits along a decreasing parameter schedule.
//!
//! A limit `s(eps) -> 0` cannot be observed on finitely many samples; these
//! tests classify a sequence `s_0, ..., s_K` (ordered by decreasing `eps`)
//! as evidence for or against convergence. Verdicts are evidence, never a
//! proof.

use crate::scalar::Real;

/// Outcome of a finite-sample check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Conjunction: any fail fails, all pass passes, otherwise inconclusive.
    pub fn all(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut any_inconclusive = false;
        for v in verdicts {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Inconclusive => any_inconclusive = true,
                Verdict::Pass => {}
            }
        }
        if any_inconclusive {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn is_pass(&self) -> bool {
        *self == Verdict::Pass
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Labelled sequence over an `eps` schedule with its verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<T> {
    pub label: String,
    pub values: Vec<T>,
    pub verdict: Verdict,
}

/// Thresholds of the convergence and boundedness tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendConfig<T> {
    /// Final value below which a sequence counts as converged.
    pub tol: T,
    /// Required overall decrease `first / last` for a pass.
    pub decrease_factor: T,
    /// Growth `last / first` that counts as divergence.
    pub growth_factor: T,
    /// Boundedness: tail maximum must stay within this multiple of the
    /// median.
    pub bounded_factor: T,
}

impl<T: Real> Default for TrendConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-2),
            decrease_factor: T::lit(2.0),
            growth_factor: T::lit(10.0),
            bounded_factor: T::lit(2.0),
        }
    }
}

impl<T: Real> TrendConfig<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    /// Classify `values -> 0`.
    ///
    /// * pass: last value `<= tol`, and either every value is `<= tol` or the
    ///   sequence dropped by `decrease_factor` overall;
    /// * fail: non-finite values, growth by `growth_factor`, or stagnation
    ///   (the second half stays above `tol` and never drops below
    ///   `first / decrease_factor`);
    /// * inconclusive otherwise.
    pub fn converges_to_zero(&self, values: &[T]) -> Verdict {
        let (Some(&first), Some(&last)) = (values.first(), values.last()) else {
            return Verdict::Inconclusive;
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Verdict::Fail;
        }
        let max = values.iter().copied().fold(T::zero(), T::max);
        if last <= self.tol && (max <= self.tol || first >= self.decrease_factor * last) {
            return Verdict::Pass;
        }
        if last > self.tol && last > self.growth_factor * first {
            return Verdict::Fail;
        }
        let tail = &values[values.len() / 2..];
        let tail_min = tail.iter().copied().fold(T::infinity(), T::min);
        let tail_max = tail.iter().copied().fold(T::zero(), T::max);
        if tail_min > self.tol && tail_max >= first / self.decrease_factor {
            return Verdict::Fail;
        }
        Verdict::Inconclusive
    }

    /// Classify `values = O(1)`: the maximum over the second half of the
    /// schedule must not exceed `bounded_factor` times the median of the
    /// whole sequence. Decreasing sequences are bounded; sequences that keep
    /// growing as `eps -> 0` are not.
    pub fn bounded(&self, values: &[T]) -> Verdict {
        if values.is_empty() {
            return Verdict::Inconclusive;
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Verdict::Fail;
        }
        let med = median(values);
        let tail_max = values[values.len() / 2..].iter().copied().fold(T::zero(), T::max);
        if tail_max <= self.bounded_factor * med || tail_max <= self.tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

pub fn median<T: Real>(values: &[T]) -> T {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n == 0 {
        return T::nan();
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

/// Least-squares slope of `log y` against `log x` over pairs with positive
/// finite entries. `None` with fewer than two usable points.
pub fn loglog_slope<T: Real>(x: &[T], y: &[T]) -> Option<T> {
    let pts: Vec<(T, T)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > T::zero() && **b > T::zero() && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = T::from_count(pts.len());
    let mx = pts.iter().fold(T::zero(), |s, p| s + p.0) / n;
    let my = pts.iter().fold(T::zero(), |s, p| s + p.1) / n;
    let sxx = pts.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.0 - mx));
    let sxy = pts.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.1 - my));
    if sxx <= T::zero() {
        return None;
    }
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule() -> Vec<f64> {
        (0..=10).map(|k| 0.1 * 0.5f64.powi(k)).collect()
    }

    #[test]
    fn zeros_pass() {
        let cfg = TrendConfig::<f64>::default();
        assert_eq!(cfg.converges_to_zero(&[0.0; 11]), Verdict::Pass);
    }

    #[test]
    fn linear_decay_passes() {
        let cfg = TrendConfig::<f64>::default();
        let v: Vec<f64> = schedule().iter().map(|e| 0.8 * e).collect();
        assert_eq!(cfg.converges_to_zero(&v), Verdict::Pass);
    }

    #[test]
    fn constant_fails() {
        let cfg = TrendConfig::<f64>::default();
        assert_eq!(cfg.converges_to_zero(&[1.0; 11]), Verdict::Fail);
    }

    #[test]
    fn growth_fails() {
        let cfg = TrendConfig::<f64>::default();
        let v: Vec<f64> = schedule().iter().map(|e| e.powf(-0.5)).collect();
        assert_eq!(cfg.converges_to_zero(&v), Verdict::Fail);
    }

    #[test]
    fn slow_decay_above_tol_is_inconclusive() {
        let cfg = TrendConfig::with_tol(1e-6);
        let v: Vec<f64> = schedule().iter().map(|e| e.powf(0.5)).collect();
        assert_eq!(cfg.converges_to_zero(&v), Verdict::Inconclusive);
    }

    #[test]
    fn boundedness() {
        let cfg = TrendConfig::<f64>::default();
        let dec: Vec<f64> = schedule().iter().map(|e| e.powf(0.25)).collect();
        assert_eq!(cfg.bounded(&dec), Verdict::Pass);
        let flat = vec![0.7; 11];
        assert_eq!(cfg.bounded(&flat), Verdict::Pass);
        let grow: Vec<f64> = schedule().iter().map(|e| e.powf(-0.5)).collect();
        assert_eq!(cfg.bounded(&grow), Verdict::Fail);
    }

    #[test]
    fn conjunction() {
        use Verdict::*;
        assert_eq!(Verdict::all([Pass, Pass]), Pass);
        assert_eq!(Verdict::all([Pass, Inconclusive]), Inconclusive);
        assert_eq!(Verdict::all([Inconclusive, Fail]), Fail);
        assert_eq!(Verdict::all([]), Pass);
    }

    #[test]
    fn slopes() {
        let x = schedule();
        let y: Vec<f64> = x.iter().map(|e| 3.0 * e * e).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&x[..1], &y[..1]).is_none());
    }
}
