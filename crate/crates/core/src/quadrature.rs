//! Globally adaptive Gauss–Legendre quadrature in one and two dimensions.
//!
//! Each panel is integrated with a fixed-order Gauss–Legendre rule and its
//! error is estimated by comparing against the sum over its two halves. The
//! panel with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol * |I|)`.
//!
//! Two-dimensional integrals over `{a <= x <= b, lo(x) <= y <= hi(x)}` are
//! evaluated as nested one-dimensional integrals (outer in x, inner in y).

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerances for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Upper bound on panel bisections per one-dimensional integral.
    pub max_subdivisions: usize,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::of(1e-6),
            abs_tol: T::of(1e-14),
            max_subdivisions: 2000,
        }
    }
}

impl<T: Real> QuadratureConfig<T> {
    pub fn new(rel_tol: T, abs_tol: T, max_subdivisions: usize) -> Result<Self> {
        let cfg = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero()) {
            return Err(Error::invalid("rel_tol", "must be > 0"));
        }
        if !(self.abs_tol > T::zero()) {
            return Err(Error::invalid("abs_tol", "must be > 0"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions", "must be >= 1"));
        }
        Ok(())
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
    pub subdivisions: usize,
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds the `n`-point rule by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self {
            nodes: nodes.into_iter().map(T::of).collect(),
            weights: weights.into_iter().map(T::of).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Fixed-rule integral of `f` over [a, b].
    pub fn integrate<F: FnMut(T) -> T>(&self, f: &mut F, a: T, b: T) -> T {
        let half = (b - a) * T::of(0.5);
        let mid = (a + b) * T::of(0.5);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

struct Panel<T> {
    a: T,
    b: T,
    left: T,
    right: T,
    error: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

/// Default panel rule order.
pub const PANEL_ORDER: usize = 10;

/// Adaptive integrator holding a reusable Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct Integrator<T> {
    rule: GaussLegendre<T>,
    pub config: QuadratureConfig<T>,
}

impl<T: Real> Integrator<T> {
    pub fn new(config: QuadratureConfig<T>) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            rule: GaussLegendre::new(PANEL_ORDER),
            config,
        })
    }

    fn panel<F: FnMut(T) -> T>(&self, f: &mut F, a: T, b: T, whole: T) -> Panel<T> {
        let m = (a + b) * T::of(0.5);
        let left = self.rule.integrate(f, a, m);
        let right = self.rule.integrate(f, m, b);
        Panel {
            a,
            b,
            left,
            right,
            error: (whole - (left + right)).abs(),
        }
    }

    /// Integrates `f` over [a, b] with the configured tolerances.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T) -> Result<Estimate<T>> {
        self.integrate_with(&mut f, a, b, self.config.rel_tol, self.config.abs_tol)
    }

    fn integrate_with<F: FnMut(T) -> T>(
        &self,
        f: &mut F,
        a: T,
        b: T,
        rel_tol: T,
        abs_tol: T,
    ) -> Result<Estimate<T>> {
        if a == b {
            return Ok(Estimate {
                value: T::zero(),
                error: T::zero(),
                subdivisions: 0,
            });
        }
        let whole = self.rule.integrate(f, a, b);
        let mut heap = BinaryHeap::new();
        heap.push(self.panel(f, a, b, whole));
        let mut subdivisions = 0;
        loop {
            let (value, error) = heap.iter().fold((T::zero(), T::zero()), |(v, e), p| {
                (v + p.left + p.right, e + p.error)
            });
            if !value.is_finite() || !error.is_finite() {
                return Err(Error::Convergence {
                    estimate: value.f64(),
                    error_bound: error.f64(),
                });
            }
            if error <= abs_tol.max(rel_tol * value.abs()) {
                return Ok(Estimate {
                    value,
                    error,
                    subdivisions,
                });
            }
            if subdivisions >= self.config.max_subdivisions {
                return Err(Error::Convergence {
                    estimate: value.f64(),
                    error_bound: error.f64(),
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let m = (worst.a + worst.b) * T::of(0.5);
            if !(m > worst.a && m < worst.b) {
                // interval exhausted at machine precision; accept as-is
                heap.push(Panel {
                    error: T::zero(),
                    ..worst
                });
                continue;
            }
            heap.push(self.panel(f, worst.a, m, worst.left));
            heap.push(self.panel(f, m, worst.b, worst.right));
            subdivisions += 1;
        }
    }

    /// Integrates `f(x, y)` over `a <= x <= b`, `lo(x) <= y <= hi(x)`.
    ///
    /// The inner integrals run at a tenth of the outer relative tolerance.
    /// The reported error is the outer estimate plus the integrated inner
    /// error bounds.
    pub fn integrate_2d<F, L, H>(&self, f: F, a: T, b: T, lo: L, hi: H) -> Result<Estimate<T>>
    where
        F: Fn(T, T) -> T,
        L: Fn(T) -> T,
        H: Fn(T) -> T,
    {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let inner_err = RefCell::new(T::zero());
        let inner_rel = self.config.rel_tol * T::of(0.1);
        let inner_abs = self.config.abs_tol / (b - a).abs().max(T::one());
        let mut outer = |x: T| -> T {
            if failure.borrow().is_some() {
                return T::zero();
            }
            let mut g = |y: T| f(x, y);
            match self.integrate_with(&mut g, lo(x), hi(x), inner_rel, inner_abs) {
                Ok(est) => {
                    let mut e = inner_err.borrow_mut();
                    *e = e.max(est.error);
                    est.value
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    T::zero()
                }
            }
        };
        let est = self.integrate_with(
            &mut outer,
            a,
            b,
            self.config.rel_tol,
            self.config.abs_tol,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let mut est = est?;
        est.error = est.error + inner_err.into_inner() * (b - a).abs();
        Ok(est)
    }
}
