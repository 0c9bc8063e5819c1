//! A nonconvex objective satisfying the Polyak-Lojasiewicz inequality.

use std::fmt;
use std::sync::Arc;

use super::quadratic::Objective;
use crate::scalar::Real;

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// One-dimensional objective with closed-form value and derivative.
#[derive(Clone)]
pub struct PLInstance<T> {
    value: ScalarFn<T>,
    derivative: ScalarFn<T>,
    inf: T,
    mu: T,
    smoothness: T,
}

impl<T: Real> fmt::Debug for PLInstance<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PLInstance")
            .field("inf", &self.inf)
            .field("mu", &self.mu)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

/// Worst point of a grid check of `f - inf f <= f'^2 / (2 mu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlGridCheck<T> {
    pub points: usize,
    /// Largest `(f - inf f) - f'^2 / (2 mu)` seen; nonpositive when the inequality holds.
    pub worst_gap: T,
    pub worst_at: T,
}

impl<T: Real> PlGridCheck<T> {
    pub fn holds(&self) -> bool {
        self.worst_gap <= T::zero()
    }
}

impl<T: Real> PLInstance<T> {
    pub fn new<F, G>(value: F, derivative: G, inf: T, mu: T, smoothness: T) -> Self
    where
        F: Fn(T) -> T + Send + Sync + 'static,
        G: Fn(T) -> T + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            inf,
            mu,
            smoothness,
        }
    }

    pub fn f(&self, x: T) -> T {
        (self.value)(x)
    }

    pub fn df(&self, x: T) -> T {
        (self.derivative)(x)
    }

    pub fn inf(&self) -> T {
        self.inf
    }

    /// Evaluates the PL inequality on `lo, lo + step, ..., hi`.
    pub fn check_grid(&self, lo: T, hi: T, step: T) -> PlGridCheck<T> {
        let points = ((hi - lo) / step).round().to_usize().unwrap_or(0) + 1;
        let two_mu = T::lit(2.0) * self.mu;
        let mut worst = PlGridCheck {
            points,
            worst_gap: T::neg_infinity(),
            worst_at: lo,
        };
        for i in 0..points {
            let x = lo + T::count(i) * step;
            let d = self.df(x);
            let gap = (self.f(x) - self.inf) - d * d / two_mu;
            if gap > worst.worst_gap {
                worst.worst_gap = gap;
                worst.worst_at = x;
            }
        }
        worst
    }
}

impl<T: Real> Objective<T> for PLInstance<T> {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[T]) -> T {
        self.f(x[0])
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        vec![self.df(x[0])]
    }

    fn min_value(&self) -> T {
        self.inf
    }

    fn mu(&self) -> T {
        self.mu
    }

    fn smoothness(&self) -> T {
        self.smoothness
    }
}

/// `f(x) = x^2 + 3 sin^2(x)`: nonconvex, `1/32`-PL and `8`-smooth, `inf f = f(0) = 0`.
pub fn pl_example<T: Real>() -> PLInstance<T> {
    let three = T::lit(3.0);
    PLInstance::new(
        move |x: T| x * x + three * x.sin() * x.sin(),
        move |x: T| T::lit(2.0) * x + three * (T::lit(2.0) * x).sin(),
        T::zero(),
        T::lit(1.0 / 32.0),
        T::lit(8.0),
    )
}
