//! Scalar abstraction for forward-mode automatic differentiation.
//!
//! Fields are written once as functions generic over [`Real`] and evaluated
//! at three levels: `f64` (values), [`D1`] (first derivatives) and [`D2`]
//! (second derivatives, as nested duals). Seeding helpers build the dual
//! inputs for jacobians and hessians.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar field usable in smooth expressions. Implemented by `f64` and by
/// [`Dual<T>`] for any implementing `T`, which yields arbitrarily nested
/// forward-mode derivatives.
pub trait Real:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Lift a constant into the scalar type (derivative parts zero).
    fn lift(c: f64) -> Self;
    /// Collapse to the underlying value, dropping derivative parts.
    fn val(self) -> f64;

    fn zero() -> Self {
        Self::lift(0.0)
    }
    fn one() -> Self {
        Self::lift(1.0)
    }

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn abs(self) -> Self;
}

impl Real for f64 {
    fn lift(c: f64) -> Self {
        c
    }
    fn val(self) -> f64 {
        self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

/// Dual number `re + eps * du` with nilpotent `eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T: Real> {
    pub re: T,
    pub du: T,
}

/// First-order dual over `f64`.
pub type D1 = Dual<f64>;
/// Nested dual carrying second-order information.
pub type D2 = Dual<Dual<f64>>;

impl<T: Real> Dual<T> {
    pub fn new(re: T, du: T) -> Self {
        Self { re, du }
    }
    /// Constant (derivative zero).
    pub fn constant(re: T) -> Self {
        Self {
            re,
            du: T::zero(),
        }
    }
    /// Variable seeded with unit derivative.
    pub fn variable(re: T) -> Self {
        Self { re, du: T::one() }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.du + o.du)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.du - o.du)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.du * o.re + self.re * o.du)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = T::one() / o.re;
        Self::new(
            self.re * inv,
            (self.du * o.re - self.re * o.du) * inv * inv,
        )
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.du)
    }
}

impl<T: Real> Real for Dual<T> {
    fn lift(c: f64) -> Self {
        Self::constant(T::lift(c))
    }
    fn val(self) -> f64 {
        self.re.val()
    }
    fn sin(self) -> Self {
        Self::new(self.re.sin(), self.du * self.re.cos())
    }
    fn cos(self) -> Self {
        Self::new(self.re.cos(), -(self.du * self.re.sin()))
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Self::new(e, self.du * e)
    }
    fn ln(self) -> Self {
        Self::new(self.re.ln(), self.du / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Self::new(s, self.du / (T::lift(2.0) * s))
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        Self::new(
            self.re.powi(n),
            self.du * T::lift(n as f64) * self.re.powi(n - 1),
        )
    }
    fn abs(self) -> Self {
        if self.re.val() < 0.0 {
            -self
        } else {
            self
        }
    }
}

/// Inputs for one first-derivative column: `x` with coordinate `c` seeded.
pub fn seed_d1(x: &[f64], c: usize) -> Vec<D1> {
    x.iter()
        .enumerate()
        .map(|(k, &v)| D1::new(v, if k == c { 1.0 } else { 0.0 }))
        .collect()
}

/// Inputs for one second-derivative entry `d2/dx_a dx_b`: outer dual seeds
/// coordinate `a`, inner dual seeds coordinate `b`. The `.du.du` part of an
/// evaluated expression is the mixed second derivative.
pub fn seed_d2(x: &[f64], a: usize, b: usize) -> Vec<D2> {
    x.iter()
        .enumerate()
        .map(|(k, &v)| {
            D2::new(
                D1::new(v, if k == b { 1.0 } else { 0.0 }),
                D1::new(if k == a { 1.0 } else { 0.0 }, 0.0),
            )
        })
        .collect()
}

/// Lift already-dual inputs into the next level with coordinate `c` seeded in
/// the outer slot. Used to differentiate composite expressions while keeping
/// the caller's own dual context intact in the inner slot.
pub fn seed_outer(x: &[D1], c: usize) -> Vec<D2> {
    x.iter()
        .enumerate()
        .map(|(k, &v)| {
            D2::new(v, D1::new(if k == c { 1.0 } else { 0.0 }, 0.0))
        })
        .collect()
}
