//! Interval enclosures of expressions over a variable box.
//!
//! Plain (non outward-rounded) interval arithmetic. Products treat `0 * ±inf`
//! as 0, which is the limit that matters for bounded boxes.

use std::collections::BTreeMap;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::eval::is_integral;
use super::expr::{Expr, Func};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan(), "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(v: T) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn entire() -> Self {
        Interval { lo: T::neg_infinity(), hi: T::infinity() }
    }

    pub fn contains(&self, v: T) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn hull(self, o: Self) -> Self {
        Interval { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    fn mul_scalar(a: T, b: T) -> T {
        if a == T::zero() || b == T::zero() {
            T::zero()
        } else {
            a * b
        }
    }

    pub fn recip(self) -> Self {
        if self.contains(T::zero()) {
            return Self::entire();
        }
        Interval { lo: T::one() / self.hi, hi: T::one() / self.lo }
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::point(T::one());
        }
        if n < 0 {
            return self.powi(-n).recip();
        }
        let (a, b) = (self.lo.powi(n), self.hi.powi(n));
        if n % 2 == 1 || self.lo >= T::zero() {
            Interval { lo: a, hi: b }
        } else if self.hi <= T::zero() {
            Interval { lo: b, hi: a }
        } else {
            Interval { lo: T::zero(), hi: a.max(b) }
        }
    }

    /// Range of `sin` (offset pi/2) or `cos` (offset 0): `f` peaks at
    /// `offset + 2k*pi` and bottoms out at `offset + (2k+1)*pi`.
    fn trig(self, f: fn(T) -> T, offset: f64) -> Self {
        let two_pi = T::lit(std::f64::consts::TAU);
        if !self.is_finite() || self.hi - self.lo >= two_pi {
            return Interval { lo: -T::one(), hi: T::one() };
        }
        let (mut lo, mut hi) = {
            let (a, b) = (f(self.lo), f(self.hi));
            (a.min(b), a.max(b))
        };
        let half_pi = T::lit(offset);
        let pi = T::lit(std::f64::consts::PI);
        // critical points pi/2 + k*pi inside the interval
        let mut k = ((self.lo - half_pi) / pi).ceil();
        loop {
            let c = half_pi + k * pi;
            if c > self.hi {
                break;
            }
            if (k.to_i64().unwrap_or(0)).rem_euclid(2) == 0 {
                hi = T::one();
            } else {
                lo = -T::one();
            }
            k = k + T::one();
        }
        Interval { lo, hi }
    }
}

impl<T: Scalar> Add for Interval<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Interval { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }
}

impl<T: Scalar> Sub for Interval<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Interval { lo: self.lo - o.hi, hi: self.hi - o.lo }
    }
}

impl<T: Scalar> Neg for Interval<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl<T: Scalar> Div for Interval<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        if o.contains(T::zero()) {
            return Self::entire();
        }
        self * o.recip()
    }
}

impl<T: Scalar> Mul for Interval<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let p = [
            Self::mul_scalar(self.lo, o.lo),
            Self::mul_scalar(self.lo, o.hi),
            Self::mul_scalar(self.hi, o.lo),
            Self::mul_scalar(self.hi, o.hi),
        ];
        let lo = p.iter().copied().fold(T::infinity(), T::min);
        let hi = p.iter().copied().fold(T::neg_infinity(), T::max);
        Interval { lo, hi }
    }
}

/// Encloses the range of `e` over the box `bounds`.
pub fn interval_bounds<T: Scalar>(
    e: &Expr,
    bounds: &BTreeMap<String, Interval<T>>,
) -> Result<Interval<T>> {
    Ok(match e {
        Expr::Const(c) => Interval::point(T::lit(*c)),
        Expr::Var(v) => *bounds
            .get(v)
            .ok_or_else(|| Error::Domain(format!("no bounds for `{v}`")))?,
        Expr::Neg(a) => -interval_bounds(a, bounds)?,
        Expr::Add(a, b) => interval_bounds(a, bounds)? + interval_bounds(b, bounds)?,
        Expr::Sub(a, b) => interval_bounds(a, bounds)? - interval_bounds(b, bounds)?,
        Expr::Mul(a, b) => interval_bounds(a, bounds)? * interval_bounds(b, bounds)?,
        Expr::Div(a, b) => interval_bounds(a, bounds)? / interval_bounds(b, bounds)?,
        Expr::Pow(a, p) => {
            let x = interval_bounds(a, bounds)?;
            if is_integral(*p) {
                x.powi(*p as i32)
            } else {
                if x.hi < T::zero() {
                    return Err(Error::Domain(format!("fractional power of negative range in `{e}`")));
                }
                let x = Interval { lo: x.lo.max(T::zero()), hi: x.hi };
                let p = T::lit(*p);
                let (a, b) = (x.lo.powf(p), x.hi.powf(p));
                Interval { lo: a.min(b), hi: a.max(b) }
            }
        }
        Expr::Call(f, a) => {
            let x = interval_bounds(a, bounds)?;
            match f {
                Func::Exp => Interval { lo: x.lo.exp(), hi: x.hi.exp() },
                Func::Log => {
                    if x.hi <= T::zero() {
                        return Err(Error::Domain(format!("log of nonpositive range in `{e}`")));
                    }
                    let lo = if x.lo <= T::zero() { T::neg_infinity() } else { x.lo.ln() };
                    Interval { lo, hi: x.hi.ln() }
                }
                Func::Sqrt => {
                    if x.hi < T::zero() {
                        return Err(Error::Domain(format!("sqrt of negative range in `{e}`")));
                    }
                    Interval { lo: x.lo.max(T::zero()).sqrt(), hi: x.hi.sqrt() }
                }
                Func::Sin => x.trig(T::sin, std::f64::consts::FRAC_PI_2),
                Func::Cos => x.trig(T::cos, 0.0),
                Func::Abs => {
                    if x.lo >= T::zero() {
                        x
                    } else if x.hi <= T::zero() {
                        -x
                    } else {
                        Interval { lo: T::zero(), hi: (-x.lo).max(x.hi) }
                    }
                }
            }
        }
    })
}
