//! Polynomials in `t` with non-negative integer coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `sum_i coeffs[i] * t^i`, trailing zero coefficients trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<u64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::monomial(1, 0)
    }

    pub fn monomial(coeff: u64, degree: usize) -> Self {
        if coeff == 0 {
            return Poly::zero();
        }
        let mut coeffs = vec![0; degree + 1];
        coeffs[degree] = coeff;
        Poly { coeffs }
    }

    pub fn from_coeffs(mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Value at `t = 1`, the number of weighted terms.
    pub fn coeff_sum(&self) -> u64 {
        self.coeffs.iter().sum()
    }

    /// Multiply by `t^e`.
    pub fn shift(&self, e: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![0; e];
        coeffs.extend_from_slice(&self.coeffs);
        Poly { coeffs }
    }

    /// Coefficient-wise sum; errors if a coefficient overflows `u64`.
    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(len);
        for i in 0..len {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            coeffs.push(a.checked_add(b).ok_or(Error::Resource {
                what: "polynomial coefficient bits",
                value: 65,
                limit: 64,
            })?);
        }
        Ok(Poly::from_coeffs(coeffs))
    }

    /// Adds `coeff * t^degree` in place.
    pub fn add_term(&mut self, coeff: u64, degree: usize) {
        if coeff == 0 {
            return;
        }
        if self.coeffs.len() <= degree {
            self.coeffs.resize(degree + 1, 0);
        }
        self.coeffs[degree] += coeff;
    }

    /// Horner evaluation in `f64`.
    pub fn eval_f64(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * t + c as f64)
    }

    pub fn eval_rational(&self, t: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, &c| {
            acc * t + BigRational::from_integer(BigInt::from(c))
        })
    }

    /// Exact evaluation rounded to the nearest `f64`.
    pub fn eval_rational_f64(&self, t: &BigRational) -> f64 {
        self.eval_rational(t).to_f64().unwrap_or(f64::NAN)
    }

    /// True when every odd power has zero coefficient.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|&c| c == 0)
    }
}

impl fmt::Display for Poly {
    /// Ascending powers: `1+2t^2+t^4`; the zero polynomial prints as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (deg, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (deg, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "t")?,
                (1, c) => write!(f, "{c}t")?,
                (d, 1) => write!(f, "t^{d}")?,
                (d, c) => write!(f, "{c}t^{d}")?,
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Poly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s == "0" {
            return Ok(Poly::zero());
        }
        let mut p = Poly::zero();
        for term in s.split('+') {
            let bad = || Error::Parse(format!("bad polynomial term {term:?}"));
            let (coeff, degree) = match term.find('t') {
                None => (term.parse::<u64>().map_err(|_| bad())?, 0),
                Some(pos) => {
                    let c = if pos == 0 {
                        1
                    } else {
                        term[..pos].parse::<u64>().map_err(|_| bad())?
                    };
                    let rest = &term[pos + 1..];
                    let d = if rest.is_empty() {
                        1
                    } else {
                        let e = rest.strip_prefix('^').ok_or_else(bad)?;
                        let e = e.trim_start_matches('{').trim_end_matches('}');
                        e.parse::<usize>().map_err(|_| bad())?
                    };
                    (c, d)
                }
            };
            p.add_term(coeff, degree);
        }
        Ok(p)
    }
}

/// Ring operations the normalization recursion needs.
pub trait WeightRing: Clone + Send + Sync {
    type Elem: Clone + Send + Sync + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    /// `x * t^e`.
    fn mul_t_pow(&self, x: &Self::Elem, e: usize) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn is_zero(&self, x: &Self::Elem) -> bool;
}

/// Real arithmetic at a fixed `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloatRing {
    pub t: f64,
}

impl WeightRing for FloatRing {
    type Elem = f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn add(&self, a: &f64, b: &f64) -> Result<f64> {
        Ok(a + b)
    }
    fn mul_t_pow(&self, x: &f64, e: usize) -> f64 {
        x * self.t.powi(e as i32)
    }
    fn mul(&self, a: &f64, b: &f64) -> Result<f64> {
        Ok(a * b)
    }
    fn is_zero(&self, x: &f64) -> bool {
        *x == 0.0
    }
}

/// Exact integer-coefficient polynomials in `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PolyRing;

impl WeightRing for PolyRing {
    type Elem = Poly;

    fn zero(&self) -> Poly {
        Poly::zero()
    }
    fn one(&self) -> Poly {
        Poly::one()
    }
    fn add(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        a.checked_add(b)
    }
    fn mul_t_pow(&self, x: &Poly, e: usize) -> Poly {
        x.shift(e)
    }
    fn mul(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        if a.is_zero() || b.is_zero() {
            return Ok(Poly::zero());
        }
        let overflow = || Error::Resource {
            what: "polynomial coefficient bits",
            value: 65,
            limit: 64,
        };
        let mut coeffs = vec![0u64; a.coeffs.len() + b.coeffs.len() - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                let prod = x.checked_mul(y).ok_or_else(overflow)?;
                coeffs[i + j] = coeffs[i + j].checked_add(prod).ok_or_else(overflow)?;
            }
        }
        Ok(Poly::from_coeffs(coeffs))
    }
    fn is_zero(&self, x: &Poly) -> bool {
        x.is_zero()
    }
}

/// Exact rational `num/den`.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Closest simple rational to an `f64` `t`, via its exact binary expansion.
pub fn rational_from_f64(t: f64) -> Option<BigRational> {
    BigRational::from_float(t)
}
