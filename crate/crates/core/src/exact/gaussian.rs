use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `re + i·im` with arbitrary-precision rational parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_integer(n: i64) -> Self {
        Self { re: BigRational::from_integer(BigInt::from(n)), im: BigRational::zero() }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self { re: BigRational::new(BigInt::from(num), BigInt::from(den)), im: BigRational::zero() }
    }

    /// Exact binary value of each part; fails on non-finite input.
    pub fn from_f64(re: f64, im: f64) -> Result<Self> {
        let conv = |x: f64| BigRational::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite value {x}")));
        Ok(Self { re: conv(re)?, im: conv(im)? })
    }

    pub fn i() -> Self {
        Self { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `re² + im²`
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self { re: &self.re / &n, im: -(&self.im / &n) })
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }

    /// `[re, im]` as rational strings.
    pub fn to_strings(&self) -> [String; 2] {
        [self.re.to_string(), self.im.to_string()]
    }

    /// Parses a rational string such as `-3`, `7/2` or `0.25`.
    pub fn parse_rational(s: &str) -> Result<BigRational> {
        let s = s.trim();
        if let Some((int, frac)) = s.split_once('.') {
            if frac.chars().all(|c| c.is_ascii_digit()) && !frac.is_empty() {
                let negative = int.starts_with('-');
                let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
                let num = BigInt::from_str(&digits).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
                let den = num_traits::pow(BigInt::from(10), frac.len());
                let r = BigRational::new(num, den);
                return Ok(if negative { -r } else { r });
            }
        }
        BigRational::from_str(s).map_err(|e| Error::Parse(format!("{s}: {e}")))
    }

    pub fn from_strings(re: &str, im: &str) -> Result<Self> {
        Ok(Self { re: Self::parse_rational(re)?, im: Self::parse_rational(im)? })
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        Self { re: BigRational::zero(), im: BigRational::zero() }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self { re: BigRational::one(), im: BigRational::zero() }
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(f, "{}{}{}i", self.re, sign, self.im.abs())
            }
        }
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussianRational { re: &self.re * &o.re, im: BigRational::zero() };
        }
        GaussianRational { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
}

impl Div for &GaussianRational {
    type Output = GaussianRational;
    /// Panics on division by zero, like the rational division it wraps.
    fn div(self, o: &GaussianRational) -> GaussianRational {
        if o.im.is_zero() {
            return GaussianRational { re: &self.re / &o.re, im: &self.im / &o.re };
        }
        self * &o.inv().expect("division by zero")
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational { re: -self.re.clone(), im: -self.im.clone() }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, o: GaussianRational) -> GaussianRational {
                (&self).$m(&o)
            }
        }
        impl $tr<&GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, o: &GaussianRational) -> GaussianRational {
                (&self).$m(o)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational { re: -self.re, im: -self.im }
    }
}

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, o: &GaussianRational) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&GaussianRational> for GaussianRational {
    fn sub_assign(&mut self, o: &GaussianRational) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&GaussianRational> for GaussianRational {
    fn mul_assign(&mut self, o: &GaussianRational) {
        *self = &*self * o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(a: i64, b: i64) -> GaussianRational {
        GaussianRational::from_integer(a) + GaussianRational::from_integer(b) * GaussianRational::i()
    }

    #[test]
    fn field_operations() {
        assert_eq!(&g(1, 2) * &g(3, -1), g(5, 5));
        assert_eq!(&g(5, 5) / &g(3, -1), g(1, 2));
        assert_eq!(g(3, 4).norm_sqr(), BigRational::from_integer(25.into()));
        assert_eq!(&g(1, 1) * &g(1, 1).inv().unwrap(), GaussianRational::one());
        assert!(GaussianRational::zero().inv().is_none());
        assert_eq!(g(2, -3).conj(), g(2, 3));
    }

    #[test]
    fn parsing_and_printing() {
        let x = GaussianRational::from_strings("7/2", "-0.25").unwrap();
        assert_eq!(x.re, BigRational::new(7.into(), 2.into()));
        assert_eq!(x.im, BigRational::new((-1).into(), 4.into()));
        assert_eq!(x.to_string(), "7/2-1/4i");
        assert_eq!(GaussianRational::parse_rational("-1.5").unwrap(), BigRational::new((-3).into(), 2.into()));
        assert!(GaussianRational::from_strings("x", "0").is_err());
        let h = GaussianRational::from_f64(0.5, -0.125).unwrap();
        assert_eq!(h.to_f64_pair(), (0.5, -0.125));
        assert!(GaussianRational::from_f64(f64::NAN, 0.0).is_err());
    }
}
