use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::gaussian::GaussianRational as Q;
use crate::error::{Error, Result};

/// Exponent vector, one entry per variable.
pub type Monomial = Vec<u32>;

/// Sparse multivariate polynomial in `z_0, …, z_{n−1}` over Gaussian
/// rationals. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Q>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The variable `z_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable z{i} outside a ring of {nvars} variables");
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Q::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, monomial: &[u32]) -> Q {
        self.terms.get(monomial).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, monomial: Monomial, c: Q) {
        debug_assert_eq!(monomial.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(monomial) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    /// Every term has total degree `deg`.
    pub fn is_homogeneous_of_degree(&self, deg: u32) -> bool {
        self.terms.keys().all(|m| m.iter().sum::<u32>() == deg)
    }

    fn check_ring(&self, other: &Self) {
        assert_eq!(self.nvars, other.nvars, "polynomials from different rings");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_ring(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_ring(other);
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    /// `∂/∂z_var`
    pub fn derivative(&self, var: usize) -> Self {
        assert!(var < self.nvars);
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m[var];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm[var] -= 1;
            out.add_term(dm, c * &Q::from_integer(i64::from(e)));
        }
        out
    }

    /// Exact value at `point`.
    pub fn evaluate(&self, point: &[Q]) -> Result<Q> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: point.len() });
        }
        // Powers are shared across terms.
        let max_exp: Vec<u32> = (0..self.nvars).map(|v| self.terms.keys().map(|m| m[v]).max().unwrap_or(0)).collect();
        let powers: Vec<Vec<Q>> = point
            .iter()
            .zip(&max_exp)
            .map(|(x, &e)| {
                let mut pw = Vec::with_capacity(e as usize + 1);
                pw.push(Q::one());
                for k in 1..=e as usize {
                    let next = &pw[k - 1] * x;
                    pw.push(next);
                }
                pw
            })
            .collect();
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in m.iter().enumerate() {
                if e > 0 {
                    t = &t * &powers[v][e as usize];
                }
            }
            acc += &t;
        }
        Ok(acc)
    }

    /// Substitutes `z_var = value`, keeping the ring.
    pub fn substitute(&self, var: usize, value: &Q) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            for _ in 0..m[var] {
                coeff = &coeff * value;
            }
            let mut nm = m.clone();
            nm[var] = 0;
            out.add_term(nm, coeff);
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (v, &e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*z{v}")?,
                    _ => write!(f, "*z{v}^{e}")?,
                }
            }
        }
        Ok(())
    }
}
