//! Laurent polynomials in N with rational exponents and exact integer
//! coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

pub type Exponent = Ratio<i64>;

/// `Σ coeff · N^exponent`; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<Exponent, BigInt>,
}

impl LaurentPoly {
    pub fn monomial(exponent: Exponent, coeff: impl Into<BigInt>) -> Self {
        let mut p = Self::default();
        p.add_term(exponent, coeff.into());
        p
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::monomial(Exponent::zero(), c)
    }

    pub fn add_term(&mut self, exponent: Exponent, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exponent).or_insert_with(BigInt::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&exponent);
        }
    }

    pub fn coeff(&self, exponent: Exponent) -> BigInt {
        self.terms.get(&exponent).cloned().unwrap_or_default()
    }

    /// Terms in decreasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &BigInt)> {
        self.terms.iter().rev()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest exponent with a nonzero coefficient.
    pub fn leading_exponent(&self) -> Option<Exponent> {
        self.terms.keys().next_back().copied()
    }

    pub fn all_coefficients_positive(&self) -> bool {
        self.terms.values().all(|c| c.is_positive())
    }

    pub fn eval(&self, n: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let x = c.to_f64().unwrap_or(f64::NAN);
                let p = if *e.denom() == 1 {
                    n.powi(*e.numer() as i32)
                } else {
                    n.powf(*e.numer() as f64 / *e.denom() as f64)
                };
                x * p
            })
            .sum()
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let mut out = Self::default();
        for (e, c) in &self.terms {
            out.add_term(*e, c * k);
        }
        out
    }
}

impl Zero for LaurentPoly {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for LaurentPoly {
    fn one() -> Self {
        Self::constant(1)
    }
}

impl Add for LaurentPoly {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl Sub for LaurentPoly {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for LaurentPoly {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect(),
        }
    }
}

impl Mul for LaurentPoly {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(e, c)| {
                if e.is_zero() {
                    c.to_string()
                } else if e.is_integer() {
                    format!("{c}·N^{}", e.numer())
                } else {
                    format!("{c}·N^({}/{})", e.numer(), e.denom())
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Serialized as `[[exponent_num, exponent_den, coeff], …]`, leading term
/// first. Coefficients that overflow `i64` are written as decimal strings.
impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.terms.len()))?;
        for (e, c) in self.terms() {
            let coeff = match c.to_i64() {
                Some(x) => serde_json::Value::from(x),
                None => serde_json::Value::from(c.to_string()),
            };
            seq.serialize_element(&(*e.numer(), *e.denom(), coeff))?;
        }
        seq.end()
    }
}
