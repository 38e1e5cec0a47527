//! Weight domains.
//!
//! Four exact semirings are built in: the Booleans, the naturals, the
//! integers and the rationals. Naturals and integers are arbitrary precision;
//! rationals are always kept in lowest terms with a positive denominator.
//! There is deliberately no floating point anywhere in the crate.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// One of the supported weight domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Semiring {
    Boolean,
    Naturals,
    Integers,
    Rationals,
}

/// How language equivalence is decided for a weight domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquivalenceCapability {
    /// Embed into the rationals and run linear-span closure.
    ViaRationals,
    /// Determinize with the subset construction and compare DFAs.
    ViaSubsetConstruction,
    None,
}

impl Semiring {
    pub const ALL: [Semiring; 4] = [
        Semiring::Boolean,
        Semiring::Naturals,
        Semiring::Integers,
        Semiring::Rationals,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Semiring::Boolean => "boolean",
            Semiring::Naturals => "naturals",
            Semiring::Integers => "integers",
            Semiring::Rationals => "rationals",
        }
    }

    pub fn equivalence_capability(self) -> EquivalenceCapability {
        match self {
            Semiring::Boolean => EquivalenceCapability::ViaSubsetConstruction,
            Semiring::Naturals | Semiring::Integers | Semiring::Rationals => {
                EquivalenceCapability::ViaRationals
            }
        }
    }

    /// Whether additive inverses exist.
    pub fn is_ring(self) -> bool {
        matches!(self, Semiring::Integers | Semiring::Rationals)
    }

    pub fn zero(self) -> Weight {
        match self {
            Semiring::Boolean => Weight::Bool(false),
            Semiring::Naturals => Weight::Nat(BigUint::zero()),
            Semiring::Integers => Weight::Int(BigInt::zero()),
            Semiring::Rationals => Weight::Rat(BigRational::zero()),
        }
    }

    pub fn one(self) -> Weight {
        match self {
            Semiring::Boolean => Weight::Bool(true),
            Semiring::Naturals => Weight::Nat(BigUint::one()),
            Semiring::Integers => Weight::Int(BigInt::one()),
            Semiring::Rationals => Weight::Rat(BigRational::one()),
        }
    }

    /// Injects a machine integer; fails where the domain cannot hold it.
    pub fn from_i64(self, v: i64) -> Result<Weight> {
        let bad = || Error::InvalidWeight {
            text: v.to_string(),
            semiring: self,
        };
        Ok(match self {
            Semiring::Boolean => match v {
                0 => Weight::Bool(false),
                1 => Weight::Bool(true),
                _ => return Err(bad()),
            },
            Semiring::Naturals => {
                if v < 0 {
                    return Err(bad());
                }
                Weight::Nat(BigUint::from(v as u64))
            }
            Semiring::Integers => Weight::Int(BigInt::from(v)),
            Semiring::Rationals => Weight::Rat(BigRational::from_integer(BigInt::from(v))),
        })
    }

    /// Parses a weight literal: `0`/`1` for Booleans, `[0-9]+` for naturals,
    /// `-?[0-9]+` for integers and `-?[0-9]+(/[1-9][0-9]*)?` for rationals.
    pub fn parse_weight(self, text: &str) -> Result<Weight> {
        let bad = || Error::InvalidWeight {
            text: text.to_string(),
            semiring: self,
        };
        let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        match self {
            Semiring::Boolean => match text {
                "0" => Ok(Weight::Bool(false)),
                "1" => Ok(Weight::Bool(true)),
                _ => Err(bad()),
            },
            Semiring::Naturals => {
                if !digits(text) {
                    return Err(bad());
                }
                text.parse::<BigUint>().map(Weight::Nat).map_err(|_| bad())
            }
            Semiring::Integers => {
                let body = text.strip_prefix('-').unwrap_or(text);
                if !digits(body) {
                    return Err(bad());
                }
                text.parse::<BigInt>().map(Weight::Int).map_err(|_| bad())
            }
            Semiring::Rationals => {
                let (num, den) = match text.split_once('/') {
                    Some((n, d)) => (n, Some(d)),
                    None => (text, None),
                };
                let num_body = num.strip_prefix('-').unwrap_or(num);
                if !digits(num_body) {
                    return Err(bad());
                }
                let numer: BigInt = num.parse().map_err(|_| bad())?;
                let denom = match den {
                    Some(d) => {
                        if !digits(d) || d.starts_with('0') {
                            return Err(bad());
                        }
                        d.parse::<BigInt>().map_err(|_| bad())?
                    }
                    None => BigInt::one(),
                };
                Ok(Weight::Rat(BigRational::new(numer, denom)))
            }
        }
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Semiring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "boolean" | "bool" | "b" => Ok(Semiring::Boolean),
            "naturals" | "nat" | "n" => Ok(Semiring::Naturals),
            "integers" | "int" | "z" => Ok(Semiring::Integers),
            "rationals" | "rat" | "q" => Ok(Semiring::Rationals),
            "tropical" | "min-plus" | "max-plus" | "minplus" | "maxplus" => {
                Err(Error::UnsupportedSemiring {
                    name: s.to_string(),
                    reason: "weighted language equivalence is undecidable over tropical semirings"
                        .into(),
                })
            }
            "reals" | "real" | "float" | "r" => Err(Error::UnsupportedSemiring {
                name: s.to_string(),
                reason: "only exact arithmetic is supported; use rationals".into(),
            }),
            _ => Err(Error::UnsupportedSemiring {
                name: s.to_string(),
                reason: "expected one of boolean, naturals, integers, rationals".into(),
            }),
        }
    }
}

/// An exact scalar tagged with its domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Weight {
    Bool(bool),
    Nat(BigUint),
    Int(BigInt),
    Rat(BigRational),
}

impl Weight {
    pub fn semiring(&self) -> Semiring {
        match self {
            Weight::Bool(_) => Semiring::Boolean,
            Weight::Nat(_) => Semiring::Naturals,
            Weight::Int(_) => Semiring::Integers,
            Weight::Rat(_) => Semiring::Rationals,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Weight::Bool(b) => !b,
            Weight::Nat(n) => n.is_zero(),
            Weight::Int(n) => n.is_zero(),
            Weight::Rat(q) => q.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Weight::Bool(b) => *b,
            Weight::Nat(n) => n.is_one(),
            Weight::Int(n) => n.is_one(),
            Weight::Rat(q) => q.is_one(),
        }
    }

    fn same_domain(&self, other: &Weight) -> Result<()> {
        if self.semiring() == other.semiring() {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                left: self.semiring(),
                right: other.semiring(),
            })
        }
    }

    pub fn add(&self, other: &Weight) -> Result<Weight> {
        self.same_domain(other)?;
        Ok(self.plus(other))
    }

    pub fn mul(&self, other: &Weight) -> Result<Weight> {
        self.same_domain(other)?;
        Ok(self.times(other))
    }

    /// Addition for operands already known to share a domain.
    pub(crate) fn plus(&self, other: &Weight) -> Weight {
        match (self, other) {
            (Weight::Bool(a), Weight::Bool(b)) => Weight::Bool(*a || *b),
            (Weight::Nat(a), Weight::Nat(b)) => Weight::Nat(a + b),
            (Weight::Int(a), Weight::Int(b)) => Weight::Int(a + b),
            (Weight::Rat(a), Weight::Rat(b)) => Weight::Rat(a + b),
            (a, b) => panic!("mixed domains {} and {}", a.semiring(), b.semiring()),
        }
    }

    pub(crate) fn times(&self, other: &Weight) -> Weight {
        match (self, other) {
            (Weight::Bool(a), Weight::Bool(b)) => Weight::Bool(*a && *b),
            (Weight::Nat(a), Weight::Nat(b)) => Weight::Nat(a * b),
            (Weight::Int(a), Weight::Int(b)) => Weight::Int(a * b),
            (Weight::Rat(a), Weight::Rat(b)) => Weight::Rat(a * b),
            (a, b) => panic!("mixed domains {} and {}", a.semiring(), b.semiring()),
        }
    }

    /// Additive inverse, where the domain has one.
    pub fn neg(&self) -> Option<Weight> {
        match self {
            Weight::Int(a) => Some(Weight::Int(-a)),
            Weight::Rat(a) => Some(Weight::Rat(-a)),
            Weight::Nat(a) if a.is_zero() => Some(self.clone()),
            Weight::Bool(false) => Some(self.clone()),
            _ => None,
        }
    }

    /// The unique `q` with `q * divisor = self`, if there is exactly one.
    ///
    /// All four domains have no zero divisors, so for a nonzero divisor the
    /// quotient is unique whenever it exists.
    pub fn exact_div(&self, divisor: &Weight) -> Result<Option<Weight>> {
        self.same_domain(divisor)?;
        if divisor.is_zero() {
            return Ok(None);
        }
        Ok(match (self, divisor) {
            (Weight::Bool(a), Weight::Bool(_)) => Some(Weight::Bool(*a)),
            (Weight::Nat(a), Weight::Nat(b)) => {
                let (q, r) = num_integer::Integer::div_rem(a, b);
                r.is_zero().then_some(Weight::Nat(q))
            }
            (Weight::Int(a), Weight::Int(b)) => {
                let (q, r) = num_integer::Integer::div_rem(a, b);
                r.is_zero().then_some(Weight::Int(q))
            }
            (Weight::Rat(a), Weight::Rat(b)) => Some(Weight::Rat(a / b)),
            _ => unreachable!(),
        })
    }

    /// Value-preserving injection of ℕ, ℤ and ℚ into ℚ.
    pub fn embed_to_rationals(&self) -> Result<Weight> {
        self.to_rational().map(Weight::Rat)
    }

    pub(crate) fn to_rational(&self) -> Result<BigRational> {
        match self {
            Weight::Bool(_) => Err(Error::UnsupportedEmbedding(Semiring::Boolean)),
            Weight::Nat(n) => Ok(BigRational::from_integer(BigInt::from_biguint(
                Sign::Plus,
                n.clone(),
            ))),
            Weight::Int(n) => Ok(BigRational::from_integer(n.clone())),
            Weight::Rat(q) => Ok(q.clone()),
        }
    }

    /// Casts a rational back into `semiring` when the value fits.
    pub fn from_rational(semiring: Semiring, q: &BigRational) -> Option<Weight> {
        match semiring {
            Semiring::Rationals => Some(Weight::Rat(q.clone())),
            Semiring::Integers => q.is_integer().then(|| Weight::Int(q.to_integer())),
            Semiring::Naturals => (q.is_integer() && !q.is_negative())
                .then(|| Weight::Nat(q.to_integer().magnitude().clone())),
            Semiring::Boolean => None,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Bool(b) => f.write_str(if *b { "1" } else { "0" }),
            Weight::Nat(n) => write!(f, "{n}"),
            Weight::Int(n) => write!(f, "{n}"),
            Weight::Rat(q) => {
                if q.is_integer() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
        }
    }
}
