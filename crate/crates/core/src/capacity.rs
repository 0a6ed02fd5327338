//! Seed-keyed i.i.d. bond capacities, quantized to integer micro-units.
//!
//! A capacity is never stored: it is recomputed from a hash of the master
//! seed and the bond coordinates, so any region of the infinite lattice can
//! be sampled lazily and in any order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::lattice::Bond;
use crate::rational::{format_rational, parse_rational, round_to_i128, to_f64, Rational};
use crate::seed::{hash_words, unit_interval};

/// Micro-units per capacity unit.
pub const DEFAULT_SCALE: u64 = 1 << 20;

/// Upper bound applied to samples of unbounded laws.
pub const CAPACITY_CAP: u64 = 1 << 32;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DistributionSpec {
    Constant(Rational),
    /// Mass `p_one` at 1, the rest at 0.
    Bernoulli(Rational),
    Exponential(Rational),
    Uniform(Rational, Rational),
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<(), ParseError> {
        let ok = match self {
            DistributionSpec::Constant(c) => *c >= Rational::zero(),
            DistributionSpec::Bernoulli(p) => *p >= Rational::zero() && *p <= Rational::one(),
            DistributionSpec::Exponential(rate) => *rate > Rational::zero(),
            DistributionSpec::Uniform(lo, hi) => *lo >= Rational::zero() && lo < hi,
        };
        if ok {
            Ok(())
        } else {
            Err(ParseError::DistributionParameters(self.to_string()))
        }
    }

    /// Sample in micro-units from the hash `h`.
    fn sample(&self, h: u64, scale: u64) -> u64 {
        let scale_r = Rational::from_integer(scale as i128);
        match self {
            DistributionSpec::Constant(c) => round_to_i128(&(c * scale_r)) as u64,
            DistributionSpec::Bernoulli(p) => {
                // exact comparison h / 2^64 < p
                let lhs = h as u128 * *p.denom() as u128;
                let rhs = (*p.numer() as u128) << 64;
                if lhs < rhs {
                    scale
                } else {
                    0
                }
            }
            DistributionSpec::Exponential(rate) => {
                let u = unit_interval(h);
                let x = -libm::log1p(-u) / to_f64(rate);
                let micro = libm::round(x * scale as f64);
                if micro >= CAPACITY_CAP as f64 {
                    CAPACITY_CAP
                } else {
                    micro as u64
                }
            }
            DistributionSpec::Uniform(lo, hi) => {
                let u = unit_interval(h);
                let x = to_f64(lo) + (to_f64(hi) - to_f64(lo)) * u;
                libm::round(x * scale as f64) as u64
            }
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionSpec::Constant(c) => write!(f, "const:{}", format_rational(c)),
            DistributionSpec::Bernoulli(p) => write!(f, "bern:{}", format_rational(p)),
            DistributionSpec::Exponential(r) => write!(f, "exp:{}", format_rational(r)),
            DistributionSpec::Uniform(lo, hi) => {
                write!(f, "unif:{}:{}", format_rational(lo), format_rational(hi))
            }
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::Distribution(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| parse_rational(t).map_err(|_| bad());
        let spec = match parts.as_slice() {
            ["const", c] => DistributionSpec::Constant(num(c)?),
            ["bern", p] => DistributionSpec::Bernoulli(num(p)?),
            ["exp", r] => DistributionSpec::Exponential(num(r)?),
            ["unif", lo, hi] => DistributionSpec::Uniform(num(lo)?, num(hi)?),
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<DistributionSpec> for String {
    fn from(d: DistributionSpec) -> String {
        d.to_string()
    }
}

impl TryFrom<String> for DistributionSpec {
    type Error = ParseError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Anything that assigns a capacity in micro-units to every bond.
pub trait Capacities: Sync {
    fn capacity(&self, e: Bond) -> u64;

    /// Micro-units per capacity unit.
    fn scale(&self) -> u64;
}

impl<T: Capacities + ?Sized> Capacities for &T {
    fn capacity(&self, e: Bond) -> u64 {
        (**self).capacity(e)
    }

    fn scale(&self) -> u64 {
        (**self).scale()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CapacityField {
    pub spec: DistributionSpec,
    pub master_seed: u64,
    pub scale: u64,
}

impl CapacityField {
    pub fn new(spec: DistributionSpec, master_seed: u64) -> Self {
        CapacityField { spec, master_seed, scale: DEFAULT_SCALE }
    }

    pub fn with_scale(spec: DistributionSpec, master_seed: u64, scale: u64) -> Self {
        CapacityField { spec, master_seed, scale }
    }

    /// Capacity of `e` in micro-units.
    pub fn capacity(&self, e: Bond) -> u64 {
        let a = e.a();
        let orientation = u64::from(!e.is_horizontal());
        let h = hash_words(self.master_seed, &[a.x as u64, a.y as u64, orientation]);
        self.spec.sample(h, self.scale)
    }
}

impl Capacities for CapacityField {
    fn capacity(&self, e: Bond) -> u64 {
        CapacityField::capacity(self, e)
    }

    fn scale(&self) -> u64 {
        self.scale
    }
}

/// A base field with some bonds overridden.
#[derive(Clone, Debug)]
pub struct PatchedField<C> {
    pub base: C,
    pub overrides: BTreeMap<Bond, u64>,
}

impl<C: Capacities> PatchedField<C> {
    pub fn new(base: C) -> Self {
        PatchedField { base, overrides: BTreeMap::new() }
    }

    pub fn set(&mut self, e: Bond, value: u64) {
        self.overrides.insert(e, value);
    }
}

impl<C: Capacities> Capacities for PatchedField<C> {
    fn capacity(&self, e: Bond) -> u64 {
        self.overrides.get(&e).copied().unwrap_or_else(|| self.base.capacity(e))
    }

    fn scale(&self) -> u64 {
        self.base.scale()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroMass {
    pub mass: Rational,
    /// Set when the mass at zero is at least 1/2.
    pub warning: bool,
}

/// The atom `m({0})` of the law.
pub fn mass_at_zero(spec: &DistributionSpec) -> ZeroMass {
    let mass = match spec {
        DistributionSpec::Constant(c) if c.is_zero() => Rational::one(),
        DistributionSpec::Constant(_) => Rational::zero(),
        DistributionSpec::Bernoulli(p) => Rational::one() - p,
        DistributionSpec::Exponential(_) => Rational::zero(),
        DistributionSpec::Uniform(_, _) => Rational::zero(),
    };
    let warning = mass >= Rational::new(1, 2);
    ZeroMass { mass, warning }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremReport {
    /// `m(0) < 1/2`.
    pub zero_mass_ok: bool,
    /// Some exponential moment is finite.
    pub exp_moment_ok: bool,
}

impl TheoremReport {
    pub fn all_ok(&self) -> bool {
        self.zero_mass_ok && self.exp_moment_ok
    }
}

pub fn validate_for_theorems(spec: &DistributionSpec) -> TheoremReport {
    // bounded laws trivially; Exponential(rate) for any c < rate
    let exp_moment_ok = true;
    TheoremReport { zero_mass_ok: !mass_at_zero(spec).warning, exp_moment_ok }
}
