//! Boundary curves in the `phi` direction at fixed `rho`.
//!
//! Each curve function is negative below its root and positive above, so
//! a root is located by bisection on exact rational midpoints with a
//! certified sign at every midpoint.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rug::{Float, Rational};
use serde::Serialize;

use super::functions::{refiner, CycleFn};
use super::lines::line_family_at;
use crate::error::{Error, Result};
use crate::model::{spectral_data, stationary_exact};
use crate::numerics::{decimal_string, parse_rational, DecimalMode, PrecisionConfig, Real, Refiner, Sign, MIN_BITS};

/// A curve `f(rho, phi) = 0` in the parameter plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Curve {
    Cycle(CycleFn),
    /// `b_n - pi0 = 0`
    InterceptPi0 {
        n: u32,
    },
}

impl Curve {
    pub fn g(n: u32, m: u32) -> Curve {
        Curve::Cycle(CycleFn::G { n, m })
    }
    pub fn e(n: u32) -> Curve {
        Curve::Cycle(CycleFn::E { n })
    }
    pub fn e_nm(n: u32, m: u32) -> Curve {
        Curve::Cycle(CycleFn::Enm { n, m })
    }
    pub fn h(n: u32, m: u32) -> Curve {
        Curve::Cycle(CycleFn::H { n, m })
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            Curve::Cycle(CycleFn::D { n } | CycleFn::I { n } | CycleFn::F { n }) => Err(Error::BadIndex {
                which: "boundary curve (D, I and F have no roots)",
                n,
                m: 0,
            }),
            Curve::Cycle(f) => f.validate().map(Curve::Cycle),
            Curve::InterceptPi0 { n } if n >= 2 && n % 2 == 0 => Ok(self),
            Curve::InterceptPi0 { n } => Err(Error::BadIndex { which: "b_n", n, m: 0 }),
        }
    }

    /// Certified sign of the curve function at `(rho, phi)`.
    pub fn sign_at(self, rho: &Rational, phi: &Rational, bits: u32) -> Sign {
        match self {
            Curve::Cycle(f) => refiner(rho, phi, bits).sign(|cf| cf.eval(f)),
            Curve::InterceptPi0 { n } => {
                let (rho, phi) = (rho.clone(), phi.clone());
                let pi0 = stationary_exact(&rho)[0].clone();
                let mut r = Refiner::new(bits, move |b| {
                    let lf = line_family_at(&rho, &phi, n, b).expect("n validated");
                    lf.b - Float::with_val(b, &pi0)
                });
                r.sign(|v: &Real| v.clone())
            }
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Curve::Cycle(c) => c.fmt(f),
            Curve::InterceptPi0 { n } => write!(f, "b_{n}"),
        }
    }
}

impl FromStr for Curve {
    type Err = Error;

    /// Accepts `G:n:m`, `E:n`, `E:n:m`, `H:n:m`, `b:n`, with `_` allowed in
    /// place of `:`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse { input: s.to_string() };
        let parts: Vec<&str> = s.split([':', '_']).collect();
        let num = |i: usize| parts.get(i).and_then(|p| p.parse::<u32>().ok()).ok_or_else(bad);
        let curve = match (parts[0], parts.len()) {
            ("G", 3) => Curve::g(num(1)?, num(2)?),
            ("H", 3) => Curve::h(num(1)?, num(2)?),
            ("E", 2) => Curve::e(num(1)?),
            ("E", 3) => Curve::e_nm(num(1)?, num(2)?),
            ("b", 2) => Curve::InterceptPi0 { n: num(1)? },
            _ => return Err(bad()),
        };
        curve.validate()
    }
}

/// An interval `[lo, hi]` known to contain the root.
#[derive(Clone, Debug, PartialEq)]
pub struct Bracket {
    pub lo: Rational,
    pub hi: Rational,
}

impl Bracket {
    pub fn width(&self) -> Rational {
        Rational::from(&self.hi - &self.lo)
    }

    pub fn midpoint(&self) -> Rational {
        Rational::from(&self.lo + &self.hi) / 2u32
    }

    /// Strictly below `other`, with no overlap.
    pub fn below(&self, other: &Bracket) -> bool {
        self.hi < other.lo
    }
}

fn working_bits(bits: u32, resolution_bits: u32) -> u32 {
    bits.max(MIN_BITS).max(resolution_bits + 64)
}

struct Bisection {
    curve: Curve,
    rho: Rational,
    bits: u32,
    bracket: Bracket,
}

impl Bisection {
    fn new(curve: Curve, rho: &Rational, lo: Rational, hi: Rational, bits: u32) -> Result<Self> {
        let no_change = || Error::NoSignChange {
            curve: curve.to_string(),
            lo: decimal_string(&lo, 20, DecimalMode::Round),
            hi: decimal_string(&hi, 20, DecimalMode::Round),
        };
        if curve.sign_at(rho, &lo, bits) != Sign::Negative || curve.sign_at(rho, &hi, bits) != Sign::Positive {
            return Err(no_change());
        }
        Ok(Bisection {
            curve,
            rho: rho.clone(),
            bits,
            bracket: Bracket { lo, hi },
        })
    }

    fn halve(&mut self) -> Result<()> {
        let mid = self.bracket.midpoint();
        match self.curve.sign_at(&self.rho, &mid, self.bits) {
            Sign::Negative => self.bracket.lo = mid,
            Sign::Positive => self.bracket.hi = mid,
            Sign::ZeroAmbiguous => {
                return Err(Error::BoundaryAmbiguous {
                    curve: self.curve.to_string(),
                })
            }
        }
        Ok(())
    }

    fn until(&mut self, mut done: impl FnMut(&Bracket) -> bool, max_iter: u32) -> Result<()> {
        for _ in 0..max_iter {
            if done(&self.bracket) {
                return Ok(());
            }
            self.halve()?;
        }
        if done(&self.bracket) {
            Ok(())
        } else {
            Err(Error::BoundaryAmbiguous {
                curve: self.curve.to_string(),
            })
        }
    }
}

/// Search interval for the cycle curves: `(2/3, phi2]`, with `phi2`
/// rounded up to a nearby rational and capped at 1.
fn default_interval(rho: &Rational) -> Result<(Rational, Rational)> {
    let prec = PrecisionConfig::default();
    let sd = spectral_data(rho, &Rational::from(1), &prec)?;
    let phi2 = sd.phi2.to_rational().ok_or(Error::NotANumber("phi2"))?;
    let scale = Rational::from(1u64 << 60);
    let up = ((phi2 * &scale).ceil() + 1u32) / scale;
    let hi = if up > 1 { Rational::from(1) } else { up };
    Ok((Rational::from((2, 3)), hi))
}

fn initial_bisection(curve: Curve, rho: &Rational, bits: u32) -> Result<Bisection> {
    let curve = curve.validate()?;
    match curve {
        Curve::Cycle(_) => {
            let (lo, hi) = default_interval(rho)?;
            Bisection::new(curve, rho, lo, hi, bits)
        }
        Curve::InterceptPi0 { n } => {
            // Expected between G_{n+4,n+2} = 0 (below) and H_{n+2,n} = 0 (above).
            let width = Rational::from((1, 1u64 << 50));
            let lower = root_bracket(Curve::g(n + 4, n + 2), rho, &width, bits)?;
            let upper = root_bracket(Curve::h(n + 2, n), rho, &width, bits)?;
            Bisection::new(curve, rho, lower.hi, upper.lo, bits)
        }
    }
}

/// Brackets the root of `curve` at `rho` to width at most `width`.
pub fn root_bracket(curve: Curve, rho: &Rational, width: &Rational, bits: u32) -> Result<Bracket> {
    let resolution = (width.denom().significant_bits() + 1).saturating_sub(width.numer().significant_bits());
    let bits = working_bits(bits, resolution);
    let mut b = initial_bisection(curve, rho, bits)?;
    b.until(|br| br.width() <= *width, resolution + 8)?;
    Ok(b.bracket)
}

/// A boundary root certified to `digits` decimal places.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryRoot {
    pub curve: String,
    pub digits: usize,
    /// Truncated toward zero; every point of the final bracket shares it.
    pub truncated: String,
    /// Correctly rounded.
    pub rounded: String,
}

/// Finds the `phi` root of `curve` at `rho` to `digits` certified decimals.
pub fn boundary_root(curve: Curve, rho: &Rational, digits: usize, bits: u32) -> Result<BoundaryRoot> {
    let resolution = ((digits as f64 + 2.0) * std::f64::consts::LOG2_10).ceil() as u32;
    let bits = working_bits(bits, resolution);
    let mut b = initial_bisection(curve, rho, bits)?;
    let fmt = |r: &Rational, mode| decimal_string(r, digits, mode);
    // Beyond this a root sits exactly on a digit boundary.
    let cap = resolution + 128;
    b.until(
        |br| fmt(&br.lo, DecimalMode::Truncate) == fmt(&br.hi, DecimalMode::Truncate),
        cap,
    )?;
    b.until(
        |br| fmt(&br.lo, DecimalMode::Round) == fmt(&br.hi, DecimalMode::Round),
        cap,
    )?;
    Ok(BoundaryRoot {
        curve: curve.to_string(),
        digits,
        truncated: fmt(&b.bracket.lo, DecimalMode::Truncate),
        rounded: fmt(&b.bracket.lo, DecimalMode::Round),
    })
}

/// Parses a `rho` argument and finds the root.
pub fn boundary_root_str(curve: &str, rho: &str, digits: usize, bits: u32) -> Result<BoundaryRoot> {
    boundary_root(curve.parse()?, &parse_rational(rho)?, digits, bits)
}

/// One row of the critical-value table at `rho = 1/3`.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalValue {
    pub curve: String,
    pub forms: &'static str,
    pub truncated: String,
    pub rounded: String,
}

/// The nine curves separating the bands of `[1,2]` through `[1,6]` at
/// `rho = 1/3`, in decreasing `phi`, with the cycle forms found just above
/// each curve.
pub const CRITICAL_CURVES: [(Curve, &str); 9] = [
    (Curve::Cycle(CycleFn::G { n: 4, m: 2 }), "[1,2]"),
    (Curve::Cycle(CycleFn::E { n: 2 }), "[1,4,1,2], [1,2]"),
    (Curve::Cycle(CycleFn::Enm { n: 4, m: 2 }), "[1,4,1,2]"),
    (Curve::Cycle(CycleFn::H { n: 4, m: 2 }), "[1,4,1,2], [1,4]"),
    (Curve::Cycle(CycleFn::G { n: 6, m: 4 }), "[1,4]"),
    (Curve::Cycle(CycleFn::E { n: 4 }), "[1,6,1,4], [1,4]"),
    (Curve::Cycle(CycleFn::Enm { n: 6, m: 4 }), "[1,6,1,4]"),
    (Curve::Cycle(CycleFn::H { n: 6, m: 4 }), "[1,6,1,4], [1,6]"),
    (Curve::Cycle(CycleFn::G { n: 8, m: 6 }), "[1,6]"),
];

pub fn critical_values(digits: usize, bits: u32) -> Result<Vec<CriticalValue>> {
    let rho = Rational::from((1, 3));
    CRITICAL_CURVES
        .par_iter()
        .map(|&(curve, forms)| {
            let root = boundary_root(curve, &rho, digits, bits)?;
            Ok(CriticalValue {
                curve: root.curve,
                forms,
                truncated: root.truncated,
                rounded: root.rounded,
            })
        })
        .collect()
}
