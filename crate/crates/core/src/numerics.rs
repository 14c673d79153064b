//! Multi-precision reals and sign decisions.
//!
//! Every quantity in the crate is a [`Real`] (an MPFR float) carrying the
//! mantissa width of the [`PrecisionConfig`] it was built under. Sign
//! decisions near a boundary go through [`Refiner`], which re-evaluates a
//! quantity at doubled precision until the sign is certified or the
//! [`MAX_BITS`] cap is reached.

use std::cmp::Ordering;
use std::fmt;

use rug::float::Round;
use rug::ops::DivRounding;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Real = Float;

pub const DEFAULT_BITS: u32 = 256;
pub const MIN_BITS: u32 = 64;
/// Precision cap for adaptive sign refinement.
pub const MAX_BITS: u32 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionConfig {
    mantissa_bits: u32,
    compare_eps: Option<Real>,
    cycle_eps: Option<Real>,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig {
            mantissa_bits: DEFAULT_BITS,
            compare_eps: None,
            cycle_eps: None,
        }
    }
}

impl PrecisionConfig {
    pub fn new(mantissa_bits: u32) -> Result<Self> {
        if mantissa_bits < MIN_BITS {
            return Err(Error::InvalidPrecision(format!(
                "mantissa_bits must be >= {MIN_BITS}, got {mantissa_bits}"
            )));
        }
        if mantissa_bits > MAX_BITS {
            return Err(Error::InvalidPrecision(format!(
                "mantissa_bits must be <= {MAX_BITS}, got {mantissa_bits}"
            )));
        }
        Ok(PrecisionConfig {
            mantissa_bits,
            ..Default::default()
        })
    }

    /// IEEE double-width mantissa. Below the supported floor; only meant for
    /// reproducing roundoff artefacts of 64-bit floating point.
    pub fn legacy_double() -> Self {
        PrecisionConfig {
            mantissa_bits: 53,
            ..Default::default()
        }
    }

    pub fn with_compare_eps(mut self, eps: Real) -> Result<Self> {
        check_eps("compare_eps", &eps)?;
        self.compare_eps = Some(eps);
        Ok(self)
    }

    pub fn with_cycle_eps(mut self, eps: Real) -> Result<Self> {
        check_eps("cycle_eps", &eps)?;
        self.cycle_eps = Some(eps);
        Ok(self)
    }

    /// Same tolerances, different mantissa width. Default tolerances are
    /// re-derived for the new width.
    pub fn with_bits(&self, mantissa_bits: u32) -> Self {
        PrecisionConfig {
            mantissa_bits,
            ..self.clone()
        }
    }

    pub fn bits(&self) -> u32 {
        self.mantissa_bits
    }

    /// Tolerance for geometric membership tests, default `2^(-bits/2)`.
    pub fn compare_eps(&self) -> Real {
        match &self.compare_eps {
            Some(e) => e.clone(),
            None => pow2(self.mantissa_bits, -((self.mantissa_bits / 2) as i32)),
        }
    }

    /// Tolerance for state recurrence, default `max(1e-30, 2^-(bits-24))`.
    pub fn cycle_eps(&self) -> Real {
        match &self.cycle_eps {
            Some(e) => e.clone(),
            None => {
                let floor = Float::with_val(self.mantissa_bits, Float::parse("1e-30").unwrap());
                let roundoff = pow2(self.mantissa_bits, 24 - self.mantissa_bits as i32);
                if roundoff > floor {
                    roundoff
                } else {
                    floor
                }
            }
        }
    }

    /// A few ulps of a unit-sized quantity.
    pub fn roundoff(&self) -> Real {
        pow2(self.mantissa_bits, 4 - self.mantissa_bits as i32)
    }

    pub fn real<T>(&self, value: T) -> Real
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.mantissa_bits, value)
    }

    pub fn zero(&self) -> Real {
        Float::new(self.mantissa_bits)
    }

    /// Number of decimal digits the mantissa carries, less two guard digits.
    pub fn decimal_digits(&self) -> usize {
        ((self.mantissa_bits as f64) * std::f64::consts::LOG10_2).floor() as usize - 2
    }
}

fn check_eps(name: &str, eps: &Real) -> Result<()> {
    if eps.is_nan() || *eps <= 0 || *eps >= 1 {
        return Err(Error::InvalidPrecision(format!("{name} must lie in (0, 1)")));
    }
    Ok(())
}

pub fn pow2(bits: u32, exp: i32) -> Real {
    let one = Float::with_val(bits, 1);
    one << exp
}

pub fn checked(x: Real, what: &'static str) -> Result<Real> {
    if x.is_nan() {
        Err(Error::NotANumber(what))
    } else {
        Ok(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Negative,
    ZeroAmbiguous,
    Positive,
}

impl Sign {
    pub fn is_positive(self) -> bool {
        self == Sign::Positive
    }

    pub fn is_negative(self) -> bool {
        self == Sign::Negative
    }

    pub fn is_ambiguous(self) -> bool {
        self == Sign::ZeroAmbiguous
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Negative => "<0",
            Sign::ZeroAmbiguous => "~0",
            Sign::Positive => ">0",
        })
    }
}

pub fn certified_sign(value: &Real, err_bound: &Real) -> Sign {
    debug_assert!(*err_bound >= 0);
    if value.is_nan() {
        return Sign::ZeroAmbiguous;
    }
    if *value > *err_bound {
        Sign::Positive
    } else if value.partial_cmp(err_bound).is_some() && -value.clone() > *err_bound {
        Sign::Negative
    } else {
        Sign::ZeroAmbiguous
    }
}

/// Evaluates derived quantities at a ladder of precisions and certifies signs
/// by comparing adjacent rungs.
///
/// The error of a value at `b` bits is estimated by its distance to the value
/// at `2b` bits; the sign is read from the finer rung. Rungs are built lazily,
/// so decisions far from zero cost exactly two evaluations.
pub struct Refiner<T> {
    base_bits: u32,
    build: Box<dyn Fn(u32) -> T + Send + Sync>,
    levels: Vec<T>,
}

impl<T> Refiner<T> {
    pub fn new(base_bits: u32, build: impl Fn(u32) -> T + Send + Sync + 'static) -> Self {
        Refiner {
            base_bits,
            build: Box::new(build),
            levels: Vec::new(),
        }
    }

    fn bits_at(&self, level: usize) -> u32 {
        self.base_bits << level
    }

    fn ensure(&mut self, level: usize) {
        while self.levels.len() <= level {
            let bits = self.bits_at(self.levels.len());
            self.levels.push((self.build)(bits));
        }
    }

    /// Quantities at the working (lowest) precision.
    pub fn base(&mut self) -> &T {
        self.ensure(0);
        &self.levels[0]
    }

    /// Quantities at the finest precision built so far.
    pub fn finest(&mut self) -> &T {
        self.ensure(1);
        self.levels.last().unwrap()
    }

    pub fn sign(&mut self, f: impl Fn(&T) -> Real) -> Sign {
        let mut level = 1;
        loop {
            self.ensure(level);
            let fine = f(&self.levels[level]);
            let coarse = f(&self.levels[level - 1]);
            if fine.is_nan() || coarse.is_nan() {
                return Sign::ZeroAmbiguous;
            }
            let err = Float::with_val(fine.prec(), &fine - &coarse).abs();
            let sign = certified_sign(&fine, &err);
            if sign != Sign::ZeroAmbiguous || self.bits_at(level) >= MAX_BITS {
                return sign;
            }
            level += 1;
        }
    }

    /// Like [`Refiner::sign`] but fails when the cap is reached undecided.
    pub fn decide(&mut self, curve: &str, f: impl Fn(&T) -> Real) -> Result<Ordering> {
        match self.sign(f) {
            Sign::Positive => Ok(Ordering::Greater),
            Sign::Negative => Ok(Ordering::Less),
            Sign::ZeroAmbiguous => Err(Error::BoundaryAmbiguous {
                curve: curve.to_string(),
            }),
        }
    }
}

/// Parses `p/q`, `-p/q`, decimal literals (`0.688`, `1e-3`, `.5`) and
/// integers into an exact rational.
pub fn parse_rational(input: &str) -> Result<Rational> {
    let err = || Error::Parse {
        input: input.to_string(),
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        if den == 0 {
            return Err(err());
        }
        return Ok(num / den);
    }
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from(Integer::from_str_radix(&digits, 10).map_err(|_| err())?);
    let shift = exponent - frac_part.len() as i32;
    if shift >= 0 {
        value *= Integer::from(Integer::u_pow_u(10, shift as u32));
    } else {
        value /= Integer::from(Integer::u_pow_u(10, (-shift) as u32));
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecimalMode {
    Truncate,
    Round,
}

/// Fixed-point decimal expansion with `places` digits after the point.
/// Truncation is toward zero; rounding is half away from zero.
pub fn decimal_string(value: &Rational, places: usize, mode: DecimalMode) -> String {
    let negative = *value < 0;
    let magnitude = Rational::from(value.abs_ref());
    let scale = Integer::from(Integer::u_pow_u(10, places as u32));
    let scaled = magnitude * &scale;
    let (num, den) = scaled.into_numer_denom();
    let digits = match mode {
        DecimalMode::Truncate => num.div_floor(den),
        DecimalMode::Round => {
            let twice = Integer::from(&num * 2) + &den;
            twice.div_floor(Integer::from(&den * 2))
        }
    };
    let (int_part, frac_part) = digits.div_rem_floor(scale);
    let mut out = String::new();
    if negative && (int_part != 0 || frac_part != 0) {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if places > 0 {
        let frac = frac_part.to_string();
        out.push('.');
        out.push_str(&"0".repeat(places - frac.len()));
        out.push_str(&frac);
    }
    out
}

/// Fixed-point rendering of a real, correctly rounded at `places` decimals.
pub fn format_real(x: &Real, places: usize) -> String {
    match x.to_rational() {
        Some(r) => decimal_string(&r, places, DecimalMode::Round),
        None => x.to_string(),
    }
}

/// Shortest exact scientific rendering (used for machine-readable output).
pub fn format_exact(x: &Real) -> String {
    x.to_string_radix_round(10, None, Round::Nearest)
}

/// Serde adapter: reals travel as full-precision decimal strings.
pub fn serialize_real<S: serde::Serializer>(x: &Real, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_exact(x))
}

/// Compact decimal rendering of an exact rational, for grids and labels.
pub fn format_rational(r: &Rational, max_places: usize) -> String {
    if *r.denom() == 1 {
        return r.numer().to_string();
    }
    let s = decimal_string(r, max_places, DecimalMode::Round);
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}
