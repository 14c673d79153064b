use std::str::FromStr;

use parrondo::numerics::parse_rational;
use parrondo::rug::Rational;

/// `a:b:steps`, `steps` evenly spaced values from `a` to `b` inclusive.
#[derive(Clone, Debug)]
pub struct Range {
    pub lo: Rational,
    pub hi: Rational,
    pub steps: usize,
}

impl Range {
    pub fn values(&self) -> Vec<Rational> {
        if self.steps == 1 {
            return vec![self.lo.clone()];
        }
        let span = Rational::from(&self.hi - &self.lo);
        (0..self.steps)
            .map(|i| (&span * Rational::from((i as u64, (self.steps - 1) as u64))) + &self.lo)
            .collect()
    }
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, steps] = parts[..] else {
            return Err(format!("expected a:b:steps, got {s:?}"));
        };
        let lo = parse_rational(lo).map_err(|e| e.to_string())?;
        let hi = parse_rational(hi).map_err(|e| e.to_string())?;
        let steps: usize = steps.parse().map_err(|_| format!("bad step count {steps:?}"))?;
        if steps == 0 {
            return Err("step count must be at least 1".into());
        }
        Ok(Range { lo, hi, steps })
    }
}

/// A single `rho,phi` grid point.
#[derive(Clone, Debug)]
pub struct Point(pub Rational, pub Rational);

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (rho, phi) = s
            .split_once(',')
            .ok_or_else(|| format!("expected rho,phi, got {s:?}"))?;
        Ok(Point(
            parse_rational(rho.trim()).map_err(|e| e.to_string())?,
            parse_rational(phi.trim()).map_err(|e| e.to_string())?,
        ))
    }
}

/// Row-major product: `rho` outer, `phi` inner.
pub fn product(rho: &Range, phi: &Range) -> Vec<(Rational, Rational)> {
    let phis = phi.values();
    rho.values()
        .into_iter()
        .flat_map(|r| phis.iter().map(move |p| (r.clone(), p.clone())))
        .collect()
}
