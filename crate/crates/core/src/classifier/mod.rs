//! Analytic prediction of the asymptotic behaviour at `(rho, phi)`.
//!
//! For `phi <= 2/3` the stationary point of game B attracts every state.
//! Above `phi2` it is no longer reachable and `[1,2]` is the cycle. In
//! between, the cycles are `[1,n]` and `[1,n,1,n-2]` for the even `n` near
//! `s`, the first even index with `E_n >= 0`.

pub mod functions;
pub mod lines;
pub mod regions;
pub mod roots;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

pub use functions::{cycle_sign, eval_cycle_fn, CycleFn, CycleFunctions};
pub use lines::{b_forever_lines, line_family, BForeverLines, ExactLine, LineFamily};
pub use regions::{check_region_vertices, region12, VertexCheck, VertexReport};
pub use roots::{boundary_root, critical_values, root_bracket, BoundaryRoot, Bracket, CriticalValue, Curve};

use crate::dynamics::GamePattern;
use crate::error::{Error, Result};
use crate::model::{Params, PhiBand};
use crate::numerics::{Refiner, Sign};

/// Largest `s` searched by [`classify`].
pub const DEFAULT_N_MAX: u32 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    GasEquilibrium,
    CycleSet,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::GasEquilibrium => "GAS-equilibrium",
            Regime::CycleSet => "cycle-set",
        })
    }
}

/// A certified sign that entered the decision.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandTest {
    pub curve: String,
    pub sign: Sign,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub regime: Regime,
    /// Case 1 to 7 of the position of `phi` among `phi1`, `2/3`, `phi2`.
    pub phi_case: u8,
    pub cycles: BTreeSet<GamePattern>,
    pub unstable_equilibrium: bool,
    pub region12: Option<u8>,
    /// Smallest even `n` with `E_n >= 0`, when `2/3 < phi < phi2`.
    pub s: Option<u32>,
    pub band: Vec<BandTest>,
}

impl Classification {
    pub fn cycles_label(&self) -> String {
        self.cycles.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
    }
}

type CycleRefiner = Refiner<CycleFunctions>;

fn decide(r: &mut CycleRefiner, which: CycleFn, band: &mut Vec<BandTest>) -> Result<Sign> {
    let sign = r.sign(|cf| cf.eval(which));
    band.push(BandTest {
        curve: which.to_string(),
        sign,
    });
    if sign.is_ambiguous() {
        return Err(Error::BoundaryAmbiguous {
            curve: which.to_string(),
        });
    }
    Ok(sign)
}

fn e_nonnegative(r: &mut CycleRefiner, n: u32) -> Result<bool> {
    match r.sign(|cf| cf.e_n(n)) {
        Sign::ZeroAmbiguous => Err(Error::BoundaryAmbiguous {
            curve: CycleFn::E { n }.to_string(),
        }),
        s => Ok(s.is_positive()),
    }
}

fn search_s(r: &mut CycleRefiner, n_max: u32) -> Result<u32> {
    // E_n >= 0 is monotone in even n: gallop, then bisect.
    let mut below = 0u32;
    let mut n = 2u32;
    loop {
        if n > n_max {
            return Err(Error::SNotFound { n_max });
        }
        if e_nonnegative(r, n)? {
            break;
        }
        below = n;
        n = n.saturating_mul(2);
    }
    let mut above = n;
    while above - below > 2 {
        let mid = below + ((above - below) / 2) / 2 * 2;
        let mid = if mid == below { below + 2 } else { mid };
        if e_nonnegative(r, mid)? {
            above = mid;
        } else {
            below = mid;
        }
    }
    Ok(above)
}

/// Smallest even `n` with `E_n >= 0`. Requires `2/3 < phi < phi2`.
pub fn find_s(params: &Params, n_max: u32) -> Result<u32> {
    if params.phi_band() != PhiBand::BelowPhi2 {
        return Err(Error::Precondition("find_s needs 2/3 < phi < phi2".into()));
    }
    let mut r = functions::refiner(params.rho(), params.phi(), params.bits());
    search_s(&mut r, n_max)
}

pub fn classify(params: &Params) -> Result<Classification> {
    classify_with(params, DEFAULT_N_MAX)
}

pub fn classify_with(params: &Params, n_max: u32) -> Result<Classification> {
    let band_case = params.phi_band();
    let mut out = Classification {
        regime: Regime::CycleSet,
        phi_case: band_case.case(),
        cycles: BTreeSet::new(),
        unstable_equilibrium: false,
        region12: None,
        s: None,
        band: Vec::new(),
    };
    match band_case {
        PhiBand::BelowPhi1 | PhiBand::AtPhi1 | PhiBand::BelowTwoThirds | PhiBand::AtTwoThirds => {
            out.regime = Regime::GasEquilibrium;
            return Ok(out);
        }
        PhiBand::AtPhi2 | PhiBand::AbovePhi2 => {
            out.cycles.insert(GamePattern::OneN(2));
        }
        PhiBand::BelowPhi2 => {
            out.unstable_equilibrium = true;
            let mut r = functions::refiner(params.rho(), params.phi(), params.bits());
            let s = search_s(&mut r, n_max)?;
            out.s = Some(s);
            let band = &mut out.band;
            for n in [s, s + 2] {
                let lower = decide(&mut r, CycleFn::Enm { n, m: n - 2 }, band)?;
                let upper = decide(&mut r, CycleFn::E { n }, band)?;
                if lower.is_negative() && upper.is_positive() {
                    out.cycles.insert(GamePattern::OneN(n));
                }
                if n >= 4 {
                    let lower = decide(&mut r, CycleFn::G { n, m: n - 2 }, band)?;
                    let upper = decide(&mut r, CycleFn::H { n, m: n - 2 }, band)?;
                    if lower.is_negative() && upper.is_positive() {
                        out.cycles.insert(GamePattern::OneNOneNm2(n));
                    }
                }
            }
        }
    }
    out.region12 = match regions::region12(params) {
        Ok(r) => Some(r),
        Err(Error::NotInPartition | Error::PredicateAmbiguous(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(out)
}
