//! Closed-form functions whose signs decide which periodic patterns exist.
//!
//! With `t = 3 phi - 2` and `K∓ = 3(1+rho)(1+rho^2) ∓ (1-rho) S`:
//!
//! - `E_{n,m}` is, up to the positive factor `D_n`, the excess of the first
//!   coordinate over `pi0` at step `m` of the `[1,n]` cycle, counted from the
//!   state after game A.
//! - `G_{n,m}` and `H_{n,m}` play the same role, over `I_n`, for the two
//!   halves of the `[1,n,1,n-2]` cycle.
//! - `F_n` is the ratio with `E_n >= 0` iff `F_n <= phi1 / phi2` for even `n`.

use std::fmt;

use rug::ops::Pow;
use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::model::Params;
use crate::numerics::{Real, Refiner, Sign};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CycleFn {
    E { n: u32 },
    Enm { n: u32, m: u32 },
    G { n: u32, m: u32 },
    H { n: u32, m: u32 },
    D { n: u32 },
    I { n: u32 },
    F { n: u32 },
}

impl CycleFn {
    pub fn validate(self) -> Result<Self> {
        let (which, n, m, min_n, max_m) = match self {
            CycleFn::E { n } => ("E_n", n, 0, 2, 0),
            CycleFn::Enm { n, m } => ("E_nm", n, m, 2, n),
            CycleFn::G { n, m } => ("G_nm", n, m, 4, n),
            CycleFn::H { n, m } => ("H_nm", n, m, 4, n),
            CycleFn::D { n } => ("D_n", n, 0, 2, 0),
            CycleFn::I { n } => ("I_n", n, 0, 4, 0),
            CycleFn::F { n } => ("F_n", n, 0, 2, 0),
        };
        if n % 2 == 1 || n < min_n || m > max_m {
            return Err(Error::BadIndex { which, n, m });
        }
        Ok(self)
    }
}

impl fmt::Display for CycleFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CycleFn::E { n } => write!(f, "E_{n}"),
            CycleFn::Enm { n, m } => write!(f, "E_{n}_{m}"),
            CycleFn::G { n, m } => write!(f, "G_{n}_{m}"),
            CycleFn::H { n, m } => write!(f, "H_{n}_{m}"),
            CycleFn::D { n } => write!(f, "D_{n}"),
            CycleFn::I { n } => write!(f, "I_{n}"),
            CycleFn::F { n } => write!(f, "F_{n}"),
        }
    }
}

/// Constants shared by all cycle functions at one `(rho, phi)` and precision.
#[derive(Clone, Debug)]
pub struct CycleFunctions {
    bits: u32,
    t: Real,
    e1: Real,
    e2: Real,
    k_minus: Real,
    k_plus: Real,
    /// `phi (1 - rho)`
    scale: Real,
    /// `(1 + rho + rho^2) S`
    q_s: Real,
}

impl CycleFunctions {
    pub fn new(params: &Params) -> Self {
        CycleFunctions::at_bits(params.rho(), params.phi(), params.bits())
    }

    /// Builds directly from exact inputs, so that refinement can rebuild at
    /// any precision without going through [`Params`].
    pub fn at_bits(rho: &Rational, phi: &Rational, bits: u32) -> Self {
        let f = |v: &Rational| Float::with_val(bits, v);
        let rho_r = f(rho);
        let phi_r = f(phi);
        let rho2 = Float::with_val(bits, rho_r.square_ref());
        let one_p_rho2 = Float::with_val(bits, &rho2 + 1u32);
        let one_p_rho = Float::with_val(bits, &rho_r + 1u32);
        let one_m_rho = Float::with_val(bits, 1u32 - &rho_r);
        let s = {
            let t = Float::with_val(bits, &rho2 + Float::with_val(bits, &rho_r * 4u32)) + 1u32;
            Float::with_val(bits, &one_p_rho2 * &t).sqrt()
        };
        let k = Float::with_val(bits, &one_p_rho * &one_p_rho2);
        let g = Float::with_val(bits, &one_m_rho * &s);
        // e1, e2 = 1 - 3phi/2 ± phi (1-rho) S / (2 (1+rho)(1+rho^2))
        let centre = Float::with_val(bits, 1u32 - Float::with_val(bits, &phi_r * 1.5f64));
        let spread = Float::with_val(bits, &phi_r * &g) / Float::with_val(bits, &k * 2u32);
        let e1 = Float::with_val(bits, &centre + &spread);
        let e2 = Float::with_val(bits, &centre - &spread);
        let k3 = Float::with_val(bits, &k * 3u32);
        let q = Float::with_val(bits, &one_p_rho + &rho2);
        CycleFunctions {
            bits,
            t: Float::with_val(bits, &phi_r * 3u32) - 2u32,
            e1,
            e2,
            k_minus: Float::with_val(bits, &k3 - &g),
            k_plus: Float::with_val(bits, &k3 + &g),
            scale: Float::with_val(bits, &phi_r * &one_m_rho),
            q_s: Float::with_val(bits, &q * &s),
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn e1(&self) -> &Real {
        &self.e1
    }

    pub fn e2(&self) -> &Real {
        &self.e2
    }

    fn pow(&self, e: &Real, k: u32) -> Real {
        Float::with_val(self.bits, e.pow(k))
    }

    /// `2 + sign * e^k t`
    fn two_plus(&self, e: &Real, k: u32, sign: i32) -> Real {
        let term = Float::with_val(self.bits, self.pow(e, k) * &self.t);
        if sign > 0 {
            term + 2u32
        } else {
            2u32 - term
        }
    }

    /// `4 - e^(2k) t^2`
    fn four_minus(&self, e: &Real, k: u32) -> Real {
        let et = Float::with_val(self.bits, self.pow(e, k) * &self.t);
        4u32 - et.square()
    }

    pub fn e_nm(&self, n: u32, m: u32) -> Real {
        let b = self.bits;
        let left = self.pow(&self.e2, m) * self.two_plus(&self.e1, n, 1) * &self.k_minus;
        let right = self.pow(&self.e1, m) * self.two_plus(&self.e2, n, 1) * &self.k_plus;
        Float::with_val(b, &self.scale * Float::with_val(b, left - right)) / 2u32
    }

    pub fn e_n(&self, n: u32) -> Real {
        self.e_nm(n, n)
    }

    fn g_or_h(&self, n: u32, m: u32, third: u32) -> Real {
        let b = self.bits;
        let left = self.pow(&self.e2, m)
            * self.four_minus(&self.e1, n - 1)
            * self.two_plus(&self.e2, third, -1)
            * &self.k_minus;
        let right = self.pow(&self.e1, m)
            * self.four_minus(&self.e2, n - 1)
            * self.two_plus(&self.e1, third, -1)
            * &self.k_plus;
        Float::with_val(b, &self.scale * Float::with_val(b, left - right))
    }

    pub fn g_nm(&self, n: u32, m: u32) -> Real {
        self.g_or_h(n, m, n - 2)
    }

    pub fn h_nm(&self, n: u32, m: u32) -> Real {
        self.g_or_h(n, m, n)
    }

    pub fn d_n(&self, n: u32) -> Real {
        let b = self.bits;
        let prod = self.two_plus(&self.e1, n, 1) * self.two_plus(&self.e2, n, 1);
        Float::with_val(b, prod * &self.q_s) * 2u32
    }

    pub fn i_n(&self, n: u32) -> Real {
        let b = self.bits;
        let prod = self.two_plus(&self.e1, n - 1, -1) * self.two_plus(&self.e2, n - 1, -1);
        Float::with_val(b, prod * self.d_n(n - 1)) * 2u32
    }

    pub fn f_n(&self, n: u32) -> Real {
        let b = self.bits;
        let ratio = Float::with_val(b, &self.e1 / &self.e2);
        let num = self.two_plus(&self.e2, n, 1);
        let den = self.two_plus(&self.e1, n, 1);
        Float::with_val(b, ratio.pow(n)) * num / den
    }

    pub fn eval(&self, which: CycleFn) -> Real {
        match which {
            CycleFn::E { n } => self.e_n(n),
            CycleFn::Enm { n, m } => self.e_nm(n, m),
            CycleFn::G { n, m } => self.g_nm(n, m),
            CycleFn::H { n, m } => self.h_nm(n, m),
            CycleFn::D { n } => self.d_n(n),
            CycleFn::I { n } => self.i_n(n),
            CycleFn::F { n } => self.f_n(n),
        }
    }
}

pub fn eval_cycle_fn(which: CycleFn, params: &Params) -> Result<Real> {
    let which = which.validate()?;
    crate::numerics::checked(CycleFunctions::new(params).eval(which), "cycle function")
}

/// Refiner over [`CycleFunctions`] at `(rho, phi)`.
pub fn refiner(rho: &Rational, phi: &Rational, base_bits: u32) -> Refiner<CycleFunctions> {
    let (rho, phi) = (rho.clone(), phi.clone());
    Refiner::new(base_bits, move |bits| CycleFunctions::at_bits(&rho, &phi, bits))
}

/// Certified sign of one cycle function.
pub fn cycle_sign(which: CycleFn, params: &Params) -> Result<Sign> {
    let which = which.validate()?;
    let mut r = refiner(params.rho(), params.phi(), params.bits());
    Ok(r.sign(|cf| cf.eval(which)))
}
