//! Lines in the `(x0, x1)` plane that cut `Delta_A` by the outcome of the
//! next few games.
//!
//! Starting from `x` in `Delta_A`, game A is played and then the first
//! coordinate after `n` plays of game B is affine in `(x0, x1)`. Its
//! comparison with `pi0` is the half-plane `alpha_n x0 + beta_n x1 < gamma_n`
//! (odd `n`, still in `Delta_B`) or `<= gamma_n` (even `n`, back in
//! `Delta_A`).

use rug::ops::Pow;
use rug::{Float, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{stationary_exact, Params, PhiBand};
use crate::numerics::Real;

/// Coefficients and axis intercepts of `alpha x0 + beta x1 = gamma`.
#[derive(Clone, Debug)]
pub struct LineFamily {
    pub n: u32,
    pub alpha: Real,
    pub beta: Real,
    pub gamma: Real,
    /// Intercept with `x0 = pi0`.
    pub a: Real,
    /// Intercept with `x1 = 0`.
    pub b: Real,
    /// Intercept with `x0 + x1 = 1`, as an `x0` value.
    pub c: Real,
}

impl LineFamily {
    fn from_coefficients(n: u32, alpha: Real, beta: Real, gamma: Real, pi0: &Real) -> Self {
        let bits = alpha.prec();
        let a = Float::with_val(bits, &gamma - Float::with_val(bits, &alpha * pi0)) / &beta;
        let b = Float::with_val(bits, &gamma / &alpha);
        let c = Float::with_val(bits, &gamma - &beta) / Float::with_val(bits, &alpha - &beta);
        LineFamily {
            n,
            alpha,
            beta,
            gamma,
            a,
            b,
            c,
        }
    }

    /// `alpha x0 + beta x1 - gamma`
    pub fn residual(&self, x0: &Real, x1: &Real) -> Real {
        let bits = self.alpha.prec();
        Float::with_val(bits, &self.alpha * x0) + Float::with_val(bits, &self.beta * x1) - &self.gamma
    }
}

/// Spectral closed forms, valid for every `n >= 1`.
pub fn line_family(n: u32, params: &Params) -> Result<LineFamily> {
    line_family_at(params.rho(), params.phi(), n, params.bits())
}

pub fn line_family_at(rho: &Rational, phi: &Rational, n: u32, bits: u32) -> Result<LineFamily> {
    if n == 0 {
        return Err(Error::BadIndex {
            which: "line family",
            n,
            m: 0,
        });
    }
    let f = |v: &Rational| Float::with_val(bits, v);
    let r = f(rho);
    let p = f(phi);
    let r2 = Float::with_val(bits, r.square_ref());
    let one_p_r2 = Float::with_val(bits, &r2 + 1u32);
    let q = Float::with_val(bits, &r + 1u32) + &r2;
    let s = {
        let t = Float::with_val(bits, &r2 + Float::with_val(bits, &r * 4u32)) + 1u32;
        Float::with_val(bits, &one_p_r2 * &t).sqrt()
    };
    let t = Float::with_val(bits, &p * 3u32) - 2u32;
    let centre = Float::with_val(bits, 1u32 - Float::with_val(bits, &p * 1.5f64));
    let spread = Float::with_val(bits, &p * Float::with_val(bits, 1u32 - &r)) * &s
        / (Float::with_val(bits, &r + 1u32) * &one_p_r2 * 2u32);
    let e1n = Float::with_val(bits, Float::with_val(bits, &centre + &spread).pow(n));
    let e2n = Float::with_val(bits, Float::with_val(bits, &centre - &spread).pow(n));
    let sign = if n.is_multiple_of(2) { 1 } else { -1 };

    let alpha = {
        let plus = Float::with_val(bits, &one_p_r2 + &s);
        let minus = Float::with_val(bits, &one_p_r2 - &s);
        let inner = Float::with_val(bits, &e2n * &plus) - Float::with_val(bits, &e1n * &minus);
        Float::with_val(bits, &t * inner) / Float::with_val(bits, &s * 4u32) * sign
    };
    let beta = {
        let inner = Float::with_val(bits, &e2n - &e1n) * &one_p_r2;
        Float::with_val(bits, &t * inner) / Float::with_val(bits, &s * 2u32) * sign
    };
    let gamma = {
        // bracket(±S) = phi q (3 + 3 rho^2 ± S) - (1 + rho^2)(1 + 2 rho + 3 rho^2 ± S)
        let base_a = Float::with_val(bits, &one_p_r2 * 3u32);
        let base_b = Float::with_val(bits, &r * 2u32) + Float::with_val(bits, &r2 * 3u32) + 1u32;
        let pq = Float::with_val(bits, &p * &q);
        let bracket = |sg: i32| {
            let sv = Float::with_val(bits, &s * sg);
            let left = Float::with_val(bits, &pq * Float::with_val(bits, &base_a + &sv));
            let right = Float::with_val(bits, &one_p_r2 * Float::with_val(bits, &base_b + &sv));
            left - right
        };
        let inner = Float::with_val(bits, &e2n * bracket(1)) - Float::with_val(bits, &e1n * bracket(-1));
        inner / (Float::with_val(bits, &q * &s) * 4u32) * sign
    };
    let pi0 = f(&stationary_exact(rho)[0]);
    Ok(LineFamily::from_coefficients(n, alpha, beta, gamma, &pi0))
}

/// Exact coefficients for `n = 1, 2`, where the spectral forms collapse to
/// rational functions of `(rho, phi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactLine {
    pub n: u32,
    pub alpha: Rational,
    pub beta: Rational,
    pub gamma: Rational,
}

fn poly(x: &Rational, coeffs: &[i32]) -> Rational {
    coeffs.iter().rev().fold(Rational::new(), |acc, &c| acc * x + c)
}

impl ExactLine {
    pub fn new(n: u32, rho: &Rational, phi: &Rational) -> Result<Self> {
        let r = rho;
        let f = phi;
        let one_p_r = Rational::from(r + 1u32);
        let one_m_r = 1u32 - r.clone();
        let one_p_r2 = poly(r, &[1, 0, 1]);
        let q = poly(r, &[1, 1, 1]);
        let t = Rational::from(f * 3u32) - 2u32;
        let f2 = Rational::from(f.square_ref());
        let f3 = Rational::from(&f2 * f);
        let (alpha, beta, gamma) = match n {
            1 => {
                let alpha = (&t * ((f * poly(r, &[2, 1])) - &one_p_r)) / Rational::from(&one_p_r * 2u32);
                let beta = Rational::from(f * &t) * &one_m_r / Rational::from(&one_p_r * 2u32);
                let num = Rational::from(&one_p_r * &one_p_r2) - (f * poly(r, &[3, 1])) * &q
                    + Rational::from(&f2 * 3u32) * &q;
                let gamma = num / (Rational::from(&one_p_r * &q) * 2u32);
                (alpha, beta, gamma)
            }
            2 => {
                let one_p_r_sq = Rational::from(one_p_r.square_ref());
                let inner = Rational::from(&one_p_r_sq * &one_p_r2)
                    - Rational::from(f * 2u32) * &one_p_r * poly(r, &[2, 1]) * &one_p_r2
                    + (&f2 * poly(r, &[4, 5, 3, 5, 1]));
                let den = Rational::from(&one_p_r_sq * &one_p_r2) * 2u32;
                let alpha = (&t * inner) / &den;
                let beta = Rational::from(t.square_ref()) * f * &one_m_r / Rational::from(&one_p_r * 2u32);
                let num = -(&one_p_r_sq * Rational::from(one_p_r2.square_ref()))
                    + Rational::from(f * &one_p_r) * poly(r, &[5, 1]) * &one_p_r2 * &q
                    - Rational::from(&f2 * 2u32) * &one_p_r2 * poly(r, &[5, 5, -1]) * &q
                    + Rational::from(&f3 * &q) * poly(r, &[7, 5, 3, 5, -2]);
                let gamma = num / (den * &q);
                (alpha, beta, gamma)
            }
            _ => {
                return Err(Error::BadIndex {
                    which: "exact line",
                    n,
                    m: 0,
                })
            }
        };
        Ok(ExactLine { n, alpha, beta, gamma })
    }

    pub fn a(&self, pi0: &Rational) -> Rational {
        (&self.gamma - Rational::from(&self.alpha * pi0)) / &self.beta
    }

    pub fn b(&self) -> Rational {
        Rational::from(&self.gamma / &self.alpha)
    }

    pub fn c(&self) -> Rational {
        Rational::from(&self.gamma - &self.beta) / Rational::from(&self.alpha - &self.beta)
    }

    /// `alpha x0 + beta x1 - gamma`
    pub fn residual(&self, x0: &Rational, x1: &Rational) -> Rational {
        Rational::from(&self.alpha * x0) + Rational::from(&self.beta * x1) - &self.gamma
    }

    pub fn to_real(&self, bits: u32, pi0: &Rational) -> LineFamily {
        let f = |v: &Rational| Float::with_val(bits, v);
        LineFamily::from_coefficients(self.n, f(&self.alpha), f(&self.beta), f(&self.gamma), &f(pi0))
    }
}

/// The line `x1 = slope x0 + intercept` restricted to one piece of the
/// simplex.
#[derive(Clone, Debug, Serialize)]
pub struct BoundedLine {
    #[serde(serialize_with = "crate::numerics::serialize_real")]
    pub intercept: Real,
    pub nonempty: bool,
}

/// The three lines of initial states that reach the B-forever line after
/// one, two or three further games (`A`, `BA`, `BBA`).
#[derive(Clone, Debug, Serialize)]
pub struct BForeverLines {
    #[serde(serialize_with = "crate::numerics::serialize_real")]
    pub slope: Real,
    /// States in `Delta_A` that play A then B forever.
    pub f: BoundedLine,
    /// States in `Delta_B` that play B, A, then B forever.
    pub g: BoundedLine,
    /// States in `Delta_B` that play B, B, A, then B forever.
    pub h: BoundedLine,
}

impl BForeverLines {
    pub fn f_at(&self, x: &Real) -> Real {
        Float::with_val(x.prec(), &self.slope * x) + &self.f.intercept
    }
}

/// Whether `y = m x + c` with `m < -1` meets `{lo <= x <= hi, y >= 0, x + y <= 1}`.
fn meets_piece(m: &Real, c: &Real, lo: &Real, hi: &Real) -> bool {
    let bits = m.prec();
    // y >= 0  <=>  x <= -c/m ;  x + y <= 1  <=>  x >= (1 - c)/(1 + m)
    let upper = Float::with_val(bits, -c.clone()) / m;
    let lower = Float::with_val(bits, 1u32 - c.clone()) / Float::with_val(bits, m + 1u32);
    let from = if lower > *lo { lower } else { lo.clone() };
    let to = if upper < *hi { upper } else { hi.clone() };
    from <= to
}

pub fn b_forever_lines(params: &Params) -> Result<BForeverLines> {
    if params.phi_band() != PhiBand::BelowPhi2 {
        return Err(Error::Precondition("B-forever lines need 2/3 < phi < phi2".into()));
    }
    let bits = params.bits();
    let sd = params.spectral();
    let r = params.rho_real();
    let p = params.phi_real();
    let pi = params.pi();
    let s = &sd.s;
    let r2 = Float::with_val(bits, r.square_ref());
    let one_p_r2 = Float::with_val(bits, &r2 + 1u32);
    let one_p_r = Float::with_val(bits, &r + 1u32);
    let t = Float::with_val(bits, &p * 3u32) - 2u32;
    let slope = -(Float::with_val(bits, s / &one_p_r2) + 1u32) / 2u32;

    // 2 (phi - 2 pi1)(1 + rho^2) + (phi - 2 pi0)(1 + rho^2 + S)
    let common = {
        let d1 = Float::with_val(bits, &p - Float::with_val(bits, pi.x1() * 2u32));
        let d0 = Float::with_val(bits, &p - Float::with_val(bits, pi.x0() * 2u32));
        Float::with_val(bits, &d1 * &one_p_r2) * 2u32 + d0 * Float::with_val(bits, &one_p_r2 + s)
    };
    let f_int = Float::with_val(bits, &common / &t) / (Float::with_val(bits, &one_p_r2 * 2u32));

    // (1 + 2 rho)(1 + rho^2) + S
    let k = Float::with_val(bits, Float::with_val(bits, &r * 2u32) + 1u32) * &one_p_r2 + s;
    let pt = Float::with_val(bits, &p * &t);
    let g1 = Float::with_val(bits, &pt * &k) - Float::with_val(bits, &one_p_r * &common);
    let g2 = Float::with_val(bits, &t * &one_p_r) * &one_p_r2
        + Float::with_val(bits, &p * Float::with_val(bits, 1u32 - &r)) * s;
    let g_int = g1 / Float::with_val(bits, &t * &g2);

    let poly = |c: &[i32]| c.iter().rev().fold(Float::new(bits), |acc, &ci| acc * &r + ci);
    let one_p_r_sq = Float::with_val(bits, one_p_r.square_ref());
    let h1 = {
        let inner = Float::with_val(bits, &one_p_r * &k) * 2u32
            - Float::with_val(bits, &p * (poly(&[2, 6, 3, 4, 3]) + poly(&[2, 2, -1]) * s));
        Float::with_val(bits, &pt * inner) - Float::with_val(bits, &one_p_r_sq * &common)
    };
    let h2 = {
        let base = Float::with_val(bits, &one_p_r_sq * &one_p_r2);
        let p2 = Float::with_val(bits, p.square_ref());
        Float::with_val(bits, &base * -2i32) + Float::with_val(bits, &p * &base) * 6u32
            - p2 * poly(&[5, 10, 6, 10, 5])
            - Float::with_val(bits, &pt * poly(&[1, 0, -1])) * s
    };
    let h_int = h1 / Float::with_val(bits, &t * &h2);

    let zero = Float::new(bits);
    let one = Float::with_val(bits, 1);
    let in_a = |c: &Real| meets_piece(&slope, c, pi.x0(), &one);
    // Delta_B is x0 < pi0; the closed test is exact except on its edge.
    let in_b = |c: &Real| meets_piece(&slope, c, &zero, pi.x0());
    Ok(BForeverLines {
        f: BoundedLine {
            nonempty: in_a(&f_int),
            intercept: f_int,
        },
        g: BoundedLine {
            nonempty: in_b(&g_int),
            intercept: g_int,
        },
        h: BoundedLine {
            nonempty: in_b(&h_int),
            intercept: h_int,
        },
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{in_b_forever, step, Letter};
    use crate::model::{power_b, SimplexPoint};
    use crate::numerics::{pow2, PrecisionConfig};

    fn params(rho: &str, phi: &str) -> Params {
        Params::parse(rho, phi, PrecisionConfig::default()).unwrap()
    }

    fn close(a: &Real, b: &Real, bits: i32) -> bool {
        Float::with_val(256, a - b).abs() < pow2(256, -bits)
    }

    #[test]
    fn spectral_forms_match_matrix_route() {
        let p = params("0.3", "0.85");
        for n in 1..=8u32 {
            let lf = line_family(n, &p).unwrap();
            let m = p.p_a().mul(&power_b(&p, n));
            let sign = if n % 2 == 1 { 1 } else { -1 };
            let col = |i: usize| m.get(i, 0).clone();
            let alpha = Float::with_val(256, col(0) - col(2)) * sign;
            let beta = Float::with_val(256, col(1) - col(2)) * sign;
            let gamma = Float::with_val(256, p.pi0() - col(2)) * sign;
            assert!(close(&lf.alpha, &alpha, 240), "alpha n={n}");
            assert!(close(&lf.beta, &beta, 240), "beta n={n}");
            assert!(close(&lf.gamma, &gamma, 240), "gamma n={n}");
        }
    }

    #[test]
    fn explicit_forms_match_spectral() {
        for (rho, phi) in [("1/3", "0.9"), ("0.7", "0.7"), ("0.1", "1")] {
            let p = params(rho, phi);
            for n in [1, 2] {
                let exact = ExactLine::new(n, p.rho(), p.phi()).unwrap();
                let real = exact.to_real(256, &stationary_exact(p.rho())[0]);
                let lf = line_family(n, &p).unwrap();
                for (a, b) in [
                    (&real.alpha, &lf.alpha),
                    (&real.beta, &lf.beta),
                    (&real.gamma, &lf.gamma),
                    (&real.a, &lf.a),
                    (&real.b, &lf.b),
                    (&real.c, &lf.c),
                ] {
                    assert!(close(a, b, 230), "rho={rho} phi={phi} n={n}");
                }
            }
        }
    }

    #[test]
    fn all_lines_share_a_point() {
        let p = params("0.4", "0.8");
        let t = Float::with_val(256, p.phi_real() * 3u32) - 2u32;
        let pi = p.pi();
        let x0 = Float::with_val(256, p.phi_real() - Float::with_val(256, pi.x0() * 2u32)) / &t;
        let x1 = Float::with_val(256, p.phi_real() - Float::with_val(256, pi.x1() * 2u32)) / &t;
        for n in 1..=10 {
            let lf = line_family(n, &p).unwrap();
            let res = lf.residual(&x0, &x1);
            assert!(res.abs() < pow2(256, -230), "n={n}");
        }
    }

    #[test]
    fn first_line_crosses_axis_right_of_pi0() {
        for (rho, phi) in [("1/3", "0.7"), ("0.9", "0.8"), ("0.05", "1")] {
            let p = params(rho, phi);
            let l = ExactLine::new(1, p.rho(), p.phi()).unwrap();
            assert!(l.b() > stationary_exact(p.rho())[0]);
            assert!(l.alpha > 0 && l.beta > 0 && l.gamma > 0);
        }
    }

    #[test]
    fn f_line_empty_below_phi3() {
        let p = params("1/3", "0.7");
        let lines = b_forever_lines(&p).unwrap();
        assert!(!lines.f.nonempty);
        assert!(lines.slope < -1);
        assert!(lines.f_at(p.pi0()) > 0);
        let p = params("1/3", "0.85");
        assert!(b_forever_lines(&p).unwrap().f.nonempty);
        assert!(b_forever_lines(&params("1/3", "0.95")).is_err());
    }

    /// Midpoint of the part of `x1 = slope x0 + intercept` inside the simplex
    /// with `lo <= x0 <= hi`.
    fn point_on(slope: &Real, intercept: &Real, lo: f64, hi: f64) -> SimplexPoint {
        let upper = Float::with_val(256, -intercept.clone()) / slope;
        let lower = Float::with_val(256, 1u32 - intercept.clone()) / Float::with_val(256, slope + 1u32);
        let from = lower.max(&Float::with_val(256, lo));
        let to = upper.min(&Float::with_val(256, hi));
        assert!(from < to);
        let x0 = Float::with_val(256, &from + &to) / 2u32;
        let x1 = Float::with_val(256, slope * &x0) + intercept;
        SimplexPoint::from_x0_x1(x0, x1).unwrap()
    }

    #[test]
    fn f_g_h_lines_feed_the_b_forever_line() {
        let p = params("1/3", "0.85");
        let lines = b_forever_lines(&p).unwrap();
        let pi0 = p.pi0().to_f64();
        // f: one game A lands on the B-forever line
        let x = point_on(&lines.slope, &lines.f.intercept, pi0, 1.0);
        let (y, letter) = step(&x, &p);
        assert_eq!(letter, Letter::A);
        assert!(in_b_forever(&y, &p).unwrap().member);

        // g and h are nonempty only in thin slices near phi2; scan for them.
        let (mut g_hits, mut h_hits) = (0, 0);
        for i in 1..20 {
            let rho = Rational::from((i, 20));
            let pr = Params::new(rho.clone(), Rational::from(1), PrecisionConfig::default()).unwrap();
            let phi2 = pr.spectral().phi2.to_rational().unwrap();
            for j in 1..40 {
                let phi = Rational::from((2, 3)) + (&phi2 - Rational::from((2, 3))) * Rational::from((j, 40));
                let p = Params::new(rho.clone(), phi, PrecisionConfig::default()).unwrap();
                let lines = b_forever_lines(&p).unwrap();
                let pi0 = p.pi0().to_f64();
                if lines.g.nonempty {
                    g_hits += 1;
                    let x = point_on(&lines.slope, &lines.g.intercept, 0.0, pi0);
                    let y = x.times(p.p_b());
                    assert!(close(&lines.f_at(y.x0()), y.x1(), 200));
                }
                if lines.h.nonempty {
                    h_hits += 1;
                    let x = point_on(&lines.slope, &lines.h.intercept, 0.0, pi0);
                    let y = x.times(p.p_b());
                    let on_g = Float::with_val(256, &lines.slope * y.x0()) + &lines.g.intercept;
                    assert!(close(&on_g, y.x1(), 200));
                }
            }
        }
        assert!(g_hits > 0);
        let _ = h_hits;
    }

    #[test]
    fn lines_are_preimages_under_game_b() {
        // Affine identity, so points off the simplex are fine.
        let p = params("0.4", "0.8");
        let lines = b_forever_lines(&p).unwrap();
        let g = |x: &Real| Float::with_val(256, &lines.slope * x) + &lines.g.intercept;
        let h = |x: &Real| Float::with_val(256, &lines.slope * x) + &lines.h.intercept;
        let on = |x0: f64, line: &dyn Fn(&Real) -> Real| {
            let x0 = Float::with_val(256, x0);
            let x1 = line(&x0);
            let x2 = Float::with_val(256, 1u32 - Float::with_val(256, &x0 + &x1));
            crate::model::row_times(&[x0, x1, x2], p.p_b())
        };
        for x0 in [0.1, 0.2, 0.3] {
            let y = on(x0, &h);
            assert!(close(&g(&y[0]), &y[1], 200));
            let y = on(x0, &g);
            assert!(close(&lines.f_at(&y[0]), &y[1], 200));
        }
    }
}
