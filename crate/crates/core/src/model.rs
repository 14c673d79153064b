//! Game parameters, transition matrices, stationary distribution and the
//! spectral decomposition of the game-B chain.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rug::ops::Pow;
use rug::{Float, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{parse_rational, PrecisionConfig, Real, Refiner, Sign};

/// Game parameters `(rho, phi)`, held exactly, plus the working precision.
///
/// Derived constants (spectral data and the two transition matrices) are
/// computed on first use and shared between clones.
#[derive(Clone)]
pub struct Params {
    rho: Rational,
    phi: Rational,
    precision: PrecisionConfig,
    derived: OnceLock<Arc<Derived>>,
}

struct Derived {
    spectral: SpectralData,
    pa: Matrix3,
    pb: Matrix3,
}

impl fmt::Debug for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Params")
            .field("rho", &self.rho)
            .field("phi", &self.phi)
            .field("bits", &self.precision.bits())
            .finish()
    }
}

impl PartialEq for Params {
    fn eq(&self, other: &Self) -> bool {
        self.rho == other.rho && self.phi == other.phi && self.precision == other.precision
    }
}

impl Params {
    pub fn new(rho: Rational, phi: Rational, precision: PrecisionConfig) -> Result<Self> {
        if rho <= 0 || rho >= 1 {
            return Err(Error::InvalidParams(format!("rho must lie in (0,1), got {rho}")));
        }
        if phi <= 0 || phi > 1 {
            return Err(Error::InvalidParams(format!("phi must lie in (0,1], got {phi}")));
        }
        Ok(Params {
            rho,
            phi,
            precision,
            derived: OnceLock::new(),
        })
    }

    pub fn parse(rho: &str, phi: &str, precision: PrecisionConfig) -> Result<Self> {
        Params::new(parse_rational(rho)?, parse_rational(phi)?, precision)
    }

    pub fn rho(&self) -> &Rational {
        &self.rho
    }

    pub fn phi(&self) -> &Rational {
        &self.phi
    }

    pub fn precision(&self) -> &PrecisionConfig {
        &self.precision
    }

    pub fn bits(&self) -> u32 {
        self.precision.bits()
    }

    pub fn with_bits(&self, bits: u32) -> Params {
        Params {
            rho: self.rho.clone(),
            phi: self.phi.clone(),
            precision: self.precision.with_bits(bits),
            derived: OnceLock::new(),
        }
    }

    pub fn with_phi(&self, phi: Rational) -> Result<Params> {
        Params::new(self.rho.clone(), phi, self.precision.clone())
    }

    pub fn rho_real(&self) -> Real {
        self.precision.real(&self.rho)
    }

    pub fn phi_real(&self) -> Real {
        self.precision.real(&self.phi)
    }

    /// `3 phi - 2`, exactly.
    pub fn three_phi_minus_two(&self) -> Rational {
        Rational::from(&self.phi * 3u32) - 2u32
    }

    fn derived(&self) -> &Derived {
        self.derived.get_or_init(|| {
            let spectral = spectral_data(&self.rho, &self.phi, &self.precision).expect("Params guarantees 0 < rho < 1");
            let (pa, pb) = build_matrices(self);
            Arc::new(Derived { spectral, pa, pb })
        })
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.derived().spectral
    }

    pub fn p_a(&self) -> &Matrix3 {
        &self.derived().pa
    }

    pub fn p_b(&self) -> &Matrix3 {
        &self.derived().pb
    }

    pub fn pi(&self) -> &SimplexPoint {
        &self.spectral().pi
    }

    pub fn pi0(&self) -> &Real {
        &self.spectral().pi.x[0]
    }
}

/// A state `(x0, x1, x2)` of the population: fractions of players whose
/// capital is congruent to 0, 1, 2 mod 3.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint {
    x: [Real; 3],
}

impl SimplexPoint {
    /// Builds `(x0, x1, 1 - x0 - x1)` and checks it lies on the simplex.
    pub fn from_x0_x1(x0: Real, x1: Real) -> Result<Self> {
        let bits = x0.prec().max(x1.prec());
        let x2 = Float::with_val(bits, 1) - &x0 - &x1;
        SimplexPoint::new([x0, x1, x2])
    }

    pub fn new(x: [Real; 3]) -> Result<Self> {
        let bits = x.iter().map(|v| v.prec()).max().unwrap();
        let slack = crate::numerics::pow2(bits, 8 - bits as i32);
        if x.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidState("NaN coordinate".into()));
        }
        if let Some(v) = x.iter().find(|v| -(*v).clone() > slack) {
            return Err(Error::InvalidState(format!("negative coordinate {v}")));
        }
        let sum = Float::with_val(bits, &x[0] + &x[1]) + &x[2];
        if Float::with_val(bits, &sum - 1u32).abs() > slack {
            return Err(Error::InvalidState(format!("coordinates sum to {sum}")));
        }
        Ok(SimplexPoint { x })
    }

    /// No validation; for internal images of valid states.
    pub(crate) fn from_array(x: [Real; 3]) -> Self {
        SimplexPoint { x }
    }

    pub fn parse(x0: &str, x1: &str, precision: &PrecisionConfig) -> Result<Self> {
        SimplexPoint::from_x0_x1(
            precision.real(&parse_rational(x0)?),
            precision.real(&parse_rational(x1)?),
        )
    }

    pub fn uniform(precision: &PrecisionConfig) -> Self {
        let third = Float::with_val(precision.bits(), 1) / 3u32;
        SimplexPoint {
            x: [third.clone(), third.clone(), third],
        }
    }

    pub fn x0(&self) -> &Real {
        &self.x[0]
    }

    pub fn x1(&self) -> &Real {
        &self.x[1]
    }

    pub fn x2(&self) -> &Real {
        &self.x[2]
    }

    pub fn coords(&self) -> &[Real; 3] {
        &self.x
    }

    /// Row vector times matrix.
    pub fn times(&self, m: &Matrix3) -> SimplexPoint {
        SimplexPoint {
            x: row_times(&self.x, m),
        }
    }

    /// Divides by the coordinate sum.
    pub fn renormalized(mut self) -> SimplexPoint {
        let bits = self.x[0].prec();
        let sum = Float::with_val(bits, &self.x[0] + &self.x[1]) + &self.x[2];
        for v in self.x.iter_mut() {
            *v /= &sum;
        }
        self
    }

    pub fn dist_inf(&self, other: &SimplexPoint) -> Real {
        let bits = self.x[0].prec();
        let mut best = Float::new(bits);
        for (a, b) in self.x.iter().zip(other.x.iter()) {
            let d = Float::with_val(bits, a - b).abs();
            if d > best {
                best = d;
            }
        }
        best
    }

    /// Inner product with a column vector.
    pub fn dot(&self, col: &[Real; 3]) -> Real {
        let bits = self.x[0].prec();
        Float::with_val(bits, Float::dot(self.x.iter().zip(col.iter())))
    }
}

pub(crate) fn row_times(x: &[Real; 3], m: &Matrix3) -> [Real; 3] {
    let bits = x[0].prec();
    std::array::from_fn(|j| Float::with_val(bits, Float::dot(x.iter().zip(m.rows.iter().map(|row| &row[j])))))
}

/// Dense 3x3 real matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix3 {
    rows: [[Real; 3]; 3],
}

/// A row-stochastic [`Matrix3`].
pub type TransitionMatrix = Matrix3;

impl Matrix3 {
    pub fn from_rows(rows: [[Real; 3]; 3]) -> Self {
        Matrix3 { rows }
    }

    pub fn from_rationals(rows: &[[Rational; 3]; 3], bits: u32) -> Self {
        Matrix3 {
            rows: std::array::from_fn(|i| std::array::from_fn(|j| Float::with_val(bits, &rows[i][j]))),
        }
    }

    pub fn identity(bits: u32) -> Self {
        Matrix3 {
            rows: std::array::from_fn(|i| std::array::from_fn(|j| Float::with_val(bits, u32::from(i == j)))),
        }
    }

    pub fn diagonal(d: [Real; 3]) -> Self {
        let bits = d[0].prec();
        let mut m = Matrix3::identity(bits);
        for (i, v) in d.into_iter().enumerate() {
            m.rows[i][i] = v;
        }
        m
    }

    pub fn bits(&self) -> u32 {
        self.rows[0][0].prec()
    }

    pub fn get(&self, i: usize, j: usize) -> &Real {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[[Real; 3]; 3] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> [Real; 3] {
        std::array::from_fn(|i| self.rows[i][j].clone())
    }

    pub fn mul(&self, other: &Matrix3) -> Matrix3 {
        Matrix3 {
            rows: std::array::from_fn(|i| row_times(&self.rows[i], other)),
        }
    }

    /// Matrix times column vector.
    pub fn apply(&self, v: &[Real; 3]) -> [Real; 3] {
        let bits = self.bits();
        std::array::from_fn(|i| Float::with_val(bits, Float::dot(self.rows[i].iter().zip(v.iter()))))
    }

    /// `n`-fold product by repeated multiplication.
    pub fn pow_naive(&self, n: u32) -> Matrix3 {
        (0..n).fold(Matrix3::identity(self.bits()), |acc, _| acc.mul(self))
    }

    pub fn determinant(&self) -> Real {
        let m = &self.rows;
        let bits = self.bits();
        let minor = |a: usize, b: usize, c: usize, d: usize| -> Real {
            Float::with_val(bits, &m[1][a] * &m[2][b]) - Float::with_val(bits, &m[1][c] * &m[2][d])
        };
        Float::with_val(bits, &m[0][0] * minor(1, 2, 2, 1)) - Float::with_val(bits, &m[0][1] * minor(0, 2, 2, 0))
            + Float::with_val(bits, &m[0][2] * minor(0, 1, 1, 0))
    }

    pub fn inverse(&self) -> Result<Matrix3> {
        let bits = self.bits();
        let det = self.determinant();
        if det.is_zero() || det.is_nan() {
            return Err(Error::SingularMatrix);
        }
        let m = &self.rows;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| -> Real {
            Float::with_val(bits, &m[r0][c0] * &m[r1][c1]) - Float::with_val(bits, &m[r0][c1] * &m[r1][c0])
        };
        // adjugate: inv[i][j] = cofactor(j, i) / det
        let others = |k: usize| -> (usize, usize) {
            match k {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            }
        };
        let rows = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let (r0, r1) = others(j);
                let (c0, c1) = others(i);
                let mut c = cof(r0, r1, c0, c1);
                if (i + j) % 2 == 1 {
                    c = -c;
                }
                c / &det
            })
        });
        Ok(Matrix3 { rows })
    }

    pub fn row_sums(&self) -> [Real; 3] {
        let bits = self.bits();
        std::array::from_fn(|i| Float::with_val(bits, Float::sum(self.rows[i].iter())))
    }

    pub fn max_abs_diff(&self, other: &Matrix3) -> Real {
        let bits = self.bits();
        let mut best = Float::new(bits);
        for (a, b) in self.rows.iter().flatten().zip(other.rows.iter().flatten()) {
            let d = Float::with_val(bits, a - b).abs();
            if d > best {
                best = d;
            }
        }
        best
    }

    /// The row vector `x` with `x M = x` and `x0 + x1 + x2 = 1`, obtained by
    /// eliminating `x2` and solving the remaining 2x2 system.
    pub fn stationary_row(&self) -> Result<SimplexPoint> {
        let bits = self.bits();
        let m = &self.rows;
        let sub = |a: &Real, b: &Real| Float::with_val(bits, a - b);
        let a00 = sub(&m[0][0], &m[2][0]) - 1u32;
        let a01 = sub(&m[1][0], &m[2][0]);
        let a10 = sub(&m[0][1], &m[2][1]);
        let a11 = sub(&m[1][1], &m[2][1]) - 1u32;
        let b0 = -m[2][0].clone();
        let b1 = -m[2][1].clone();
        let det = Float::with_val(bits, &a00 * &a11) - Float::with_val(bits, &a01 * &a10);
        if det.is_zero() || det.is_nan() {
            return Err(Error::SingularMatrix);
        }
        let x0 = (Float::with_val(bits, &b0 * &a11) - Float::with_val(bits, &a01 * &b1)) / &det;
        let x1 = (Float::with_val(bits, &a00 * &b1) - Float::with_val(bits, &b0 * &a10)) / &det;
        let x2 = Float::with_val(bits, 1) - &x0 - &x1;
        Ok(SimplexPoint::from_array([x0, x1, x2]))
    }
}

/// Closed-form constants of the game-B chain at given `(rho, phi)`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub s: Real,
    pub e1_circ: Real,
    pub e2_circ: Real,
    pub e1: Real,
    pub e2: Real,
    pub phi1: Real,
    pub phi2: Real,
    pub phi3: Real,
    pub pi: SimplexPoint,
    pub r: Matrix3,
    pub l: Matrix3,
    pub p0: Real,
    pub p1: Real,
}

/// Win probabilities `(p0, p1)` of game B.
pub fn win_probabilities(rho: &Rational) -> (Rational, Rational) {
    let rho2 = Rational::from(rho.square_ref());
    let p0 = &rho2 / Rational::from(&rho2 + 1u32);
    let p1 = Rational::from(Rational::from(rho + 1u32).recip_ref());
    (p0, p1)
}

/// The stationary distribution of `P_B` in exact arithmetic.
pub fn stationary_exact(rho: &Rational) -> [Rational; 3] {
    let rho2 = Rational::from(rho.square_ref());
    let den = (Rational::from(rho + 1u32) + &rho2) * 2u32;
    [
        Rational::from(&rho2 + 1u32) / &den,
        (rho * Rational::from(rho + 1u32)) / &den,
        Rational::from(rho + 1u32) / den,
    ]
}

pub fn stationary(params: &Params) -> SimplexPoint {
    let bits = params.bits();
    let exact = stationary_exact(params.rho());
    SimplexPoint::from_array(std::array::from_fn(|i| Float::with_val(bits, &exact[i])))
}

fn chain_rows(p0: &Rational, p1: &Rational, phi: &Rational) -> [[Rational; 3]; 3] {
    let z = Rational::new();
    let q0 = 1u32 - p0.clone();
    let q1 = 1u32 - p1.clone();
    let base = [
        [z.clone(), p0.clone(), q0],
        [q1.clone(), z.clone(), p1.clone()],
        [p1.clone(), q1, z],
    ];
    let keep = 1u32 - phi.clone();
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut v = Rational::from(phi * &base[i][j]);
            if i == j {
                v += &keep;
            }
            v
        })
    })
}

/// Exact entries of `(P_A, P_B)`.
pub fn exact_matrices(rho: &Rational, phi: &Rational) -> ([[Rational; 3]; 3], [[Rational; 3]; 3]) {
    let half = Rational::from((1, 2));
    let (p0, p1) = win_probabilities(rho);
    (chain_rows(&half, &half, phi), chain_rows(&p0, &p1, phi))
}

/// `(P_A, P_B)`: each is `(1 - phi) I + phi P°`, with `P°` the one-step chain
/// for the capital mod 3. Game A is the `p0 = p1 = 1/2` chain.
pub fn build_matrices(params: &Params) -> (TransitionMatrix, TransitionMatrix) {
    let bits = params.bits();
    let (pa, pb) = exact_matrices(params.rho(), params.phi());
    (Matrix3::from_rationals(&pa, bits), Matrix3::from_rationals(&pb, bits))
}

/// Spectral constants from their closed forms.
pub fn spectral_data(rho: &Rational, phi: &Rational, precision: &PrecisionConfig) -> Result<SpectralData> {
    if *rho <= 0 || *rho >= 1 {
        return Err(Error::DegenerateSpectrum { rho: rho.to_string() });
    }
    let bits = precision.bits();
    let f = |v: &Rational| Float::with_val(bits, v);
    let rho_r = f(rho);
    let phi_r = f(phi);
    let one = Float::with_val(bits, 1);
    let rho2 = Float::with_val(bits, rho_r.square_ref());
    let rho3 = Float::with_val(bits, &rho2 * &rho_r);
    let one_p_rho = Float::with_val(bits, &rho_r + 1u32);
    let one_p_rho2 = Float::with_val(bits, &rho2 + 1u32);
    let one_m_rho = Float::with_val(bits, 1u32 - &rho_r);
    let q = Float::with_val(bits, &one_p_rho + &rho2); // 1 + rho + rho^2

    let s = {
        let t = Float::with_val(bits, &rho2 + Float::with_val(bits, &rho_r * 4u32)) + 1u32;
        Float::with_val(bits, &one_p_rho2 * &t).sqrt()
    };
    let half_gap = Float::with_val(bits, &one_m_rho * &s) / (Float::with_val(bits, &one_p_rho * &one_p_rho2) * 2u32);
    let e1_circ = Float::with_val(bits, &half_gap - 0.5f64);
    let e2_circ = Float::with_val(bits, -0.5f64) - &half_gap;
    let mix = |e: &Real| Float::with_val(bits, &one - &phi_r) + Float::with_val(bits, &phi_r * e);
    let e1 = mix(&e1_circ);
    let e2 = mix(&e2_circ);
    let phi1 = Float::with_val(bits, &one - &e2_circ).recip();
    let phi2 = Float::with_val(bits, &one - &e1_circ).recip();
    let phi3 = {
        let num = Float::with_val(bits, &one_m_rho * &one_p_rho2) + Float::with_val(bits, &one_p_rho * &s);
        Float::with_val(bits, &one_p_rho * &num) / (Float::with_val(bits, &q * &s) * 2u32)
    };

    // r1, r2 columns; r0 = (1,1,1)
    let a = Float::with_val(bits, &one - &rho2); // 1 - rho^2
    let b = Float::with_val(bits, &rho2 * 2u32) + &rho3 + &rho_r + 2u32; // 2 + rho + 2rho^2 + rho^3
    let c = Float::with_val(bits, &rho3 * 2u32) + &rho2 + Float::with_val(bits, &rho_r * 2u32) + 1u32; // 1 + 2rho + rho^2 + 2rho^3
    let rho_s = Float::with_val(bits, &rho_r * &s);
    let r1 = [
        Float::with_val(bits, &one_p_rho * Float::with_val(bits, &a - &s)),
        Float::with_val(bits, &b + &rho_s),
        -Float::with_val(bits, &c - &s),
    ];
    let r2 = [
        Float::with_val(bits, &one_p_rho * Float::with_val(bits, &a + &s)),
        Float::with_val(bits, &b - &rho_s),
        -Float::with_val(bits, &c + &s),
    ];
    let r = Matrix3::from_rows(std::array::from_fn(|i| [one.clone(), r1[i].clone(), r2[i].clone()]));
    let l = r.inverse()?;

    let (p0, p1) = win_probabilities(rho);
    let pi_exact = stationary_exact(rho);
    let pi = SimplexPoint::from_array(std::array::from_fn(|i| f(&pi_exact[i])));
    Ok(SpectralData {
        s,
        e1_circ,
        e2_circ,
        e1,
        e2,
        phi1,
        phi2,
        phi3,
        pi,
        r,
        l,
        p0: f(&p0),
        p1: f(&p1),
    })
}

/// `P_B^n = R diag(1, e1^n, e2^n) L`.
pub fn power_b(params: &Params, n: u32) -> TransitionMatrix {
    let sd = params.spectral();
    let bits = params.bits();
    let d = Matrix3::diagonal([
        Float::with_val(bits, 1),
        Float::with_val(bits, (&sd.e1).pow(n)),
        Float::with_val(bits, (&sd.e2).pow(n)),
    ]);
    sd.r.mul(&d).mul(&sd.l)
}

/// `P_A^n` with diagonal `1 - 2 d_n` and off-diagonal `d_n = [1 - (1 - 3phi/2)^n] / 3`.
pub fn power_a(params: &Params, n: u32) -> TransitionMatrix {
    let bits = params.bits();
    let ratio = Float::with_val(bits, 1) - Float::with_val(bits, params.phi_real() * 1.5f64);
    let dn = (Float::with_val(bits, 1) - Float::with_val(bits, (&ratio).pow(n))) / 3u32;
    let diag = Float::with_val(bits, 1) - Float::with_val(bits, &dn * 2u32);
    Matrix3::from_rows(std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { diag.clone() } else { dn.clone() })
    }))
}

/// Position of `phi` relative to the eigenvalue thresholds, one band per row
/// of the sign table of `(e1, e2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PhiBand {
    BelowPhi1,
    AtPhi1,
    BelowTwoThirds,
    AtTwoThirds,
    BelowPhi2,
    AtPhi2,
    AbovePhi2,
}

impl PhiBand {
    /// Case number 1 to 7, in increasing `phi`.
    pub fn case(self) -> u8 {
        self as u8 + 1
    }
}

fn threshold_sign(rho: &Rational, phi: &Rational, bits: u32, second: bool) -> Ordering {
    let (rho, phi) = (rho.clone(), phi.clone());
    let mut refiner = Refiner::new(bits.max(crate::numerics::MIN_BITS), move |b| {
        let prec = PrecisionConfig::new(b).expect("refiner stays within bounds");
        let sd = spectral_data(&rho, &phi, &prec).expect("rho already validated");
        let threshold = if second { sd.phi2 } else { sd.phi1 };
        Float::with_val(b, &phi) - threshold
    });
    match refiner.sign(|d| d.clone()) {
        Sign::Positive => Ordering::Greater,
        Sign::Negative => Ordering::Less,
        Sign::ZeroAmbiguous => Ordering::Equal,
    }
}

impl Params {
    /// Locates `phi` among `phi1 < 2/3 < phi2`. Comparisons against the
    /// irrational thresholds are certified by precision refinement; a
    /// difference that vanishes at the cap counts as equality.
    pub fn phi_band(&self) -> PhiBand {
        let two_thirds = Rational::from((2, 3));
        match self.phi.cmp(&two_thirds) {
            Ordering::Equal => PhiBand::AtTwoThirds,
            Ordering::Less => match threshold_sign(&self.rho, &self.phi, self.bits(), false) {
                Ordering::Less => PhiBand::BelowPhi1,
                Ordering::Equal => PhiBand::AtPhi1,
                Ordering::Greater => PhiBand::BelowTwoThirds,
            },
            Ordering::Greater => match threshold_sign(&self.rho, &self.phi, self.bits(), true) {
                Ordering::Less => PhiBand::BelowPhi2,
                Ordering::Equal => PhiBand::AtPhi2,
                Ordering::Greater => PhiBand::AbovePhi2,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(rho: &str, phi: &str) -> Params {
        Params::parse(rho, phi, PrecisionConfig::default()).unwrap()
    }

    fn tol(bits: i32) -> Real {
        crate::numerics::pow2(256, -bits)
    }

    #[test]
    fn rejects_out_of_range() {
        let p = PrecisionConfig::default();
        assert!(Params::parse("0", "0.5", p.clone()).is_err());
        assert!(Params::parse("1", "0.5", p.clone()).is_err());
        assert!(Params::parse("1/3", "0", p.clone()).is_err());
        assert!(Params::parse("1/3", "1.01", p.clone()).is_err());
        assert!(Params::parse("1/3", "1", p).is_ok());
        assert!(spectral_data(&Rational::from(1), &Rational::from(1), &PrecisionConfig::default()).is_err());
    }

    #[test]
    fn original_parrondo_coins() {
        let (p0, p1) = win_probabilities(&Rational::from((1, 3)));
        assert_eq!(p0, Rational::from((1, 10)));
        assert_eq!(p1, Rational::from((3, 4)));
    }

    #[test]
    fn full_play_has_no_identity_part() {
        let p = params("1/3", "1");
        let (pa, pb) = build_matrices(&p);
        for i in 0..3 {
            assert!(pa.get(i, i).is_zero());
            assert!(pb.get(i, i).is_zero());
        }
        assert_eq!(*pa.get(0, 1), 0.5f64);
        assert_eq!(*pb.get(0, 1), Float::with_val(256, &Rational::from((1, 10))));
    }

    #[test]
    fn rows_sum_to_one_exactly() {
        let p = params("1/2", "1/2");
        let (pa, pb) = build_matrices(&p);
        for m in [pa, pb] {
            for s in m.row_sums() {
                assert_eq!(s, 1);
            }
        }
    }

    #[test]
    fn stationary_at_one_third() {
        let pi = stationary_exact(&Rational::from((1, 3)));
        assert_eq!(
            pi,
            [
                Rational::from((5, 13)),
                Rational::from((2, 13)),
                Rational::from((6, 13))
            ]
        );
        // independent check: pi P_B = pi by direct multiplication
        let p = params("1/3", "3/4");
        let image = p.pi().times(p.p_b());
        assert!(image.dist_inf(p.pi()) < tol(240));
    }

    #[test]
    fn spectral_constants_at_one_third() {
        let p = params("1/3", "3/4");
        let sd = p.spectral();
        let s_oracle = Float::with_val(256, 220).sqrt() / 9u32;
        assert!(Float::with_val(256, &sd.s - &s_oracle).abs() < tol(250));
        assert_eq!(format!("{:.4}", sd.phi1.to_f64()), "0.5345");
        assert_eq!(format!("{:.4}", sd.phi2.to_f64()), "0.8856");
        assert_eq!(format!("{:.4}", sd.phi3.to_f64()), "0.8228");
        // closed forms for phi1, phi2 in terms of S
        let rho = p.rho_real();
        let k = Float::with_val(256, &rho + 1u32) * (Float::with_val(256, rho.square_ref()) + 1u32);
        let g = Float::with_val(256, 1u32 - &rho) * &sd.s;
        let phi1 = Float::with_val(256, &k * 2u32) / (Float::with_val(256, &k * 3u32) + &g);
        let phi2 = Float::with_val(256, &k * 2u32) / (Float::with_val(256, &k * 3u32) - &g);
        assert!(Float::with_val(256, &phi1 - &sd.phi1).abs() < tol(240));
        assert!(Float::with_val(256, &phi2 - &sd.phi2).abs() < tol(240));
    }

    #[test]
    fn eigenvectors_match_eigenvalues() {
        let p = params("0.2", "0.9");
        let sd = p.spectral();
        let pb = p.p_b();
        for (col, e) in [(1, &sd.e1), (2, &sd.e2)] {
            let v = sd.r.column(col);
            let image = pb.apply(&v);
            for i in 0..3 {
                let want = Float::with_val(256, &v[i] * e);
                assert!(Float::with_val(256, &image[i] - &want).abs() < tol(240));
            }
        }
        let id = sd.r.mul(&sd.l);
        assert!(id.max_abs_diff(&Matrix3::identity(256)) < tol(240));
    }

    #[test]
    fn at_two_thirds_eigenvalues_are_opposite() {
        let p = params("1/3", "2/3");
        let sd = p.spectral();
        assert!(Float::with_val(256, &sd.e1 + &sd.e2).abs() < tol(250));
        assert!(sd.e1 > 0);
    }

    #[test]
    fn powers_zero_and_one() {
        let p = params("1/3", "3/4");
        let id = Matrix3::identity(256);
        assert!(power_b(&p, 0).max_abs_diff(&id) < tol(240));
        assert!(power_a(&p, 0).max_abs_diff(&id) < tol(250));
        assert!(power_b(&p, 1).max_abs_diff(p.p_b()) < tol(240));
        assert!(power_a(&p, 1).max_abs_diff(p.p_a()) < tol(250));
    }

    #[test]
    fn power_b_seven_against_naive_product() {
        let p = params("1/3", "3/4");
        assert!(power_b(&p, 7).max_abs_diff(&p.p_b().pow_naive(7)) < tol(200));
    }

    #[test]
    fn power_a_closed_form() {
        let p = params("1/3", "2/3");
        let third = Float::with_val(256, 1) / 3u32;
        for v in power_a(&p, 1).rows().iter().flatten() {
            assert!(Float::with_val(256, v - &third).abs() < tol(250));
        }
        let p = params("1/3", "1");
        assert!(power_a(&p, 3).max_abs_diff(&p.p_a().pow_naive(3)) < tol(240));
    }

    #[test]
    fn stationary_row_solver() {
        let p = params("0.4", "0.8");
        let pi = p.p_b().stationary_row().unwrap();
        assert!(pi.dist_inf(p.pi()) < tol(240));
    }

    #[test]
    fn simplex_validation() {
        let prec = PrecisionConfig::default();
        assert!(SimplexPoint::parse("0.5", "0.6", &prec).is_err());
        assert!(SimplexPoint::parse("-0.1", "0.6", &prec).is_err());
        let x = SimplexPoint::parse("1/3", "1/3", &prec).unwrap();
        assert!(x.dist_inf(&SimplexPoint::uniform(&prec)) < tol(250));
    }

    #[test]
    fn eigenvalue_sign_table() {
        let cases = [
            ("0.3", PhiBand::BelowPhi1),
            ("0.6", PhiBand::BelowTwoThirds),
            ("2/3", PhiBand::AtTwoThirds),
            ("0.8", PhiBand::BelowPhi2),
            ("0.95", PhiBand::AbovePhi2),
        ];
        for (phi, band) in cases {
            let p = params("1/3", phi);
            assert_eq!(p.phi_band(), band, "phi = {phi}");
            let sd = p.spectral();
            match band.case() {
                1 => assert!(sd.e1 > 0 && sd.e2 > 0),
                3..=5 => assert!(sd.e1 > 0 && sd.e2 < 0),
                _ => assert!(sd.e1 < 0 && sd.e2 < 0),
            }
        }
        assert_eq!(PhiBand::BelowPhi1.case(), 1);
        assert_eq!(PhiBand::AbovePhi2.case(), 7);
    }
}
