//! The twelve-region partition of `G_{4,2} >= 0`, where `[1,2]` is the
//! expected unique limit cycle, and the vertex-image checks that prove it
//! in regions 3, 9, 10 and 11.
//!
//! The intercepts `a_n`, `b_n` for `n = 1, 2`, the thresholds
//! `(3/4)(1-rho) + (2/3)rho` and `1 - rho/3`, and the images of rational
//! vertices under `P_A P_B^k` are all rational in `(rho, phi)`, so those
//! predicates are decided exactly. Only `G_{4,2}` and `phi3` go through
//! certified floating point.

use rug::{Float, Rational};
use serde::Serialize;

use super::functions::refiner;
use super::lines::ExactLine;
use crate::error::{Error, Result};
use crate::model::{exact_matrices, spectral_data, stationary_exact, Params};
use crate::numerics::{decimal_string, DecimalMode, PrecisionConfig, Refiner, Sign};

type Row = [Rational; 3];
type Mat = [[Rational; 3]; 3];

fn row_times(x: &Row, m: &Mat) -> Row {
    std::array::from_fn(|j| (0..3).fold(Rational::new(), |acc, k| acc + Rational::from(&x[k] * &m[k][j])))
}

fn point(x0: &Rational, x1: &Rational) -> Row {
    let x2 = (1u32 - x0.clone()) - x1;
    [x0.clone(), x1.clone(), x2]
}

/// Exact quantities behind the region predicates.
#[derive(Clone, Debug)]
pub struct RegionQuantities {
    pub pi0: Rational,
    pub line1: ExactLine,
    pub line2: ExactLine,
    pub a1: Rational,
    pub a2: Rational,
    pub b1: Rational,
    pub b2: Rational,
    pub c1: Rational,
    /// `(3/4)(1 - rho) + (2/3) rho`
    pub low_phi: Rational,
    /// `1 - rho/3`
    pub high_phi: Rational,
    /// `alpha_1 f0 + beta_1 f1 - gamma_1` with `f = (1,0,0) P_A P_B`.
    pub corner_residual: Rational,
    pa: Mat,
    pb: Mat,
}

impl RegionQuantities {
    pub fn new(rho: &Rational, phi: &Rational) -> Result<Self> {
        let pi0 = stationary_exact(rho)[0].clone();
        let line1 = ExactLine::new(1, rho, phi)?;
        let line2 = ExactLine::new(2, rho, phi)?;
        let (pa, pb) = exact_matrices(rho, phi);
        let f = row_times(&row_times(&point(&Rational::from(1), &Rational::new()), &pa), &pb);
        let corner_residual = line1.residual(&f[0], &f[1]);
        let low_phi = Rational::from((3, 4)) * (1u32 - rho.clone()) + Rational::from((2, 3)) * rho;
        let high_phi = 1u32 - Rational::from(rho / 3u32);
        Ok(RegionQuantities {
            a1: line1.a(&pi0),
            a2: line2.a(&pi0),
            b1: line1.b(),
            b2: line2.b(),
            c1: line1.c(),
            pi0,
            line1,
            line2,
            low_phi,
            high_phi,
            corner_residual,
            pa,
            pb,
        })
    }

    fn one_minus_pi0(&self) -> Rational {
        1u32 - self.pi0.clone()
    }

    /// `x P_A P_B^k`
    fn image(&self, x: &Row, k: u32) -> Row {
        let mut y = row_times(x, &self.pa);
        for _ in 0..k {
            y = row_times(&y, &self.pb);
        }
        y
    }
}

fn certified(mut r: Refiner<Float>, what: &str) -> Result<Sign> {
    match r.sign(|v| v.clone()) {
        Sign::ZeroAmbiguous => Err(Error::PredicateAmbiguous(what.to_string())),
        s => Ok(s),
    }
}

fn phi_minus_phi3(rho: &Rational, phi: &Rational, bits: u32) -> Result<Sign> {
    let (rho, phi) = (rho.clone(), phi.clone());
    let r = Refiner::new(bits, move |b| {
        let prec = PrecisionConfig::new(b).expect("refiner stays within bounds");
        let sd = spectral_data(&rho, &phi, &prec).expect("rho already validated");
        Float::with_val(b, &phi) - sd.phi3
    });
    certified(r, "phi - phi3")
}

/// Certified sign of `G_{4,2}` at `params`.
pub fn g42_sign(params: &Params) -> Sign {
    refiner(params.rho(), params.phi(), params.bits()).sign(|cf| cf.g_nm(4, 2))
}

/// All region indices whose predicates hold. A well-formed point matches
/// exactly one.
pub fn matching_regions(params: &Params) -> Result<Vec<u8>> {
    let two_thirds = Rational::from((2, 3));
    if *params.phi() <= two_thirds {
        return Err(Error::NotInPartition);
    }
    match g42_sign(params) {
        Sign::Negative => return Err(Error::NotInPartition),
        Sign::ZeroAmbiguous => return Err(Error::PredicateAmbiguous("G_4_2".into())),
        Sign::Positive => {}
    }
    let q = RegionQuantities::new(params.rho(), params.phi())?;
    let phi = params.phi();
    let omp = q.one_minus_pi0();
    let below_phi3 = || -> Result<bool> { Ok(phi_minus_phi3(params.rho(), phi, params.bits())?.is_negative()) };
    let a2_low = q.a2 < omp;
    let preds: [bool; 12] = [
        a2_low && *phi < q.low_phi,
        !a2_low && q.b2 < 1 && *phi < q.low_phi,
        q.b2 >= 1,
        q.b2 < 1 && *phi > q.low_phi && below_phi3()?,
        q.b1 > 1 && !below_phi3()?,
        q.b1 <= 1 && !a2_low && q.b2 < q.b1,
        // The literal predicate also covers region 1; region 1 has b1 > 1.
        a2_low && *phi < q.high_phi && q.b1 <= 1,
        *phi >= q.high_phi && q.b2 < q.b1,
        q.b2 >= q.b1 && *phi < q.high_phi,
        *phi >= q.high_phi && !a2_low,
        q.b2 >= q.b1 && a2_low && q.corner_residual < 0,
        q.corner_residual >= 0,
    ];
    Ok((1..=12u8).filter(|&i| preds[i as usize - 1]).collect())
}

/// Region 1..12 containing `params`.
pub fn region12(params: &Params) -> Result<u8> {
    let matches = matching_regions(params)?;
    match matches.as_slice() {
        [one] => Ok(*one),
        [] => Err(Error::PredicateAmbiguous("no region predicate holds".into())),
        many => Err(Error::PredicateAmbiguous(format!("regions {many:?} all hold"))),
    }
}

/// One mapped vertex and the inequalities it must satisfy.
#[derive(Clone, Debug, Serialize)]
pub struct VertexCheck {
    pub label: &'static str,
    /// Image coordinates, 30 decimals.
    pub image: [String; 3],
    /// `x0 >= pi0`
    pub in_a: bool,
    /// `alpha_1 x0 + beta_1 x1 < gamma_1`
    pub first_line: bool,
    /// `alpha_2 x0 + beta_2 x1 <= gamma_2`, checked only in region 3.
    pub second_line: Option<bool>,
}

impl VertexCheck {
    pub fn pass(&self) -> bool {
        self.in_a && self.first_line && self.second_line.unwrap_or(true)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexReport {
    pub region: u8,
    pub checks: Vec<VertexCheck>,
    /// Intercept inequalities implied by `b2 >= 1` (region 3 only).
    pub intercepts: Vec<(&'static str, bool)>,
}

impl VertexReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(VertexCheck::pass) && self.intercepts.iter().all(|(_, ok)| *ok)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out: Vec<_> = self.checks.iter().filter(|c| !c.pass()).map(|c| c.label).collect();
        out.extend(self.intercepts.iter().filter(|(_, ok)| !ok).map(|(l, _)| *l));
        out
    }
}

fn check(q: &RegionQuantities, label: &'static str, image: Row, with_second: bool) -> VertexCheck {
    VertexCheck {
        label,
        in_a: image[0] >= q.pi0,
        first_line: q.line1.residual(&image[0], &image[1]) < 0,
        second_line: with_second.then(|| q.line2.residual(&image[0], &image[1]) <= 0),
        image: image.map(|v| decimal_string(&v, 30, DecimalMode::Round)),
    }
}

/// Maps the vertices listed in the stability proof for regions 3, 9, 10
/// and 11 and checks that every image lands in `Delta_ABBA`.
pub fn check_region_vertices(params: &Params) -> Result<VertexReport> {
    let region = region12(params)?;
    let q = RegionQuantities::new(params.rho(), params.phi())?;
    let zero = Rational::new();
    let one = Rational::from(1);
    let pi0 = q.pi0.clone();
    let omp = q.one_minus_pi0();
    let e0 = point(&one, &zero);
    let b1_pt = point(&q.b1, &zero);
    let c1_pt = point(&q.c1, &(1u32 - q.c1.clone()));
    let pi0_bottom = point(&pi0, &zero);
    let pi0_top = point(&pi0, &omp);
    let pi0_a1 = point(&pi0, &q.a1);

    let (checks, intercepts) = match region {
        3 => {
            let checks = vec![
                check(&q, "(1,0,0) P_A P_B^2", q.image(&e0, 2), true),
                check(&q, "(pi0,0,1-pi0) P_A P_B^2", q.image(&pi0_bottom, 2), true),
                check(&q, "(pi0,1-pi0,0) P_A P_B^2", q.image(&pi0_top, 2), true),
            ];
            let intercepts = vec![
                ("a1 > 1-pi0", q.a1 > omp),
                ("a2 >= 1-pi0", q.a2 >= omp),
                ("b1 > 1", q.b1 > 1),
                ("b2 >= 1", q.b2 >= 1),
            ];
            (checks, intercepts)
        }
        9 => (
            vec![
                check(&q, "f", q.image(&e0, 1), false),
                check(&q, "g", q.image(&b1_pt, 1), false),
                check(&q, "h", q.image(&c1_pt, 1), false),
                check(&q, "r", q.image(&pi0_bottom, 2), false),
                check(&q, "s", q.image(&b1_pt, 2), false),
                check(&q, "t", q.image(&c1_pt, 2), false),
                check(&q, "u", q.image(&pi0_top, 2), false),
            ],
            Vec::new(),
        ),
        10 | 11 => (
            vec![
                check(&q, "f", q.image(&e0, 1), false),
                check(&q, "g", q.image(&b1_pt, 1), false),
                check(&q, "h", q.image(&pi0_a1, 1), false),
                check(&q, "i", q.image(&pi0_top, 1), false),
                check(&q, "s", q.image(&b1_pt, 2), false),
                check(&q, "t", q.image(&pi0_a1, 2), false),
                check(&q, "u", q.image(&pi0_bottom, 2), false),
            ],
            Vec::new(),
        ),
        other => return Err(Error::WrongRegion(other)),
    };
    Ok(VertexReport {
        region,
        checks,
        intercepts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::PrecisionConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(rho: &str, phi: &str) -> Params {
        Params::parse(rho, phi, PrecisionConfig::default()).unwrap()
    }

    #[test]
    fn known_points() {
        for (phi, region) in [("1", 11), ("0.95", 11), ("0.9", 11), ("0.75", 3), ("0.7", 2)] {
            assert_eq!(region12(&params("1/3", phi)).unwrap(), region, "phi={phi}");
        }
    }

    #[test]
    fn outside_partition() {
        assert_eq!(region12(&params("1/3", "0.5")), Err(Error::NotInPartition));
        assert_eq!(region12(&params("1/3", "0.68")), Err(Error::NotInPartition));
    }

    #[test]
    fn predicates_are_exclusive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = 0;
        while seen < 400 {
            let rho = Rational::from((rng.random_range(1..1000u32), 1000u32));
            let phi = Rational::from((667 + rng.random_range(0..333u32), 1000u32));
            let p = Params::new(rho, phi, PrecisionConfig::default()).unwrap();
            match matching_regions(&p) {
                Ok(m) => {
                    assert_eq!(m.len(), 1, "{:?} {:?} {m:?}", p.rho(), p.phi());
                    seen += 1;
                }
                Err(Error::NotInPartition) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn vertex_checks_at_reference_points() {
        let report = check_region_vertices(&params("1/3", "1")).unwrap();
        assert_eq!(report.checks.len(), 7);
        assert!(report.all_pass(), "{:?}", report.failures());
        assert!(check_region_vertices(&params("1/3", "0.95")).unwrap().all_pass());
        let r3 = check_region_vertices(&params("1/3", "0.75")).unwrap();
        assert_eq!(r3.region, 3);
        assert!(r3.all_pass(), "{:?}", r3.failures());
        assert_eq!(
            check_region_vertices(&params("1/3", "0.7")).unwrap_err(),
            Error::WrongRegion(2)
        );
    }
}
