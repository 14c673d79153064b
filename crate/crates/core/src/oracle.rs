//! Direct simulation checked against the analytic predictions.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::{Float, Rational};
use serde::Serialize;

use crate::classifier::{classify, Classification, Regime};
use crate::dynamics::{detect_with, BehaviorKind, DetectOptions, GamePattern};
use crate::error::{Error, Result};
use crate::model::{Params, SimplexPoint};
use crate::numerics::{format_exact, format_rational, PrecisionConfig, Real};

#[derive(Clone, Debug, Serialize)]
pub struct CycleReport {
    pub pattern: GamePattern,
    pub period: usize,
    pub steps: usize,
    /// Largest coordinate gap between the detected period and the
    /// stationary states of the cycle map.
    #[serde(serialize_with = "crate::numerics::serialize_real")]
    pub drift: Real,
}

/// Starts at the stationary state of `pattern`'s cycle map and checks that
/// the greedy dynamics follows `pattern` from the first step.
pub fn verify_cycle_from_stationary(params: &Params, pattern: GamePattern) -> Result<CycleReport> {
    let predicted = classify(params)?;
    if predicted.regime == Regime::GasEquilibrium {
        return Err(Error::Precondition(
            "phi <= 2/3: the equilibrium is globally stable, no cycle to verify".into(),
        ));
    }
    if !predicted.cycles.contains(&pattern) {
        return Err(Error::Precondition(format!(
            "{pattern} is not predicted here (predicted {})",
            predicted.cycles_label()
        )));
    }
    let start = pattern.stationary(params)?;
    let period = pattern.period();
    let opts = DetectOptions {
        budget: (8 * period).max(256),
        ..Default::default()
    };
    let (found, traj) = detect_with(&start, params, &opts).map_err(|e| Error::Mismatch {
        step: 0,
        detail: format!("detection failed: {e}"),
    })?;
    let letters = pattern.letters();
    if let Some(step) = (0..traj.games.len()).find(|&t| traj.games[t] != letters[t % period]) {
        return Err(Error::Mismatch {
            step,
            detail: format!(
                "played {} where {pattern} plays {}",
                traj.games[step],
                letters[step % period]
            ),
        });
    }
    if found.kind != BehaviorKind::Cycle || found.pattern != pattern || found.transient_length != 0 {
        return Err(Error::Mismatch {
            step: found.transient_length,
            detail: format!(
                "detected {} after a transient of {}",
                found.pattern, found.transient_length
            ),
        });
    }
    // Stationary states along the cycle: start, then start times each prefix.
    let mut drift = Float::new(params.bits());
    let mut x = start;
    for (t, state) in found.cycle_states.iter().enumerate() {
        let d = state.dist_inf(&x);
        if d > drift {
            drift = d;
        }
        let m = if letters[t] == crate::dynamics::Letter::A {
            params.p_a()
        } else {
            params.p_b()
        };
        x = x.times(m);
    }
    if drift > params.precision().cycle_eps() {
        return Err(Error::Mismatch {
            step: 0,
            detail: format!("cycle states drift {} from the stationary cycle", format_exact(&drift)),
        });
    }
    Ok(CycleReport {
        pattern,
        period,
        steps: found.steps,
        drift,
    })
}

/// Uniform sample on the simplex from sorted uniform gaps.
pub fn random_state(rng: &mut impl Rng, prec: &PrecisionConfig) -> SimplexPoint {
    let (mut u, mut v): (f64, f64) = (rng.random(), rng.random());
    if u > v {
        std::mem::swap(&mut u, &mut v);
    }
    let b = prec.bits();
    let x0 = Float::with_val(b, u);
    let x1 = Float::with_val(b, v - u);
    let x2 = Float::with_val(b, 1u32 - Float::with_val(b, v));
    SimplexPoint::new([x0, x1, x2]).expect("sorted gaps lie on the simplex")
}

/// A start whose observed behaviour the prediction does not account for.
#[derive(Clone, Debug, Serialize)]
pub struct Finding {
    pub rho: String,
    pub phi: String,
    pub bits: u32,
    pub seed: u64,
    pub point_index: usize,
    pub start_index: usize,
    pub start: [String; 3],
    pub observed: String,
    pub predicted: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointSummary {
    pub rho: String,
    pub phi: String,
    pub predicted: String,
    /// Observed behaviour label to count.
    pub observed: BTreeMap<String, usize>,
    pub agreements: usize,
    pub disagreements: usize,
    pub undetected: usize,
    pub findings: Vec<Finding>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub seed: u64,
    pub bits: u32,
    pub starts_per_point: usize,
    pub budget: usize,
    pub points: Vec<PointSummary>,
    pub agreements: usize,
    pub disagreements: usize,
    pub undetected: usize,
}

impl SweepSummary {
    pub fn findings(&self) -> impl Iterator<Item = &Finding> {
        self.points.iter().flat_map(|p| p.findings.iter())
    }
}

const BFOREVER_LABEL: &str = "B-forever";

fn predicted_label(c: &Classification) -> String {
    match c.regime {
        Regime::GasEquilibrium => BFOREVER_LABEL.into(),
        Regime::CycleSet => c.cycles_label(),
    }
}

fn agrees(c: &Classification, observed: GamePattern) -> bool {
    match c.regime {
        Regime::GasEquilibrium => observed == GamePattern::BForever,
        Regime::CycleSet => c.cycles.contains(&observed),
    }
}

/// Which start stream a grid point draws from.
fn point_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn sweep_point(
    index: usize,
    rho: &Rational,
    phi: &Rational,
    prec: &PrecisionConfig,
    starts: usize,
    budget: usize,
    seed: u64,
) -> PointSummary {
    let rho_s = format_rational(rho, 40);
    let phi_s = format_rational(phi, 40);
    let mut summary = PointSummary {
        rho: rho_s.clone(),
        phi: phi_s.clone(),
        predicted: String::new(),
        observed: BTreeMap::new(),
        agreements: 0,
        disagreements: 0,
        undetected: 0,
        findings: Vec::new(),
    };
    let prediction = Params::new(rho.clone(), phi.clone(), prec.clone()).and_then(|p| Ok((classify(&p)?, p)));
    let (classification, params) = match prediction {
        Ok(v) => v,
        Err(e) => {
            summary.predicted = format!("error: {e}");
            return summary;
        }
    };
    summary.predicted = predicted_label(&classification);

    let mut rng = point_rng(seed, index);
    let states: Vec<SimplexPoint> = (0..starts).map(|_| random_state(&mut rng, prec)).collect();
    let opts = DetectOptions {
        budget,
        ..Default::default()
    };
    let outcomes: Vec<Result<GamePattern>> = states
        .par_iter()
        .map(|x| detect_with(x, &params, &opts).map(|(d, _)| d.pattern))
        .collect();

    for (start_index, (x, outcome)) in states.iter().zip(outcomes).enumerate() {
        let (label, ok) = match &outcome {
            Ok(pattern) => (pattern.to_string(), agrees(&classification, *pattern)),
            Err(Error::Undetected { .. }) => {
                summary.undetected += 1;
                ("undetected".to_string(), false)
            }
            Err(e) => (format!("error: {e}"), false),
        };
        *summary.observed.entry(label.clone()).or_default() += 1;
        if ok {
            summary.agreements += 1;
            continue;
        }
        if !matches!(outcome, Err(Error::Undetected { .. })) {
            summary.disagreements += 1;
        }
        summary.findings.push(Finding {
            rho: rho_s.clone(),
            phi: phi_s.clone(),
            bits: prec.bits(),
            seed,
            point_index: index,
            start_index,
            start: x.coords().clone().map(|c| format_exact(&c)),
            observed: label,
            predicted: summary.predicted.clone(),
        });
    }
    summary
}

/// Runs `starts_per_point` random starts at every grid point and compares
/// each detected behaviour with [`classify`]. Deterministic in `seed`.
pub fn sweep(
    grid: &[(Rational, Rational)],
    starts_per_point: usize,
    budget: usize,
    seed: u64,
    prec: &PrecisionConfig,
) -> Result<SweepSummary> {
    if grid.is_empty() {
        return Err(Error::Precondition("empty grid".into()));
    }
    let points: Vec<PointSummary> = grid
        .par_iter()
        .enumerate()
        .map(|(i, (rho, phi))| sweep_point(i, rho, phi, prec, starts_per_point, budget, seed))
        .collect();
    Ok(SweepSummary {
        seed,
        bits: prec.bits(),
        starts_per_point,
        budget,
        agreements: points.iter().map(|p| p.agreements).sum(),
        disagreements: points.iter().map(|p| p.disagreements).sum(),
        undetected: points.iter().map(|p| p.undetected).sum(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(rho: &str, phi: &str) -> Params {
        Params::parse(rho, phi, PrecisionConfig::default()).unwrap()
    }

    fn point(rho: (i32, i32), phi: &str) -> (Rational, Rational) {
        (Rational::from(rho), crate::numerics::parse_rational(phi).unwrap())
    }

    #[test]
    fn stationary_cycles_reproduce() {
        verify_cycle_from_stationary(&params("1/3", "1"), GamePattern::OneN(2)).unwrap();
        verify_cycle_from_stationary(&params("1/3", "0.68804"), GamePattern::OneNOneNm2(4)).unwrap();
        verify_cycle_from_stationary(&params("1/3", "0.675"), GamePattern::OneN(6)).unwrap();
    }

    #[test]
    fn rejects_equilibrium_and_unpredicted_cycles() {
        let err = verify_cycle_from_stationary(&params("1/3", "0.5"), GamePattern::OneN(2)).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let err = verify_cycle_from_stationary(&params("1/3", "1"), GamePattern::OneN(4)).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn small_sweeps() {
        let prec = PrecisionConfig::default();
        let grid = [point((1, 3), "1/2"), point((1, 3), "1")];
        let s = sweep(&grid, 100, 10_000, 7, &prec).unwrap();
        assert_eq!(s.points[0].observed.get("B-forever"), Some(&100));
        assert_eq!(s.points[1].observed.get("[1,2]"), Some(&100));
        assert_eq!(s.agreements, 200);
    }

    #[test]
    fn sweep_is_deterministic() {
        let prec = PrecisionConfig::default();
        let grid = [point((1, 3), "0.7"), point((1, 5), "0.9")];
        let a = serde_json::to_string(&sweep(&grid, 20, 5_000, 3, &prec).unwrap()).unwrap();
        let b = serde_json::to_string(&sweep(&grid, 20, 5_000, 3, &prec).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn samples_stay_on_the_simplex() {
        let prec = PrecisionConfig::default();
        let mut rng = point_rng(1, 0);
        for _ in 0..100 {
            let x = random_state(&mut rng, &prec);
            let sum = Float::with_val(256, x.x0() + x.x1()) + x.x2();
            assert!(Float::with_val(256, sum - 1u32).abs() < 1e-70);
        }
    }
}
