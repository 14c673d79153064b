//! Long-run average profit per turn.
//!
//! Game A is fair and contributes nothing. A turn of game B earns
//! `phi [x0 (2 p0 - 1) + (1 - x0)(2 p1 - 1)]` on average, which is
//! `phi x . zeta` for the profit vector `zeta`.

use rug::{Float, Rational};

use crate::classifier::functions::refiner;
use crate::classifier::CycleFn;
use crate::classifier::CycleFunctions;
use crate::dynamics::{step, GamePattern, Letter, Trajectory};
use crate::error::{Error, Result};
use crate::model::{power_b, Matrix3, Params, SimplexPoint};
use crate::numerics::{Real, Refiner, Sign};

/// `zeta = (2 p0 - 1, 2 p1 - 1, 2 p1 - 1)`
#[derive(Clone, Debug)]
pub struct ProfitVector {
    pub zeta: [Real; 3],
}

impl ProfitVector {
    pub fn new(params: &Params) -> Self {
        let sd = params.spectral();
        let b = params.bits();
        let z = |p: &Real| Float::with_val(b, p * 2u32) - 1u32;
        ProfitVector {
            zeta: [z(&sd.p0), z(&sd.p1), z(&sd.p1)],
        }
    }

    /// Expected profit of one B turn from `x`, before the factor `phi`.
    pub fn b_turn(&self, x: &SimplexPoint) -> Real {
        x.dot(&self.zeta)
    }
}

/// `phi pi zeta`, which vanishes since game B alone is fair.
pub fn mu_b_forever(params: &Params) -> Real {
    let zeta = ProfitVector::new(params);
    Float::with_val(params.bits(), params.phi_real() * params.pi().dot(&zeta.zeta))
}

/// `phi pi zeta` in exact arithmetic.
pub fn mu_b_forever_exact(rho: &Rational, phi: &Rational) -> Rational {
    let (p0, p1) = crate::model::win_probabilities(rho);
    let [pi0, pi1, pi2] = crate::model::stationary_exact(rho);
    let z0 = (p0 * 2u32) - 1u32;
    let z1 = (p1 * 2u32) - 1u32;
    (pi0 * z0 + (pi1 + pi2) * z1) * phi
}

fn require(r: &mut Refiner<CycleFunctions>, lower: CycleFn, upper: CycleFn, pattern: GamePattern) -> Result<()> {
    let lo = r.sign(|cf| cf.eval(lower));
    let hi = r.sign(|cf| cf.eval(upper));
    if lo == Sign::Negative && hi == Sign::Positive {
        Ok(())
    } else {
        Err(Error::NotACycle {
            pattern: format!("{pattern} ({lower} {lo}, {upper} {hi})"),
        })
    }
}

fn p0_minus_p1(params: &Params) -> Real {
    let sd = params.spectral();
    Float::with_val(params.bits(), &sd.p0 - &sd.p1)
}

/// `mu_[1,n] = 2 phi (p0 - p1) / (n + 1) * sum_{m<n} E_{n,m} / D_n`
pub fn mu_cycle_1n(n: u32, params: &Params) -> Result<Real> {
    let pattern = GamePattern::one_n(n)?;
    let mut r = refiner(params.rho(), params.phi(), params.bits());
    require(&mut r, CycleFn::Enm { n, m: n - 2 }, CycleFn::E { n }, pattern)?;
    let cf = r.base();
    let b = params.bits();
    let sum = (0..n).fold(Float::new(b), |acc, m| acc + cf.e_nm(n, m));
    let value = Float::with_val(b, sum / cf.d_n(n)) * params.phi_real() * p0_minus_p1(params) * 2u32 / (n + 1);
    Ok(value)
}

/// `mu_[1,n,1,n-2] = phi (p0 - p1) / n * [sum_{m<n} G_{n,m} + sum_{m<n-2} H_{n,m}] / I_n`
pub fn mu_cycle_1n1nm2(n: u32, params: &Params) -> Result<Real> {
    let pattern = GamePattern::one_n_one_nm2(n)?;
    let mut r = refiner(params.rho(), params.phi(), params.bits());
    require(&mut r, CycleFn::G { n, m: n - 2 }, CycleFn::H { n, m: n - 2 }, pattern)?;
    let cf = r.base();
    let b = params.bits();
    let g = (0..n).fold(Float::new(b), |acc, m| acc + cf.g_nm(n, m));
    let h = (0..n - 2).fold(Float::new(b), |acc, m| acc + cf.h_nm(n, m));
    let value = Float::with_val(b, (g + h) / cf.i_n(n)) * params.phi_real() * p0_minus_p1(params) / n;
    Ok(value)
}

/// `P_A (I + P_B + ... + P_B^(k-1)) zeta`, as a column.
fn partial_sum_column(params: &Params, k: u32, zeta: &[Real; 3]) -> [Real; 3] {
    let b = params.bits();
    let mut acc: [Real; 3] = std::array::from_fn(|_| Float::new(b));
    for m in 0..k {
        let col = power_b(params, m).apply(zeta);
        for (a, c) in acc.iter_mut().zip(col) {
            *a += c;
        }
    }
    params.p_a().apply(&acc)
}

/// Average profit per turn over one period of `pattern`, summed along the
/// cycle matrices rather than through the closed-form functions.
pub fn mu_cycle_matrix(pattern: GamePattern, params: &Params) -> Result<Real> {
    let zeta = ProfitVector::new(params).zeta;
    let phi = params.phi_real();
    let b = params.bits();
    match pattern {
        GamePattern::BForever => Ok(mu_b_forever(params)),
        GamePattern::OneN(n) => {
            let x = pattern.stationary(params)?;
            let v = x.dot(&partial_sum_column(params, n, &zeta));
            Ok(Float::with_val(b, v * phi) / (n + 1))
        }
        GamePattern::OneNOneNm2(n) => {
            let x = pattern.stationary(params)?;
            let first = x.dot(&partial_sum_column(params, n, &zeta));
            let shift: Matrix3 = params.p_a().mul(&power_b(params, n));
            let second = x.times(&shift).dot(&partial_sum_column(params, n - 2, &zeta));
            Ok(Float::with_val(b, (first + second) * phi) / (2 * n))
        }
    }
}

/// Closed-form average profit of the behaviour `pattern`.
pub fn mu(pattern: GamePattern, params: &Params) -> Result<Real> {
    match pattern {
        GamePattern::BForever => Ok(mu_b_forever(params)),
        GamePattern::OneN(n) => mu_cycle_1n(n, params),
        GamePattern::OneNOneNm2(n) => mu_cycle_1n1nm2(n, params),
    }
}

/// Per-turn profit of playing `letter` from `x`.
pub fn turn_profit(x: &SimplexPoint, letter: Letter, zeta: &ProfitVector, params: &Params) -> Real {
    match letter {
        Letter::A => Float::new(params.bits()),
        Letter::B => Float::with_val(params.bits(), zeta.b_turn(x) * params.phi_real()),
    }
}

/// Average over `games` of the per-turn profit, `states[t]` being the state
/// in which game `t` is played.
pub fn empirical_profit_over(states: &[SimplexPoint], games: &[Letter], params: &Params) -> Result<Real> {
    if games.is_empty() || states.len() < games.len() {
        return Err(Error::Precondition(
            "need one state per game and at least one game".into(),
        ));
    }
    let zeta = ProfitVector::new(params);
    let total = states
        .iter()
        .zip(games)
        .fold(Float::new(params.bits()), |acc, (x, &g)| {
            acc + turn_profit(x, g, &zeta, params)
        });
    Ok(total / games.len() as u64)
}

pub fn empirical_profit(traj: &Trajectory) -> Result<Real> {
    empirical_profit_over(&traj.states, &traj.games, &traj.params)
}

/// Cesàro average over `turns` greedy turns from `start`, without keeping
/// the trajectory.
pub fn cesaro_profit(start: &SimplexPoint, params: &Params, turns: u64) -> Result<Real> {
    if turns == 0 {
        return Err(Error::Precondition("need at least one turn".into()));
    }
    let zeta = ProfitVector::new(params);
    let mut x = start.clone();
    let mut total = Float::new(params.bits());
    for _ in 0..turns {
        let (next, letter) = step(&x, params);
        total += turn_profit(&x, letter, &zeta, params);
        x = next;
    }
    Ok(total / turns)
}

/// `p0 - p1` is negative and the cycle sums are negative, so profits are
/// positive; exposed for reporting.
pub fn win_gap(params: &Params) -> Rational {
    let (p0, p1) = crate::model::win_probabilities(params.rho());
    p0 - p1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::iterate;
    use crate::numerics::{pow2, PrecisionConfig};

    fn params(rho: &str, phi: &str) -> Params {
        Params::parse(rho, phi, PrecisionConfig::default()).unwrap()
    }

    fn abs_diff(a: &Real, b: &Real) -> Real {
        Float::with_val(256, a - b).abs()
    }

    #[test]
    fn equilibrium_profit_is_exactly_zero() {
        for (rho, phi) in [((1, 3), (1, 2)), ((7, 9), (1, 1)), ((1, 100), (3, 5))] {
            assert_eq!(mu_b_forever_exact(&Rational::from(rho), &Rational::from(phi)), 0);
        }
    }

    #[test]
    fn fair_game_b() {
        for (rho, phi) in [("1/3", "1"), ("0.9", "0.1"), ("0.05", "0.7")] {
            assert!(mu_b_forever(&params(rho, phi)).abs() < pow2(256, -240));
        }
    }

    #[test]
    fn one_two_at_full_play() {
        let p = params("1/3", "1");
        let mu = mu_cycle_1n(2, &p).unwrap();
        assert!(mu > 0);
        let want = Float::with_val(256, Float::parse("0.0678632622679138226").unwrap());
        assert!(abs_diff(&mu, &want) < 1e-18);
        let m = mu_cycle_matrix(GamePattern::OneN(2), &p).unwrap();
        assert!(abs_diff(&mu, &m) < pow2(256, -200));
    }

    #[test]
    fn closed_and_matrix_forms_agree() {
        let p = params("1/3", "0.7");
        let a = mu_cycle_1n(2, &p).unwrap();
        let b = mu_cycle_matrix(GamePattern::OneN(2), &p).unwrap();
        assert!(abs_diff(&a, &b) < pow2(256, -200));

        let p = params("1/3", "0.68804");
        let a = mu_cycle_1n1nm2(4, &p).unwrap();
        assert!(a > 0);
        let b = mu_cycle_matrix(GamePattern::OneNOneNm2(4), &p).unwrap();
        assert!(abs_diff(&a, &b) < pow2(256, -200));

        let p = params("1/3", "0.675");
        let a = mu_cycle_1n(6, &p).unwrap();
        let b = mu_cycle_matrix(GamePattern::OneN(6), &p).unwrap();
        assert!(abs_diff(&a, &b) < pow2(256, -200));
    }

    #[test]
    fn rejects_absent_cycles() {
        assert!(matches!(
            mu_cycle_1n(4, &params("1/3", "1")),
            Err(Error::NotACycle { .. })
        ));
        assert!(matches!(
            mu_cycle_1n1nm2(4, &params("1/3", "0.688")),
            Err(Error::NotACycle { .. })
        ));
        assert!(mu_cycle_1n(3, &params("1/3", "1")).is_err());
    }

    #[test]
    fn empirical_matches_over_whole_periods() {
        let p = params("1/3", "0.68804");
        let pattern = GamePattern::OneNOneNm2(4);
        let start = pattern.stationary(&p).unwrap();
        let traj = iterate(&start, &p, 10 * pattern.period());
        let emp = empirical_profit(&traj).unwrap();
        let mu = mu_cycle_1n1nm2(4, &p).unwrap();
        assert!(abs_diff(&emp, &mu) < pow2(256, -64));
    }

    #[test]
    fn a_turns_contribute_nothing() {
        let p = params("1/3", "1");
        let traj = iterate(&GamePattern::OneN(2).stationary(&p).unwrap(), &p, 30);
        let full = empirical_profit(&traj).unwrap() * 30u32;
        let zeta = ProfitVector::new(&p);
        let b_only = traj
            .states
            .iter()
            .zip(&traj.games)
            .filter(|(_, &g)| g == Letter::B)
            .fold(Float::new(256), |acc, (x, &g)| acc + turn_profit(x, g, &zeta, &p));
        assert!(abs_diff(&full, &b_only) < pow2(256, -240));
    }

    #[test]
    fn b_forever_trajectory_earns_nothing() {
        // The tie at pi goes to A; every later turn is B and the profits
        // sum to a finite total, so the average decays like 1/T. Within
        // 2^-bits of pi rounding eventually forces a spurious A, so the run
        // is kept short of that.
        let prec = PrecisionConfig::new(512).unwrap();
        let p = Params::parse("1/3", "1/2", prec).unwrap();
        let traj = iterate(p.pi(), &p, 400);
        assert!(traj.games[1..].iter().all(|&g| g == Letter::B));
        let total = |t: usize| empirical_profit_over(&traj.states[..t], &traj.games[..t], &p).unwrap() * t as u32;
        let (mid, end) = (total(200), total(400));
        assert!(Float::with_val(512, &mid - &end).abs() < 1e-30);
        assert!(Float::with_val(512, &end / 400u32).abs() < 1e-3);
    }
}
