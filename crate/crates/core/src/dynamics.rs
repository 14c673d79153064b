//! The greedy map, trajectories, and detection of the eventual behaviour.

use std::fmt;
use std::str::FromStr;

use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{power_b, Matrix3, Params, PhiBand, SimplexPoint};
use crate::numerics::{certified_sign, Real, Sign};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Letter {
    A,
    B,
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Letter::A => "A",
            Letter::B => "B",
        })
    }
}

pub fn letters_to_string(letters: &[Letter]) -> String {
    letters.iter().map(|l| l.to_string()).collect()
}

/// Eventual game pattern: B forever, one A then `n` B's, or one A, `n` B's,
/// one A, `n - 2` B's.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GamePattern {
    BForever,
    OneN(u32),
    OneNOneNm2(u32),
}

impl GamePattern {
    pub fn one_n(n: u32) -> Result<Self> {
        if n < 2 || n % 2 == 1 {
            return Err(Error::BadIndex {
                which: "[1,n]",
                n,
                m: 0,
            });
        }
        Ok(GamePattern::OneN(n))
    }

    pub fn one_n_one_nm2(n: u32) -> Result<Self> {
        if n < 4 || n % 2 == 1 {
            return Err(Error::BadIndex {
                which: "[1,n,1,n-2]",
                n,
                m: 0,
            });
        }
        Ok(GamePattern::OneNOneNm2(n))
    }

    /// One period of letters, starting with the A that precedes the longest
    /// run of B's.
    pub fn letters(&self) -> Vec<Letter> {
        let run = |n: u32| std::iter::once(Letter::A).chain(std::iter::repeat_n(Letter::B, n as usize));
        match *self {
            GamePattern::BForever => vec![Letter::B],
            GamePattern::OneN(n) => run(n).collect(),
            GamePattern::OneNOneNm2(n) => run(n).chain(run(n - 2)).collect(),
        }
    }

    pub fn period(&self) -> usize {
        match *self {
            GamePattern::BForever => 1,
            GamePattern::OneN(n) => n as usize + 1,
            GamePattern::OneNOneNm2(n) => 2 * n as usize,
        }
    }

    /// Product of the transition matrices over one period.
    pub fn cycle_map(&self, params: &Params) -> Matrix3 {
        let pa = params.p_a();
        match *self {
            GamePattern::BForever => params.p_b().clone(),
            GamePattern::OneN(n) => pa.mul(&power_b(params, n)),
            GamePattern::OneNOneNm2(n) => pa.mul(&power_b(params, n)).mul(pa).mul(&power_b(params, n - 2)),
        }
    }

    /// Fixed point of [`GamePattern::cycle_map`] on the simplex.
    pub fn stationary(&self, params: &Params) -> Result<SimplexPoint> {
        match self {
            GamePattern::BForever => Ok(params.pi().clone()),
            _ => self.cycle_map(params).stationary_row(),
        }
    }

    /// Recognizes a periodic letter block up to rotation. Returns the pattern
    /// and the offset within `block` at which its canonical period starts.
    pub fn from_block(block: &[Letter]) -> Option<(GamePattern, usize)> {
        let a_positions: Vec<usize> = (0..block.len()).filter(|&i| block[i] == Letter::A).collect();
        let p = block.len();
        match a_positions.len() {
            0 if p == 1 => Some((GamePattern::BForever, 0)),
            1 => {
                let n = (p - 1) as u32;
                GamePattern::one_n(n).ok().map(|pat| (pat, a_positions[0]))
            }
            2 => {
                let (i, j) = (a_positions[0], a_positions[1]);
                let first = (j - i - 1) as u32;
                let second = (p - 1 - (j - i)) as u32;
                let (n, start) = if first == second + 2 {
                    (first, i)
                } else if second == first + 2 {
                    (second, j)
                } else {
                    return None;
                };
                GamePattern::one_n_one_nm2(n).ok().map(|pat| (pat, start))
            }
            _ => None,
        }
    }
}

impl fmt::Display for GamePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GamePattern::BForever => f.write_str("B-forever"),
            GamePattern::OneN(n) => write!(f, "[1,{n}]"),
            GamePattern::OneNOneNm2(n) => write!(f, "[1,{n},1,{}]", n - 2),
        }
    }
}

impl FromStr for GamePattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse { input: s.to_string() };
        let t = s.trim();
        if t.eq_ignore_ascii_case("B-forever") || t == "B" {
            return Ok(GamePattern::BForever);
        }
        let inner = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
        let parts: Vec<u32> = inner
            .split(',')
            .map(|x| x.trim().parse::<u32>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match parts.as_slice() {
            [1, n] => GamePattern::one_n(*n),
            [1, n, 1, m] if *m + 2 == *n => GamePattern::one_n_one_nm2(*n),
            _ => Err(bad()),
        }
    }
}

impl Serialize for GamePattern {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Greedy choice: A iff `x0 >= pi0`. Differences within a few ulps of zero
/// count as a tie, which goes to A.
pub fn choose(x: &SimplexPoint, params: &Params) -> Letter {
    let bits = params.bits();
    let diff = Float::with_val(bits, x.x0() - params.pi0());
    match certified_sign(&diff, &params.precision().roundoff()) {
        Sign::Negative => Letter::B,
        _ => Letter::A,
    }
}

pub fn step(x: &SimplexPoint, params: &Params) -> (SimplexPoint, Letter) {
    let letter = choose(x, params);
    let m = match letter {
        Letter::A => params.p_a(),
        Letter::B => params.p_b(),
    };
    (x.times(m).renormalized(), letter)
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<SimplexPoint>,
    pub games: Vec<Letter>,
    pub params: Params,
}

impl Trajectory {
    pub fn new(start: SimplexPoint, params: &Params) -> Self {
        Trajectory {
            states: vec![start],
            games: Vec::new(),
            params: params.clone(),
        }
    }

    pub fn last(&self) -> &SimplexPoint {
        self.states.last().unwrap()
    }

    pub fn advance(&mut self) {
        let (next, letter) = step(self.last(), &self.params);
        self.states.push(next);
        self.games.push(letter);
    }

    pub fn len(&self) -> usize {
        self.games.len()
    }

    pub fn is_empty(&self) -> bool {
        self.games.is_empty()
    }
}

pub fn iterate(start: &SimplexPoint, params: &Params, max_steps: usize) -> Trajectory {
    let mut traj = Trajectory::new(start.clone(), params);
    for _ in 0..max_steps {
        traj.advance();
    }
    traj
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BehaviorKind {
    BForeverEquilibrium,
    Cycle,
}

#[derive(Clone, Debug)]
pub struct DetectedBehavior {
    pub kind: BehaviorKind,
    pub pattern: GamePattern,
    pub transient_length: usize,
    /// One period of states, beginning at the canonical A. Holds just the
    /// final state for the equilibrium.
    pub cycle_states: Vec<SimplexPoint>,
    /// Steps taken before detection succeeded.
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct DetectOptions {
    pub budget: usize,
    /// Length of the all-B tail required before declaring the equilibrium.
    pub tail: usize,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            budget: 10_000,
            tail: 64,
        }
    }
}

pub fn detect(start: &SimplexPoint, params: &Params, budget: usize) -> Result<DetectedBehavior> {
    let opts = DetectOptions {
        budget,
        ..Default::default()
    };
    detect_with(start, params, &opts).map(|(behavior, _)| behavior)
}

/// Runs the greedy map until the trajectory is recognized as converging to
/// the equilibrium or as periodic, and returns the trajectory as well.
///
/// A period `p` is accepted when the last two periods of states agree to
/// within `cycle_eps` with matching letters. Only gaps between the newest A
/// and the two A's before it are tried, since those are the only periods a
/// recognizable pattern can have.
pub fn detect_with(
    start: &SimplexPoint,
    params: &Params,
    opts: &DetectOptions,
) -> Result<(DetectedBehavior, Trajectory)> {
    if opts.budget == 0 {
        return Err(Error::Precondition("budget must be at least 1".into()));
    }
    let eps = params.precision().cycle_eps();
    let mut traj = Trajectory::new(start.clone(), params);
    let mut a_positions: Vec<usize> = Vec::new();
    for t in 0..opts.budget {
        traj.advance();
        if traj.games[t] == Letter::A {
            a_positions.push(t);
            if let Some(found) = try_cycle(&traj, &a_positions, eps.clone(), opts.budget)? {
                return Ok((found, traj));
            }
        }
        let n = t + 1;
        if n >= opts.tail
            && a_positions.last().is_none_or(|&a| a + opts.tail < n)
            && traj.last().dist_inf(params.pi()) < eps
        {
            let behavior = DetectedBehavior {
                kind: BehaviorKind::BForeverEquilibrium,
                pattern: GamePattern::BForever,
                transient_length: a_positions.last().map_or(0, |&a| a + 1),
                cycle_states: vec![traj.last().clone()],
                steps: n,
            };
            return Ok((behavior, traj));
        }
    }
    Err(Error::Undetected { budget: opts.budget })
}

fn periodic_at(traj: &Trajectory, j: usize, p: usize, eps: &Real) -> bool {
    traj.games[j] == traj.games[j + p] && traj.states[j].dist_inf(&traj.states[j + p]) < *eps
}

fn try_cycle(traj: &Trajectory, a_positions: &[usize], eps: Real, budget: usize) -> Result<Option<DetectedBehavior>> {
    let a = *a_positions.last().unwrap();
    let k = a_positions.len();
    let mut candidates: Vec<usize> = a_positions[k.saturating_sub(3)..k - 1]
        .iter()
        .map(|&prev| a - prev)
        .filter(|&p| p <= budget / 4)
        .collect();
    candidates.sort_unstable();
    for p in candidates {
        if a < 2 * p {
            continue;
        }
        if !(a - 2 * p..=a - p).all(|j| periodic_at(traj, j, p, &eps)) {
            continue;
        }
        let mut t0 = a - 2 * p;
        while t0 > 0 && periodic_at(traj, t0 - 1, p, &eps) {
            t0 -= 1;
        }
        let block = &traj.games[t0..t0 + p];
        let Some((pattern, offset)) = GamePattern::from_block(block) else {
            return Err(Error::UnrecognizedCycle {
                block: letters_to_string(block),
                period: p,
            });
        };
        let c = t0 + offset;
        return Ok(Some(DetectedBehavior {
            kind: BehaviorKind::Cycle,
            pattern,
            transient_length: t0,
            cycle_states: traj.states[c..c + p].to_vec(),
            steps: a + 1,
        }));
    }
    Ok(None)
}

/// Which of the seven `phi` cases applied, and whether B is played forever.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BForeverTest {
    pub member: bool,
    pub case: u8,
}

/// Membership of a state in the set from which B is played forever.
///
/// Each case is a half-plane (or, for `2/3 < phi < phi2`, a line) through
/// `pi`, so the test reduces to the sign of `k (x0 - pi0) + 2 (x1 - pi1)`
/// for a case-dependent slope `k`.
pub fn in_b_forever(x: &SimplexPoint, params: &Params) -> Result<BForeverTest> {
    let bits = params.bits();
    let pi = params.pi();
    let d0 = Float::with_val(bits, x.x0() - pi.x0());
    if !certified_sign(&d0, &params.precision().roundoff()).is_negative() {
        return Err(Error::NotInDeltaB);
    }
    let d1 = Float::with_val(bits, x.x1() - pi.x1());
    let band = params.phi_band();
    let sd = params.spectral();
    let rho = params.rho_real();
    let phi = params.phi_real();
    let ratio = Float::with_val(bits, &sd.s / (Float::with_val(bits, rho.square_ref()) + 1u32));
    let k = match band {
        PhiBand::BelowPhi1 | PhiBand::AtPhi1 => Float::with_val(bits, 1u32 - &ratio),
        PhiBand::BelowTwoThirds => {
            let t = Float::with_val(bits, &phi * 3u32) - 2u32;
            let num = t * Float::with_val(bits, &rho + 1u32);
            let den = Float::with_val(bits, &phi * Float::with_val(bits, 1u32 - &rho));
            num / den + 1u32
        }
        PhiBand::AtTwoThirds => Float::with_val(bits, 1),
        PhiBand::BelowPhi2 => Float::with_val(bits, &ratio + 1u32),
        PhiBand::AtPhi2 | PhiBand::AbovePhi2 => {
            return Ok(BForeverTest {
                member: false,
                case: band.case(),
            })
        }
    };
    let value = Float::with_val(bits, &k * &d0) + Float::with_val(bits, &d1 * 2u32);
    let sign = certified_sign(&value, &params.precision().compare_eps());
    let member = match band {
        PhiBand::BelowPhi1 => !sign.is_negative(),
        PhiBand::BelowPhi2 => sign.is_ambiguous(),
        _ => sign.is_positive(),
    };
    Ok(BForeverTest {
        member,
        case: band.case(),
    })
}

/// Coefficients `(c1, c2)` with `pi0 - pi0(n) = c1 e1^n - c2 e2^n`, where
/// `pi0(n)` is the first coordinate after `n` plays of game B from `x`.
pub fn eq4_coefficients(x: &SimplexPoint, params: &Params) -> (Real, Real) {
    let bits = params.bits();
    let sd = params.spectral();
    let pi = params.pi();
    let rho = params.rho_real();
    let q = Float::with_val(bits, rho.square_ref()) + 1u32;
    let ratio = Float::with_val(bits, &sd.s / &q);
    let d0 = Float::with_val(bits, x.x0() - pi.x0());
    let d1 = Float::with_val(bits, x.x1() - pi.x1()) * 2u32;
    let scale = q / Float::with_val(bits, &sd.s * 2u32);
    let c1 = Float::with_val(bits, Float::with_val(bits, 1u32 - &ratio) * &d0) + &d1;
    let c2 = Float::with_val(bits, Float::with_val(bits, &ratio + 1u32) * &d0) + &d1;
    (c1 * &scale, c2 * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::PrecisionConfig;

    fn params(rho: &str, phi: &str) -> Params {
        Params::parse(rho, phi, PrecisionConfig::default()).unwrap()
    }

    fn point(x0: &str, x1: &str) -> SimplexPoint {
        SimplexPoint::parse(x0, x1, &PrecisionConfig::default()).unwrap()
    }

    #[test]
    fn pattern_display_and_parse() {
        assert_eq!(GamePattern::OneN(2).to_string(), "[1,2]");
        assert_eq!(GamePattern::OneNOneNm2(4).to_string(), "[1,4,1,2]");
        assert_eq!("[1,6,1,4]".parse::<GamePattern>().unwrap(), GamePattern::OneNOneNm2(6));
        assert_eq!("[1,2]".parse::<GamePattern>().unwrap(), GamePattern::OneN(2));
        assert!("[1,3]".parse::<GamePattern>().is_err());
        assert!("[1,4,1,1]".parse::<GamePattern>().is_err());
        assert!(GamePattern::one_n_one_nm2(2).is_err());
    }

    #[test]
    fn block_recognition_handles_rotation() {
        use Letter::{A, B};
        assert_eq!(GamePattern::from_block(&[A, B, B]), Some((GamePattern::OneN(2), 0)));
        assert_eq!(GamePattern::from_block(&[B, A, B]), Some((GamePattern::OneN(2), 1)));
        let rotated = [B, A, B, B, A, B, B, B];
        assert_eq!(GamePattern::from_block(&rotated), Some((GamePattern::OneNOneNm2(4), 4)));
        assert_eq!(GamePattern::from_block(&[A, B]), None);
        assert_eq!(GamePattern::from_block(&[A, B, B, A, B, B]), None);
    }

    #[test]
    fn tie_at_stationary_plays_a() {
        let p = params("1/3", "1/2");
        let (_, letter) = step(p.pi(), &p);
        assert_eq!(letter, Letter::A);
    }

    #[test]
    fn game_a_at_two_thirds_jumps_to_uniform() {
        let p = params("1/3", "2/3");
        let (next, letter) = step(&point("0.5", "0.2"), &p);
        assert_eq!(letter, Letter::A);
        let uniform = SimplexPoint::uniform(p.precision());
        assert!(next.dist_inf(&uniform) < crate::numerics::pow2(256, -240));
    }

    #[test]
    fn uniform_start_plays_b() {
        let p = params("1/3", "1/2");
        let (_, letter) = step(&SimplexPoint::uniform(p.precision()), &p);
        assert_eq!(letter, Letter::B);
    }

    #[test]
    fn single_step_trajectory() {
        let p = params("1/3", "1");
        let traj = iterate(&point("1", "0"), &p, 1);
        assert_eq!(traj.states.len(), 2);
        assert_eq!(traj.games, vec![Letter::A]);
        assert_eq!(traj.states[1], step(&traj.states[0], &p).0);
    }

    #[test]
    fn equilibrium_from_uniform() {
        let p = params("1/3", "1/2");
        let traj = iterate(&SimplexPoint::uniform(p.precision()), &p, 200);
        assert!(traj.games.iter().all(|&g| g == Letter::B));
        let tol = Float::with_val(256, Float::parse("1e-20").unwrap());
        assert!(traj.last().dist_inf(p.pi()) < tol);
        let found = detect(&SimplexPoint::uniform(p.precision()), &p, 10_000).unwrap();
        assert_eq!(found.kind, BehaviorKind::BForeverEquilibrium);
        assert_eq!(found.transient_length, 0);
    }

    #[test]
    fn abb_tail_at_full_play() {
        let p = params("1/3", "1");
        let traj = iterate(&point("1", "0"), &p, 300);
        let tail = letters_to_string(&traj.games[270..]);
        let pos = tail.find('A').unwrap();
        assert!(tail[pos..].starts_with("ABBABBABB"));
    }

    #[test]
    fn detects_one_two_from_its_stationary_point() {
        let p = params("1/3", "1");
        let start = GamePattern::OneN(2).stationary(&p).unwrap();
        let found = detect(&start, &p, 10_000).unwrap();
        assert_eq!(found.kind, BehaviorKind::Cycle);
        assert_eq!(found.pattern, GamePattern::OneN(2));
        assert_eq!(found.transient_length, 0);
        assert!(found.cycle_states[0].dist_inf(&start) < p.precision().cycle_eps());
    }

    #[test]
    fn detects_one_four() {
        let p = params("1/3", "0.68");
        let start = GamePattern::OneN(4).stationary(&p).unwrap();
        let found = detect(&start, &p, 10_000).unwrap();
        assert_eq!(found.pattern, GamePattern::OneN(4));
        assert_eq!(found.transient_length, 0);
    }

    #[test]
    fn undetected_with_tiny_budget() {
        let p = params("1/3", "1");
        assert_eq!(
            detect(&point("1", "0"), &p, 3).unwrap_err(),
            Error::Undetected { budget: 3 }
        );
    }

    #[test]
    fn b_forever_cases() {
        let p = params("1/3", "1/2");
        let t = in_b_forever(&SimplexPoint::uniform(p.precision()), &p).unwrap();
        assert_eq!(t, BForeverTest { member: true, case: 1 });

        let p = params("1/3", "0.95");
        let t = in_b_forever(&point("0.2", "0.3"), &p).unwrap();
        assert_eq!(t, BForeverTest { member: false, case: 7 });

        let p = params("1/3", "2/3");
        // x0 - pi0 + 2 (x1 - pi1) = (0.3 - 5/13) + 2 (0.4 - 2/13) > 0
        let t = in_b_forever(&point("0.3", "0.4"), &p).unwrap();
        assert_eq!(t, BForeverTest { member: true, case: 4 });
        let t = in_b_forever(&point("0.3", "0.1"), &p).unwrap();
        assert_eq!(t, BForeverTest { member: false, case: 4 });

        assert_eq!(in_b_forever(&point("0.9", "0.05"), &p), Err(Error::NotInDeltaB));
    }

    #[test]
    fn b_forever_line_in_case_five() {
        let p = params("1/3", "0.8");
        let bits = 256;
        let sd = p.spectral();
        let pi = p.pi();
        // point on the line (1 + S/(1+rho^2)) (x0 - pi0) + 2 (x1 - pi1) = 0
        let k = Float::with_val(bits, &sd.s * 9u32) / 10u32 + 1u32;
        let d0 = Float::with_val(bits, -0.05f64);
        let x0 = Float::with_val(bits, pi.x0() + &d0);
        let x1 = Float::with_val(bits, pi.x1() - Float::with_val(bits, &k * &d0) / 2u32);
        let on_line = SimplexPoint::from_x0_x1(x0, x1).unwrap();
        assert!(in_b_forever(&on_line, &p).unwrap().member);
        let traj = iterate(&on_line, &p, 100);
        assert!(traj.games[..60].iter().all(|&g| g == Letter::B));
        assert!(!in_b_forever(&point("0.3", "0.2"), &p).unwrap().member);
    }

    #[test]
    fn eq4_matches_iteration() {
        let p = params("0.4", "0.7");
        let x = point("0.2", "0.5");
        let (c1, c2) = eq4_coefficients(&x, &p);
        let sd = p.spectral();
        let mut y = x.clone();
        for n in 1..=40u32 {
            y = y.times(p.p_b());
            use rug::ops::Pow;
            let lhs = Float::with_val(256, p.pi0() - y.x0());
            let rhs = Float::with_val(256, &c1 * Float::with_val(256, (&sd.e1).pow(n)))
                - Float::with_val(256, &c2 * Float::with_val(256, (&sd.e2).pow(n)));
            assert!(Float::with_val(256, &lhs - &rhs).abs() < crate::numerics::pow2(256, -128));
        }
    }
}
