//! Splittable (infinite) bottleneck congestion games.
//!
//! Players spread a divisible demand over their strategy lists. A player's
//! cost is the largest facility cost among facilities it actually uses,
//! i.e. reaches with positive intensity. Evaluation is generic over
//! [`Scalar`] so fixtures can use exact rationals and the solver floats.

pub mod solver;
pub mod verify;

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Sub};

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub use solver::{approx_sne, ApproxReport, SolverConfig};
pub use verify::{verify_alpha_unilateral, AlphaCheck, VerifyConfig, Violation};

/// Number type for state evaluation.
pub trait Scalar:
    Clone
    + PartialOrd
    + Debug
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Sum
{
    fn from_rational(r: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn powu(&self, exponent: u32) -> Self;
    /// Intensities at or below this count as unused.
    fn used_threshold(demand: &Self) -> Self;
    fn eval_cost(cost: &PwlCost, load: &Self) -> Self;
}

impl Scalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        rational::to_f64(r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn powu(&self, exponent: u32) -> Self {
        self.powf(exponent as f64)
    }

    fn used_threshold(demand: &Self) -> Self {
        1e-12 * demand
    }

    fn eval_cost(cost: &PwlCost, load: &Self) -> Self {
        cost.eval_f64(*load)
    }
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        rational::to_f64(self)
    }

    fn powu(&self, exponent: u32) -> Self {
        rational::pow(self, exponent)
    }

    fn used_threshold(_demand: &Self) -> Self {
        Rational::zero()
    }

    fn eval_cost(cost: &PwlCost, load: &Self) -> Self {
        cost.eval_exact(load)
    }
}

/// Continuous piecewise-linear cost of the load, non-decreasing and
/// non-negative, given by breakpoints starting at load 0. Beyond the last
/// breakpoint the cost stays at its last value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(Rational, Rational)>", into = "Vec<(Rational, Rational)>")]
pub struct PwlCost {
    points: Vec<(Rational, Rational)>,
    floats: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(Rational, Rational)>> for PwlCost {
    type Error = Error;

    fn try_from(points: Vec<(Rational, Rational)>) -> Result<Self> {
        PwlCost::new(points)
    }
}

impl From<PwlCost> for Vec<(Rational, Rational)> {
    fn from(c: PwlCost) -> Self {
        c.points
    }
}

impl PwlCost {
    pub fn new(points: Vec<(Rational, Rational)>) -> Result<Self> {
        if points.is_empty() || !points[0].0.is_zero() {
            return Err(Error::validation("cost breakpoints", "must start at load 0"));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::validation("cost breakpoints", "loads must be strictly increasing"));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::validation(
                    "monotonicity",
                    format!("cost drops from {} to {}", rational::format(&w[0].1), rational::format(&w[1].1)),
                ));
            }
        }
        if points[0].1.is_negative() {
            return Err(Error::validation("non-negativity", "cost at load 0 is negative"));
        }
        let floats = points
            .iter()
            .map(|(x, y)| (rational::to_f64(x), rational::to_f64(y)))
            .collect();
        Ok(PwlCost { points, floats })
    }

    pub fn constant(value: Rational) -> Result<Self> {
        Self::new(vec![(Rational::zero(), value)])
    }

    /// `c(ℓ) = a·ℓ + b` on `[0, hi]`.
    pub fn affine(a: Rational, b: Rational, hi: Rational) -> Result<Self> {
        let top = &a * &hi + &b;
        Self::new(vec![(Rational::zero(), b), (hi, top)])
    }

    pub fn points(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    pub fn is_convex(&self) -> bool {
        let slopes: Vec<Rational> = self
            .points
            .windows(2)
            .map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0))
            .collect();
        slopes.windows(2).all(|s| s[1] >= s[0])
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.points.len() >= 2 && self.points.windows(2).all(|w| w[1].1 > w[0].1)
    }

    pub fn max_on(&self, hi: &Rational) -> Rational {
        self.eval_exact(hi)
    }

    pub fn eval_exact(&self, load: &Rational) -> Rational {
        let p = &self.points;
        let k = p.partition_point(|(x, _)| x <= load);
        if k == 0 {
            return p[0].1.clone();
        }
        if k == p.len() {
            return p[k - 1].1.clone();
        }
        let (x0, y0) = &p[k - 1];
        let (x1, y1) = &p[k];
        y0 + (y1 - y0) * (load - x0) / (x1 - x0)
    }

    pub fn eval_f64(&self, load: f64) -> f64 {
        let p = &self.floats;
        let k = p.partition_point(|&(x, _)| x <= load);
        if k == 0 {
            return p[0].1;
        }
        if k == p.len() {
            return p[k - 1].1;
        }
        let (x0, y0) = p[k - 1];
        let (x1, y1) = p[k];
        y0 + (y1 - y0) * (load - x0) / (x1 - x0)
    }

    /// Right derivative at `load`.
    pub fn slope_f64(&self, load: f64) -> f64 {
        let p = &self.floats;
        let k = p.partition_point(|&(x, _)| x <= load);
        if k == 0 || k == p.len() {
            return 0.0;
        }
        (p[k].1 - p[k - 1].1) / (p[k].0 - p[k - 1].0)
    }

    /// Largest load whose cost does not exceed `theta`; `None` when even
    /// load 0 is too expensive, `inf` when the cost never exceeds it.
    pub fn max_load_within(&self, theta: f64) -> Option<f64> {
        let p = &self.floats;
        if p[0].1 > theta {
            return None;
        }
        for w in p.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if y1 > theta {
                return Some(x0 + (theta - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        Some(f64::INFINITY)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFacility {
    pub name: String,
    pub cost: PwlCost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittableInstance {
    facilities: Vec<SplitFacility>,
    strategies: Vec<Vec<Vec<usize>>>,
    demands: Vec<Rational>,
    cost_bound: Rational,
}

impl SplittableInstance {
    pub fn new(
        facilities: Vec<SplitFacility>,
        strategies: Vec<Vec<Vec<usize>>>,
        demands: Vec<Rational>,
        cost_bound: Option<Rational>,
    ) -> Result<Self> {
        let n = demands.len();
        if n == 0 {
            return Err(Error::validation("players", "no players"));
        }
        if strategies.len() != n {
            return Err(Error::Dimension { left: strategies.len(), right: n });
        }
        if let Some(i) = demands.iter().position(|d| !d.is_positive()) {
            return Err(Error::validation("demand", format!("player {i} has non-positive demand")));
        }
        let m = facilities.len();
        let mut strategies = strategies;
        for (i, list) in strategies.iter_mut().enumerate() {
            if list.is_empty() {
                return Err(Error::validation("strategies", format!("player {i} has no strategy")));
            }
            for s in list.iter_mut() {
                s.sort_unstable();
                s.dedup();
                if s.is_empty() || s.iter().any(|&f| f >= m) {
                    return Err(Error::validation(
                        "strategies",
                        format!("player {i} has an empty or out-of-range strategy"),
                    ));
                }
            }
        }
        let total: Rational = demands.iter().cloned().sum();
        let max = facilities
            .iter()
            .map(|f| f.cost.max_on(&total))
            .max()
            .unwrap_or_else(Rational::zero);
        let cost_bound = match cost_bound {
            Some(c) if c < max => {
                return Err(Error::validation("cost bound", "bound is below the largest reachable cost"));
            }
            Some(c) => c,
            None => max,
        };
        Ok(SplittableInstance {
            facilities,
            strategies,
            demands,
            cost_bound,
        })
    }

    /// Every player may use every facility as a singleton strategy.
    pub fn parallel_links(costs: Vec<PwlCost>, demands: Vec<Rational>) -> Result<Self> {
        let m = costs.len();
        let facilities = costs
            .into_iter()
            .enumerate()
            .map(|(j, cost)| SplitFacility { name: format!("link{j}"), cost })
            .collect();
        let strategies = vec![(0..m).map(|j| vec![j]).collect(); demands.len()];
        Self::new(facilities, strategies, demands, None)
    }

    pub fn players(&self) -> usize {
        self.demands.len()
    }

    pub fn facility_count(&self) -> usize {
        self.facilities.len()
    }

    pub fn facilities(&self) -> &[SplitFacility] {
        &self.facilities
    }

    pub fn strategies(&self) -> &[Vec<Vec<usize>>] {
        &self.strategies
    }

    pub fn demands(&self) -> &[Rational] {
        &self.demands
    }

    pub fn total_demand(&self) -> Rational {
        self.demands.iter().cloned().sum()
    }

    pub fn cost_bound(&self) -> &Rational {
        &self.cost_bound
    }

    /// `ψ_max`: the largest cost any facility can reach.
    pub fn psi_max(&self) -> Rational {
        let total = self.total_demand();
        self.facilities
            .iter()
            .map(|f| f.cost.max_on(&total))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_convex(&self) -> bool {
        self.facilities.iter().all(|f| f.cost.is_convex())
    }

    /// True when no two strategies of the same player share a facility.
    pub fn strategies_disjoint(&self, player: usize) -> bool {
        let mut seen = vec![false; self.facilities.len()];
        for s in &self.strategies[player] {
            for &f in s {
                if seen[f] {
                    return false;
                }
                seen[f] = true;
            }
        }
        true
    }

    pub fn check_state<T: Scalar>(&self, state: &SplittableState<T>) -> Result<()> {
        if state.xi.len() != self.players() {
            return Err(Error::Dimension {
                left: state.xi.len(),
                right: self.players(),
            });
        }
        for (i, row) in state.xi.iter().enumerate() {
            if row.len() != self.strategies[i].len() {
                return Err(Error::Dimension {
                    left: row.len(),
                    right: self.strategies[i].len(),
                });
            }
            if row.iter().any(|v| *v < T::zero()) {
                return Err(Error::validation("intensity", format!("player {i} has a negative intensity")));
            }
            let d = T::from_rational(&self.demands[i]);
            let sum: T = row.iter().cloned().sum();
            let err = (sum.to_f64() - d.to_f64()).abs();
            if err > 1e-9 * d.to_f64().max(1.0) {
                return Err(Error::validation(
                    "simplex",
                    format!("player {i} intensities sum to {} instead of {}", sum.to_f64(), d.to_f64()),
                ));
            }
        }
        Ok(())
    }

    /// All demand of each player on its first strategy.
    pub fn first_strategy_state<T: Scalar>(&self) -> SplittableState<T> {
        SplittableState {
            xi: (0..self.players())
                .map(|i| {
                    let mut row = vec![T::zero(); self.strategies[i].len()];
                    row[0] = T::from_rational(&self.demands[i]);
                    row
                })
                .collect(),
        }
    }

    /// Demand spread evenly over each player's strategies.
    pub fn uniform_state<T: Scalar>(&self) -> SplittableState<T> {
        SplittableState {
            xi: (0..self.players())
                .map(|i| {
                    let k = self.strategies[i].len();
                    let share = T::from_rational(&(&self.demands[i] / Rational::from_integer(k.into())));
                    vec![share; k]
                })
                .collect(),
        }
    }
}

/// Intensities `ξ_ij` per player and strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittableState<T> {
    pub xi: Vec<Vec<T>>,
}

impl SplittableState<Rational> {
    pub fn to_f64(&self) -> SplittableState<f64> {
        SplittableState {
            xi: self.xi.iter().map(|r| r.iter().map(rational::to_f64).collect()).collect(),
        }
    }
}

/// `ξ_i^f` for every player and facility.
pub fn player_loads<T: Scalar>(inst: &SplittableInstance, state: &SplittableState<T>) -> Vec<Vec<T>> {
    let m = inst.facility_count();
    state
        .xi
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut l = vec![T::zero(); m];
            for (j, v) in row.iter().enumerate() {
                for &f in &inst.strategies[i][j] {
                    l[f] = l[f].clone() + v.clone();
                }
            }
            l
        })
        .collect()
}

/// `ℓ_f(ξ) = Σ_i ξ_i^f`.
pub fn loads<T: Scalar>(inst: &SplittableInstance, state: &SplittableState<T>) -> Vec<T> {
    let per = player_loads(inst, state);
    (0..inst.facility_count())
        .map(|f| per.iter().map(|l| l[f].clone()).sum())
        .collect()
}

/// `F_i(ξ)` as a mask over facilities.
pub fn used_facilities<T: Scalar>(inst: &SplittableInstance, state: &SplittableState<T>, player: usize) -> Vec<bool> {
    let d = T::from_rational(&inst.demands[player]);
    let thr = T::used_threshold(&d);
    let mut used = vec![false; inst.facility_count()];
    for (j, v) in state.xi[player].iter().enumerate() {
        if *v > thr {
            for &f in &inst.strategies[player][j] {
                used[f] = true;
            }
        }
    }
    used
}

pub fn facility_costs<T: Scalar>(inst: &SplittableInstance, state: &SplittableState<T>) -> Vec<T> {
    loads(inst, state)
        .iter()
        .zip(&inst.facilities)
        .map(|(l, f)| T::eval_cost(&f.cost, l))
        .collect()
}

fn max_of<T: Scalar>(values: impl Iterator<Item = T>) -> T {
    values.fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// `π_i(ξ) = max_{f ∈ F_i(ξ)} c_f(ℓ_f(ξ))`.
pub fn private_costs<T: Scalar>(inst: &SplittableInstance, state: &SplittableState<T>) -> Vec<T> {
    let costs = facility_costs(inst, state);
    (0..inst.players())
        .map(|i| {
            let used = used_facilities(inst, state, i);
            max_of((0..costs.len()).filter(|&f| used[f]).map(|f| costs[f].clone()))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificates<T> {
    pub phi: Vec<T>,
    /// Player-major, `n·m` entries.
    pub psi: Vec<T>,
    pub nu: Vec<T>,
    /// `(c_f(ℓ_f), ℓ_f)` per facility.
    pub alex: Vec<(T, T)>,
}

pub fn lip_certificates<T: Scalar>(inst: &SplittableInstance, state: &SplittableState<T>) -> Certificates<T> {
    let l = loads(inst, state);
    let costs: Vec<T> = l
        .iter()
        .zip(&inst.facilities)
        .map(|(l, f)| T::eval_cost(&f.cost, l))
        .collect();
    let m = costs.len();
    let mut phi = Vec::with_capacity(inst.players());
    let mut psi = Vec::with_capacity(inst.players() * m);
    for i in 0..inst.players() {
        let used = used_facilities(inst, state, i);
        phi.push(max_of((0..m).filter(|&f| used[f]).map(|f| costs[f].clone())));
        psi.extend((0..m).map(|f| if used[f] { costs[f].clone() } else { T::zero() }));
    }
    let alex = costs.iter().cloned().zip(l).collect();
    Certificates { phi, psi, nu: costs, alex }
}

/// Smallest integer `M ≥ (2·psi_max/α + 1)·ln(q)`, at least 1.
pub fn alpha_exponent_raw(psi_max: f64, alpha: f64, q: usize) -> u32 {
    let bound = (2.0 * psi_max / alpha + 1.0) * (q as f64).ln();
    (bound * (1.0 - 1e-12)).ceil().max(1.0) as u32
}

pub fn alpha_exponent(inst: &SplittableInstance, alpha: &Rational) -> Result<u32> {
    if !alpha.is_positive() {
        return Err(Error::Domain("alpha must be positive".into()));
    }
    Ok(alpha_exponent_raw(
        rational::to_f64(&inst.psi_max()),
        rational::to_f64(alpha),
        inst.players() * inst.facility_count(),
    ))
}

/// `Σ_{i,f} ψ_{i,f}(ξ)^M`, including the used-facility indicator.
pub fn alpha_potential<T: Scalar>(inst: &SplittableInstance, state: &SplittableState<T>, exponent: u32) -> T {
    lip_certificates(inst, state).psi.iter().map(|v| v.powu(exponent)).sum()
}

/// Members of `coalition` all lose strictly more than `margin`.
pub fn improves_all<T: Scalar>(before: &[T], after: &[T], coalition: &[usize], margin: &T) -> bool {
    coalition
        .iter()
        .all(|&i| before[i].clone() - after[i].clone() > *margin)
}

/// Samples a coalition reroute whose members all gain more than `margin`
/// (zero for strict moves). Coalitions have one or two members; each member
/// shifts a fraction of one strategy's intensity onto another strategy.
pub fn sample_improving_move<R: Rng>(
    inst: &SplittableInstance,
    state: &SplittableState<Rational>,
    margin: &Rational,
    attempts: usize,
    rng: &mut R,
) -> Option<(Vec<usize>, SplittableState<Rational>)> {
    let n = inst.players();
    let before = private_costs(inst, state);
    let fractions = [
        rational::ratio(1, 4),
        rational::ratio(1, 2),
        rational::ratio(3, 4),
        Rational::one(),
    ];
    for _ in 0..attempts {
        let size = if n >= 2 && rng.gen_bool(0.3) { 2 } else { 1 };
        let mut players: Vec<usize> = (0..n).collect();
        players.shuffle(rng);
        let mut coalition: Vec<usize> = players.into_iter().take(size).collect();
        coalition.sort_unstable();
        let mut next = state.clone();
        let mut moved = true;
        for &i in &coalition {
            let k = inst.strategies[i].len();
            let sources: Vec<usize> = (0..k).filter(|&j| state.xi[i][j].is_positive()).collect();
            if k < 2 || sources.is_empty() {
                moved = false;
                break;
            }
            let from = *sources.choose(rng).expect("non-empty");
            let mut to = rng.gen_range(0..k - 1);
            if to >= from {
                to += 1;
            }
            let amount = &state.xi[i][from] * fractions.choose(rng).expect("non-empty");
            next.xi[i][from] = &next.xi[i][from] - &amount;
            next.xi[i][to] = &next.xi[i][to] + &amount;
        }
        if !moved {
            continue;
        }
        let after = private_costs(inst, &next);
        if improves_all(&before, &after, &coalition, margin) {
            return Some((coalition, next));
        }
    }
    None
}

/// Random exact state with intensities on a grid of `1/grid` of the demand.
pub fn random_state<R: Rng>(inst: &SplittableInstance, grid: u32, rng: &mut R) -> SplittableState<Rational> {
    SplittableState {
        xi: (0..inst.players())
            .map(|i| {
                let k = inst.strategies[i].len();
                let mut counts = vec![0u32; k];
                for _ in 0..grid {
                    counts[rng.gen_range(0..k)] += 1;
                }
                counts
                    .into_iter()
                    .map(|c| &inst.demands[i] * rational::ratio(c as i64, grid as i64))
                    .collect()
            })
            .collect(),
    }
}
