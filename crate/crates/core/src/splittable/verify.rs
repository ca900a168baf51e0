//! Checks for α-approximate strong equilibria of splittable games.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{loads, player_loads, private_costs, SplittableInstance, SplittableState};
use crate::rational;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Random coalition deviations tried after the unilateral checks.
    pub coalition_samples: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            coalition_samples: 256,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub coalition: Vec<usize>,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    /// The deviating state.
    pub deviation: SplittableState<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaCheck {
    pub ok: bool,
    /// All unilateral best responses were computed exactly (up to
    /// bisection tolerance); false when some player's strategies share
    /// facilities and the greedy check was used.
    pub unilateral_exact: bool,
    pub coalitions_sampled: usize,
    pub violation: Option<Violation>,
}

/// Bisection steps for the best-response threshold.
const BISECTION_STEPS: usize = 100;

/// A cheapest unilateral deviation of `player` with everyone else fixed:
/// the smallest threshold `θ` such that the player's demand fits on
/// strategies whose facilities stay at cost `≤ θ`.
///
/// Exact when the player's strategies are facility-disjoint. Otherwise
/// capacities are consumed greedily strategy by strategy, which can only
/// overestimate the best achievable cost.
pub fn best_response(inst: &SplittableInstance, state: &SplittableState<f64>, player: usize) -> (f64, Vec<f64>) {
    let own = &player_loads(inst, state)[player];
    let total = loads(inst, state);
    let others: Vec<f64> = total.iter().zip(own).map(|(t, o)| (t - o).max(0.0)).collect();
    let d = rational::to_f64(&inst.demands()[player]);
    let fit = |theta: f64| -> Option<Vec<f64>> {
        let mut room: Vec<f64> = inst
            .facilities()
            .iter()
            .zip(&others)
            .map(|(f, o)| f.cost.max_load_within(theta).map_or(-1.0, |cap| cap - o))
            .collect();
        let mut alloc = Vec::with_capacity(inst.strategies()[player].len());
        let mut left = d;
        for s in &inst.strategies()[player] {
            let cap = s.iter().map(|&f| room[f]).fold(f64::INFINITY, f64::min);
            let take = if cap > 0.0 { cap.min(left) } else { 0.0 };
            for &f in s {
                room[f] -= take;
            }
            left -= take;
            alloc.push(take);
        }
        (left <= 1e-15 * d).then_some(alloc)
    };
    let current = private_costs(inst, state)[player];
    let mut hi = current;
    let mut best = match fit(hi) {
        Some(a) => a,
        None => return (current, state.xi[player].clone()),
    };
    let mut lo = 0.0;
    if let Some(a) = fit(lo) {
        best = a;
    } else {
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match fit(mid) {
                Some(a) => {
                    hi = mid;
                    best = a;
                }
                None => lo = mid,
            }
        }
    }
    // hand the rounding remainder to the largest share
    let sum: f64 = best.iter().sum();
    if let Some(k) = (0..best.len()).max_by(|&a, &b| best[a].total_cmp(&best[b])) {
        best[k] += d - sum;
    }
    let mut dev = state.clone();
    dev.xi[player] = best;
    let achieved = private_costs(inst, &dev)[player];
    (achieved, dev.xi[player].clone())
}

/// Looks for a deviation improving every member by more than `alpha`:
/// exact unilateral best responses first, then random coalitions.
pub fn verify_alpha_unilateral(
    inst: &SplittableInstance,
    state: &SplittableState<f64>,
    alpha: f64,
    cfg: &VerifyConfig,
) -> AlphaCheck {
    let before = private_costs(inst, state);
    let mut exact = true;
    for i in 0..inst.players() {
        exact &= inst.strategies_disjoint(i);
        let (_, row) = best_response(inst, state, i);
        let mut dev = state.clone();
        dev.xi[i] = row;
        let after = private_costs(inst, &dev);
        if before[i] - after[i] > alpha {
            return AlphaCheck {
                ok: false,
                unilateral_exact: exact,
                coalitions_sampled: 0,
                violation: Some(Violation {
                    coalition: vec![i],
                    before,
                    after,
                    deviation: dev,
                }),
            };
        }
    }
    let violation = sample_coalitions(inst, state, &before, alpha, cfg);
    AlphaCheck {
        ok: violation.is_none(),
        unilateral_exact: exact,
        coalitions_sampled: cfg.coalition_samples,
        violation,
    }
}

fn sample_coalitions(
    inst: &SplittableInstance,
    state: &SplittableState<f64>,
    before: &[f64],
    alpha: f64,
    cfg: &VerifyConfig,
) -> Option<Violation> {
    let n = inst.players();
    if n < 2 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.coalition_samples {
        let size = rng.gen_range(2..=n);
        let mut players: Vec<usize> = (0..n).collect();
        players.shuffle(&mut rng);
        let mut coalition: Vec<usize> = players.into_iter().take(size).collect();
        coalition.sort_unstable();
        let mut dev = state.clone();
        for &i in &coalition {
            let k = inst.strategies()[i].len();
            let d = rational::to_f64(&inst.demands()[i]);
            // random sparse split
            let mut w: Vec<f64> = (0..k)
                .map(|_| if rng.gen_bool(0.5) { rng.gen::<f64>() } else { 0.0 })
                .collect();
            if w.iter().all(|&x| x == 0.0) {
                w[rng.gen_range(0..k)] = 1.0;
            }
            let s: f64 = w.iter().sum();
            dev.xi[i] = w.into_iter().map(|x| x / s * d).collect();
        }
        let after = private_costs(inst, &dev);
        if coalition.iter().all(|&i| before[i] - after[i] > alpha) {
            return Some(Violation {
                coalition,
                before: before.to_vec(),
                after,
                deviation: dev,
            });
        }
    }
    None
}
