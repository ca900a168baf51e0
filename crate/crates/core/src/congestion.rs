//! Congestion models and bottleneck congestion games.
//!
//! A facility's cost depends only on the set of its users and never drops
//! when users join. Costs of facilities nobody uses are evaluated at the
//! empty user set.

use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{FiniteGame, Profile};
use crate::potential::{LipFunction, LipName};
use crate::rational::{self, Rational};

/// Set-function tables are validated exhaustively; this caps their size.
pub const MAX_SET_TABLE_PLAYERS: usize = 12;

/// Players using a facility, as a bitmask over player indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct UserSet(pub u64);

impl UserSet {
    pub fn insert(&mut self, player: usize) {
        self.0 |= 1 << player;
    }

    pub fn contains(&self, player: usize) -> bool {
        self.0 & (1 << player) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedEdge {
    pub a: usize,
    pub b: usize,
    pub weight: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FacilityCost {
    /// `c(k)` for `k = 0..=n` users.
    LoadTable(Vec<Rational>),
    /// One value per user subset, indexed by bitmask.
    SetTable(Vec<Rational>),
    /// Total weight of interference edges with both ends among the users.
    Interference(Arc<Vec<WeightedEdge>>),
    /// Sum of per-player weights over the users (unrelated machines).
    Additive(Vec<Rational>),
}

impl FacilityCost {
    pub fn eval(&self, users: UserSet) -> Rational {
        match self {
            FacilityCost::LoadTable(t) => t[users.len()].clone(),
            FacilityCost::SetTable(t) => t[users.0 as usize].clone(),
            FacilityCost::Interference(edges) => edges
                .iter()
                .filter(|e| users.contains(e.a) && users.contains(e.b))
                .map(|e| e.weight.clone())
                .sum(),
            FacilityCost::Additive(w) => (0..w.len())
                .filter(|&i| users.contains(i))
                .map(|i| w[i].clone())
                .sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facility {
    pub name: String,
    pub cost: FacilityCost,
}

/// Players, facilities, and per-player strategy lists (facility index sets).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongestionModel {
    players: usize,
    facilities: Vec<Facility>,
    strategies: Vec<Vec<Vec<usize>>>,
}

fn axiom(what: &str, detail: String) -> Error {
    Error::validation(what, detail)
}

impl CongestionModel {
    pub fn new(players: usize, facilities: Vec<Facility>, strategies: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if players == 0 || players > 63 {
            return Err(Error::validation("players", format!("player count {players} outside 1..=63")));
        }
        if facilities.is_empty() {
            return Err(Error::validation("facilities", "no facilities"));
        }
        if strategies.len() != players {
            return Err(Error::Dimension {
                left: strategies.len(),
                right: players,
            });
        }
        let m = facilities.len();
        let mut strategies = strategies;
        for (i, list) in strategies.iter_mut().enumerate() {
            if list.is_empty() {
                return Err(Error::validation("strategies", format!("player {i} has no strategy")));
            }
            for (j, s) in list.iter_mut().enumerate() {
                s.sort_unstable();
                s.dedup();
                if s.is_empty() {
                    return Err(Error::validation(
                        "strategies",
                        format!("strategy {j} of player {i} uses no facility"),
                    ));
                }
                if let Some(f) = s.iter().find(|&&f| f >= m) {
                    return Err(Error::validation(
                        "strategies",
                        format!("strategy {j} of player {i} names facility {f} of {m}"),
                    ));
                }
            }
        }
        for f in &facilities {
            validate_cost(&f.name, &f.cost, players)?;
        }
        Ok(CongestionModel {
            players,
            facilities,
            strategies,
        })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn facilities(&self) -> &[Facility] {
        &self.facilities
    }

    pub fn facility_count(&self) -> usize {
        self.facilities.len()
    }

    pub fn strategies(&self) -> &[Vec<Vec<usize>>] {
        &self.strategies
    }

    pub fn strategy_counts(&self) -> Vec<usize> {
        self.strategies.iter().map(Vec::len).collect()
    }

    pub fn user_sets(&self, x: &[usize]) -> Vec<UserSet> {
        let mut sets = vec![UserSet::default(); self.facilities.len()];
        for (i, &s) in x.iter().enumerate() {
            for &f in &self.strategies[i][s] {
                sets[f].insert(i);
            }
        }
        sets
    }

    /// `c_f(x)` for every facility.
    pub fn facility_costs(&self, x: &[usize]) -> Vec<Rational> {
        self.user_sets(x)
            .into_iter()
            .zip(&self.facilities)
            .map(|(u, f)| f.cost.eval(u))
            .collect()
    }

    /// Bottleneck private costs `π_i(x) = max_{f ∈ x_i} c_f(x)`.
    pub fn bottleneck_costs(&self, x: &[usize]) -> Vec<Rational> {
        let fc = self.facility_costs(x);
        x.iter()
            .enumerate()
            .map(|(i, &s)| {
                self.strategies[i][s]
                    .iter()
                    .map(|&f| &fc[f])
                    .max()
                    .cloned()
                    .unwrap_or_else(Rational::zero)
            })
            .collect()
    }
}

fn validate_cost(name: &str, cost: &FacilityCost, n: usize) -> Result<()> {
    let check_nonneg = |vals: &[Rational]| -> Result<()> {
        if let Some(k) = vals.iter().position(|v| v.is_negative()) {
            return Err(axiom(
                "non-negativity",
                format!("facility {name}: entry {k} is {}", rational::format(&vals[k])),
            ));
        }
        Ok(())
    };
    match cost {
        FacilityCost::LoadTable(t) => {
            if t.len() != n + 1 {
                return Err(Error::validation(
                    "load table",
                    format!("facility {name}: needs {} entries (loads 0..={n}), found {}", n + 1, t.len()),
                ));
            }
            check_nonneg(t)?;
            if let Some(k) = (1..t.len()).find(|&k| t[k] < t[k - 1]) {
                return Err(axiom(
                    "monotonicity",
                    format!(
                        "facility {name}: c({k}) = {} < c({}) = {}",
                        rational::format(&t[k]),
                        k - 1,
                        rational::format(&t[k - 1])
                    ),
                ));
            }
        }
        FacilityCost::SetTable(t) => {
            if n > MAX_SET_TABLE_PLAYERS {
                return Err(Error::Budget(format!(
                    "set tables are limited to {MAX_SET_TABLE_PLAYERS} players"
                )));
            }
            if t.len() != 1 << n {
                return Err(Error::validation(
                    "set table",
                    format!("facility {name}: needs {} entries, found {}", 1usize << n, t.len()),
                ));
            }
            check_nonneg(t)?;
            for mask in 0..t.len() {
                for i in 0..n {
                    let bigger = mask | (1 << i);
                    if bigger != mask && t[bigger] < t[mask] {
                        return Err(axiom(
                            "monotonicity",
                            format!(
                                "facility {name}: users {mask:#b} cost {} but superset {bigger:#b} costs {}",
                                rational::format(&t[mask]),
                                rational::format(&t[bigger])
                            ),
                        ));
                    }
                }
            }
        }
        FacilityCost::Interference(edges) => {
            for e in edges.iter() {
                if e.a >= n || e.b >= n || e.a == e.b {
                    return Err(Error::validation(
                        "interference graph",
                        format!("edge ({}, {}) is not between two distinct players", e.a, e.b),
                    ));
                }
                if e.weight.is_negative() {
                    return Err(axiom(
                        "non-negativity",
                        format!("interference edge ({}, {}) has weight {}", e.a, e.b, rational::format(&e.weight)),
                    ));
                }
            }
        }
        FacilityCost::Additive(w) => {
            if w.len() != n {
                return Err(Error::Dimension { left: w.len(), right: n });
            }
            check_nonneg(w)?;
        }
    }
    Ok(())
}

/// A bottleneck congestion game together with its model.
#[derive(Clone, Debug)]
pub struct BottleneckGame {
    model: Arc<CongestionModel>,
    game: FiniteGame,
}

impl BottleneckGame {
    pub fn model(&self) -> &CongestionModel {
        &self.model
    }

    pub fn game(&self) -> &FiniteGame {
        &self.game
    }

    pub fn into_game(self) -> FiniteGame {
        self.game
    }

    pub fn map_game(self, f: impl FnOnce(FiniteGame) -> FiniteGame) -> Self {
        BottleneckGame {
            model: self.model,
            game: f(self.game),
        }
    }

    pub fn facility_costs(&self, x: &Profile) -> Vec<Rational> {
        self.model.facility_costs(&x.0)
    }
}

pub fn build_game(model: CongestionModel) -> BottleneckGame {
    let model = Arc::new(model);
    let m = model.clone();
    let game = FiniteGame::new(model.strategy_counts(), move |x: &[usize]| m.bottleneck_costs(x))
        .expect("validated model has players and strategies");
    BottleneckGame { model, game }
}

/// `φ_i(x) = π_i(x)`.
pub fn phi_pi(game: &BottleneckGame) -> LipFunction {
    let m = game.model.clone();
    LipFunction::new(LipName::PhiPi, m.players(), move |x| m.bottleneck_costs(x))
}

/// `ψ_{i,f}(x) = c_f(x)` if `f ∈ x_i`, else 0; player-major order.
pub fn psi_facility(game: &BottleneckGame) -> LipFunction {
    let m = game.model.clone();
    let q = m.players() * m.facility_count();
    LipFunction::new(LipName::PsiFacility, q, move |x| psi_values(&m, x))
}

pub fn psi_values(model: &CongestionModel, x: &[usize]) -> Vec<Rational> {
    let fc = model.facility_costs(x);
    let m = model.facility_count();
    let mut out = vec![Rational::zero(); model.players() * m];
    for (i, &s) in x.iter().enumerate() {
        for &f in &model.strategies[i][s] {
            out[i * m + f] = fc[f].clone();
        }
    }
    out
}

/// `υ_f(x) = c_f(x)`. Not a LIP certificate in general; it becomes one
/// when facility costs are strictly monotone.
pub fn upsilon(game: &BottleneckGame) -> LipFunction {
    let m = game.model.clone();
    LipFunction::new(LipName::Upsilon, m.facility_count(), move |x| m.facility_costs(x))
}

/// Interference game: players pick one of `stations`; a station costs the
/// total weight of edges among its users.
pub fn make_interference(players: usize, stations: usize, edges: Vec<WeightedEdge>) -> Result<CongestionModel> {
    if stations == 0 {
        return Err(Error::validation("stations", "no base stations"));
    }
    let edges = Arc::new(edges);
    let facilities = (0..stations)
        .map(|j| Facility {
            name: format!("station{j}"),
            cost: FacilityCost::Interference(edges.clone()),
        })
        .collect();
    let strategies = vec![(0..stations).map(|j| vec![j]).collect(); players];
    CongestionModel::new(players, facilities, strategies)
}

/// Scheduling on unrelated machines: `times[i][j]` is job `i` on machine
/// `j`; `allowed[i]` restricts job `i` to a machine subset when given.
pub fn make_scheduling(times: Vec<Vec<Rational>>, allowed: Option<Vec<Vec<usize>>>) -> Result<CongestionModel> {
    let n = times.len();
    let m = times.first().map(Vec::len).unwrap_or(0);
    if m == 0 {
        return Err(Error::validation("machines", "no machines"));
    }
    if let Some(i) = times.iter().position(|r| r.len() != m) {
        return Err(Error::validation("processing times", format!("job {i} row has the wrong length")));
    }
    let facilities = (0..m)
        .map(|j| Facility {
            name: format!("machine{j}"),
            cost: FacilityCost::Additive(times.iter().map(|r| r[j].clone()).collect()),
        })
        .collect();
    let strategies = match allowed {
        Some(a) => {
            if a.len() != n {
                return Err(Error::Dimension { left: a.len(), right: n });
            }
            a.into_iter().map(|l| l.into_iter().map(|j| vec![j]).collect()).collect()
        }
        None => vec![(0..m).map(|j| vec![j]).collect(); n],
    };
    CongestionModel::new(n, facilities, strategies)
}

/// Singleton model with a load table per facility.
pub fn singleton_load_model(players: usize, tables: Vec<Vec<Rational>>) -> Result<CongestionModel> {
    let m = tables.len();
    let facilities = tables
        .into_iter()
        .enumerate()
        .map(|(j, t)| Facility {
            name: format!("f{j}"),
            cost: FacilityCost::LoadTable(t),
        })
        .collect();
    CongestionModel::new(players, facilities, vec![(0..m).map(|j| vec![j]).collect(); players])
}
