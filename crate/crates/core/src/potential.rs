//! LIP certificates and the potentials they induce.

use std::cmp::Ordering;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dynamics::improvement_graph;
use crate::error::{Error, Result};
use crate::game::{FiniteGame, ImprovingMove, MoveMode, MoveScanner, Profile};
use crate::lexorder::rank_compress;
use crate::rational::{self, Rational};

/// Exponents above this are refused; the powers would not fit in memory.
pub const MAX_EXPONENT: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipName {
    PhiPi,
    PsiFacility,
    Upsilon,
    Custom(String),
}

impl fmt::Display for LipName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LipName::PhiPi => write!(f, "phi_pi"),
            LipName::PsiFacility => write!(f, "psi_facility"),
            LipName::Upsilon => write!(f, "upsilon"),
            LipName::Custom(s) => write!(f, "{s}"),
        }
    }
}

type VectorFn = dyn Fn(&[usize]) -> Vec<Rational> + Send + Sync;

/// A vector function `X → R_+^q` evaluated on profiles.
#[derive(Clone)]
pub struct LipFunction {
    name: LipName,
    q: usize,
    eval: Arc<VectorFn>,
}

impl fmt::Debug for LipFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LipFunction")
            .field("name", &self.name)
            .field("q", &self.q)
            .finish_non_exhaustive()
    }
}

impl LipFunction {
    pub fn new<F>(name: LipName, q: usize, eval: F) -> Self
    where
        F: Fn(&[usize]) -> Vec<Rational> + Send + Sync + 'static,
    {
        LipFunction {
            name,
            q,
            eval: Arc::new(eval),
        }
    }

    pub fn custom<F>(label: &str, q: usize, eval: F) -> Self
    where
        F: Fn(&[usize]) -> Vec<Rational> + Send + Sync + 'static,
    {
        Self::new(LipName::Custom(label.to_string()), q, eval)
    }

    /// The game's own private-cost vector.
    pub fn private_costs(game: &FiniteGame) -> Self {
        let oracle = game.oracle();
        Self::new(LipName::PhiPi, game.players(), move |x| oracle(x))
    }

    pub fn name(&self) -> &LipName {
        &self.name
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn eval(&self, x: &[usize]) -> Vec<Rational> {
        (self.eval)(x)
    }

    fn checked_eval(&self, x: &[usize]) -> Result<Vec<Rational>> {
        let v = self.eval(x);
        if v.len() != self.q {
            return Err(Error::validation(
                "certificate dimension",
                format!("{} returned {} entries at {x:?}, expected {}", self.name, v.len(), self.q),
            ));
        }
        if let Some(i) = v.iter().position(|e| e.is_negative()) {
            return Err(Error::validation(
                "non-negativity",
                format!("{} entry {i} is negative at {x:?}", self.name),
            ));
        }
        Ok(v)
    }
}

/// `φ` over the whole profile space, with each vector's ranks pre-sorted
/// non-increasingly so that sorted-lex comparison is slice comparison.
struct Tabulated {
    values: Vec<Vec<Rational>>,
    sorted_ranks: Vec<Vec<u32>>,
}

fn tabulate(game: &FiniteGame, phi: &LipFunction) -> Result<Tabulated> {
    let space = game.space()?;
    let rows = game.exec().map(space.len(), |idx| phi.checked_eval(&space.decode(idx)));
    let values = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let flat: Vec<Rational> = values.iter().flatten().cloned().collect();
    let ranks = rank_compress(&flat);
    let q = phi.q();
    let sorted_ranks = (0..values.len())
        .map(|k| {
            let mut r = ranks[k * q..(k + 1) * q].to_vec();
            r.sort_unstable_by(|a, b| b.cmp(a));
            r
        })
        .collect();
    Ok(Tabulated { values, sorted_ranks })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LipVerdict {
    pub holds: bool,
    pub moves_checked: u64,
    pub counterexample: Option<ImprovingMove>,
}

/// Checks that `φ` strictly decreases in sorted-lex order along every
/// strict improving move of coalitions up to `max_coalition`.
///
/// The counterexample, if any, is the first violation in profile order
/// then coalition order.
pub fn verify_lip(game: &FiniteGame, phi: &LipFunction, max_coalition: usize) -> Result<LipVerdict> {
    verify_lip_with_mode(game, phi, max_coalition, MoveMode::Strict)
}

pub fn verify_lip_with_mode(
    game: &FiniteGame,
    phi: &LipFunction,
    max_coalition: usize,
    mode: MoveMode,
) -> Result<LipVerdict> {
    let table = game.table()?;
    let scanner = MoveScanner::new(game, &table, max_coalition, mode)?;
    let tab = tabulate(game, phi)?;
    let per_profile = game.exec().map(table.len(), |from| {
        let mut count = 0u64;
        let mut bad = None;
        let _ = scanner.scan(from, |c, to| {
            count += 1;
            if bad.is_none() && tab.sorted_ranks[to] >= tab.sorted_ranks[from] {
                bad = Some(scanner.to_move(from, c, to));
            }
            ControlFlow::Continue(())
        });
        (count, bad)
    });
    let moves_checked = per_profile.iter().map(|(c, _)| c).sum();
    let counterexample = per_profile.into_iter().find_map(|(_, bad)| bad);
    Ok(LipVerdict {
        holds: counterexample.is_none(),
        moves_checked,
        counterexample,
    })
}

/// Data defining `P_M(x) = Σ_i φ_i(x)^M`.
#[derive(Clone, Debug)]
pub struct PotentialSpec {
    pub phi: LipFunction,
    pub phi_max: Rational,
    pub eps_min: Rational,
    pub exponent: u32,
    /// Set when the game has no improving move; `eps_min` is then a placeholder.
    pub no_moves: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialSummary {
    pub function: String,
    pub q: usize,
    pub phi_max: String,
    pub eps_min: String,
    pub exponent: u32,
    pub no_moves: bool,
}

impl PotentialSpec {
    /// Builds a spec from externally known bounds; `M` is the smallest
    /// integer above `ln(q)·phi_max/eps_min`.
    pub fn from_bounds(phi: LipFunction, phi_max: Rational, eps_min: Rational) -> Result<Self> {
        if !eps_min.is_positive() {
            return Err(Error::Domain("eps_min must be positive".into()));
        }
        if phi_max.is_negative() {
            return Err(Error::Domain("phi_max must be non-negative".into()));
        }
        let exponent = exponent_for(phi.q(), &(&phi_max / &eps_min))?;
        Ok(PotentialSpec {
            phi,
            phi_max,
            eps_min,
            exponent,
            no_moves: false,
        })
    }

    pub fn q(&self) -> usize {
        self.phi.q()
    }

    pub fn summary(&self) -> PotentialSummary {
        PotentialSummary {
            function: self.phi.name().to_string(),
            q: self.q(),
            phi_max: rational::format(&self.phi_max),
            eps_min: rational::format(&self.eps_min),
            exponent: self.exponent,
            no_moves: self.no_moves,
        }
    }
}

fn exponent_for(q: usize, ratio: &Rational) -> Result<u32> {
    let m = rational::exponent_above_log_bound(q, ratio);
    if m > MAX_EXPONENT {
        return Err(Error::Budget(format!(
            "potential exponent {m} exceeds the limit {MAX_EXPONENT}"
        )));
    }
    Ok(m as u32)
}

/// Exact `phi_max`, `eps_min` and exponent for a game where `φ` has the LIP.
///
/// `eps_min` is the smallest of two quantities over all improving moves:
/// the positive entrywise decreases `φ_i(x) − φ_i(y)`, and the gap at the
/// first index where the sorted vectors differ.
pub fn compute_exponent(game: &FiniteGame, phi: &LipFunction, max_coalition: usize) -> Result<PotentialSpec> {
    let verdict = verify_lip(game, phi, max_coalition)?;
    if let Some(cx) = verdict.counterexample {
        return Err(Error::Domain(format!(
            "{} does not decrease along the move {} -> {}",
            phi.name(),
            cx.from,
            cx.to
        )));
    }
    let table = game.table()?;
    let scanner = MoveScanner::new(game, &table, max_coalition, MoveMode::Strict)?;
    let tab = tabulate(game, phi)?;
    let phi_max = tab
        .values
        .iter()
        .flatten()
        .max()
        .cloned()
        .unwrap_or_else(Rational::zero);
    let per_profile = game.exec().map(table.len(), |from| {
        let mut best: Option<Rational> = None;
        let sx = rational_sorted(&tab.values[from]);
        let _ = scanner.scan(from, |_, to| {
            let vx = &tab.values[from];
            let vy = &tab.values[to];
            for (a, b) in vx.iter().zip(vy) {
                if a > b {
                    let d = a - b;
                    if best.as_ref().is_none_or(|m| d < *m) {
                        best = Some(d);
                    }
                }
            }
            let sy = rational_sorted(vy);
            if let Some(k) = (0..sx.len()).find(|&k| sx[k] != sy[k]) {
                let d = &sx[k] - &sy[k];
                if best.as_ref().is_none_or(|m| d < *m) {
                    best = Some(d);
                }
            }
            ControlFlow::Continue(())
        });
        best
    });
    let eps = per_profile.into_iter().flatten().min();
    match eps {
        Some(eps_min) => {
            let exponent = exponent_for(phi.q(), &(&phi_max / &eps_min))?;
            Ok(PotentialSpec {
                phi: phi.clone(),
                phi_max,
                eps_min,
                exponent,
                no_moves: false,
            })
        }
        None => Ok(PotentialSpec {
            phi: phi.clone(),
            phi_max,
            eps_min: Rational::one(),
            exponent: 1,
            no_moves: true,
        }),
    }
}

fn rational_sorted(v: &[Rational]) -> Vec<Rational> {
    let mut s = v.to_vec();
    s.sort_unstable_by(|a, b| b.cmp(a));
    s
}

pub fn power_sum(values: &[Rational], exponent: u32) -> Rational {
    values.iter().map(|v| rational::pow(v, exponent)).sum()
}

pub fn power_potential(spec: &PotentialSpec, x: &Profile) -> Rational {
    power_sum(&spec.phi.eval(&x.0), spec.exponent)
}

/// `⌈q · phi_max^M / eps_min⌉`.
pub fn path_bound(spec: &PotentialSpec) -> BigUint {
    let q = Rational::from_integer(spec.q().into());
    rational::ceil_to_biguint(&(q * rational::pow(&spec.phi_max, spec.exponent) / &spec.eps_min))
}

/// Sound replacement for [`path_bound`]: the potential's range divided by
/// its smallest decrease along a graph arc, computed over the improvement
/// graph.
pub fn range_path_bound(game: &FiniteGame, spec: &PotentialSpec, max_coalition: usize) -> Result<BigUint> {
    let space = game.space()?;
    let pot = game.exec().map(space.len(), |idx| power_sum(&spec.phi.eval(&space.decode(idx)), spec.exponent));
    let graph = improvement_graph(game, max_coalition)?;
    let mut min_drop: Option<Rational> = None;
    for (u, v) in graph.edges() {
        let d = &pot[u] - &pot[v];
        if !d.is_positive() {
            return Err(Error::Domain(format!(
                "potential does not decrease along {} -> {}",
                space.profile(u),
                space.profile(v)
            )));
        }
        if min_drop.as_ref().is_none_or(|m| d < *m) {
            min_drop = Some(d);
        }
    }
    let Some(drop) = min_drop else {
        return Ok(BigUint::zero());
    };
    let hi = pot.iter().max().expect("non-empty space");
    let lo = pot.iter().min().expect("non-empty space");
    Ok(((hi - lo) / drop).floor().to_integer().to_biguint().expect("non-negative"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologicalPotential {
    /// Label per profile index, strictly decreasing along every arc.
    Labels(Vec<u64>),
    /// A directed cycle of profiles; no potential exists.
    Cycle(Vec<Profile>),
}

/// Labels each profile with the length of the longest improvement path
/// leaving it, or returns a cycle of the improvement graph.
pub fn topological_potential(game: &FiniteGame, max_coalition: usize) -> Result<TopologicalPotential> {
    let graph = improvement_graph(game, max_coalition)?;
    if let Some(cycle) = graph.find_cycle() {
        let space = game.space()?;
        return Ok(TopologicalPotential::Cycle(cycle.into_iter().map(|v| space.profile(v)).collect()));
    }
    Ok(TopologicalPotential::Labels(graph.heights()?))
}

/// The labelling as a one-dimensional vector function.
pub fn labels_as_function(game: &FiniteGame, labels: Vec<u64>) -> Result<LipFunction> {
    let space = game.space()?;
    let labels = Arc::new(labels);
    Ok(LipFunction::custom("topological", 1, move |x| {
        vec![Rational::from_integer(labels[space.index(x)].into())]
    }))
}

/// Compares `P_M` at two vectors; used to check agreement with sorted-lex.
pub fn compare_power(a: &[Rational], b: &[Rational], exponent: u32) -> Ordering {
    power_sum(a, exponent).cmp(&power_sum(b, exponent))
}
