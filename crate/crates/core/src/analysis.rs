//! Efficiency and fairness of profiles: Pareto checks, min-max fairness,
//! `L_p` social costs and the strong prices of stability and anarchy.

use std::cmp::Ordering;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{enumerate_sne, CostTable, FiniteGame, Profile};
use crate::lexorder::{cmp_sorted, sorted_desc};
use crate::rational::{self, Rational};

/// Social cost norm. `Inf` is its own symbol rather than a large `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    L1,
    Lp(u32),
    Inf,
}

impl Norm {
    pub fn parse(text: &str) -> Result<Norm> {
        match text.trim() {
            "inf" | "infinity" | "∞" => Ok(Norm::Inf),
            "1" => Ok(Norm::L1),
            other => match other.parse::<u32>() {
                Ok(p) if p >= 2 => Ok(Norm::Lp(p)),
                _ => Err(Error::Domain(format!("norm p must be an integer >= 1 or inf, got {other:?}"))),
            },
        }
    }
}

/// `L_1` and `L_inf` are exact; `L_p` for `p > 1` is a float within 1e-12
/// relative error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SocialCost {
    Exact(Rational),
    Real(f64),
}

impl SocialCost {
    pub fn to_f64(&self) -> f64 {
        match self {
            SocialCost::Exact(r) => rational::to_f64(r),
            SocialCost::Real(v) => *v,
        }
    }
}

/// A price of stability or anarchy. `Unbounded` is reported when the social
/// optimum is zero while the equilibrium cost is not; `0/0` is taken as 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Price {
    Exact(Rational),
    Real(f64),
    Unbounded,
}

impl Price {
    pub fn to_f64(&self) -> f64 {
        match self {
            Price::Exact(r) => rational::to_f64(r),
            Price::Real(v) => *v,
            Price::Unbounded => f64::INFINITY,
        }
    }
}

/// Exact monotone key for a norm: the sum for `L_1`, the `p`-th power sum for
/// `L_p`, the maximum for `L_inf`.
fn norm_key(costs: &[Rational], norm: Norm) -> Rational {
    match norm {
        Norm::L1 => costs.iter().sum(),
        Norm::Lp(p) => costs.iter().map(|c| rational::pow(c, p)).sum(),
        Norm::Inf => costs.iter().max().cloned().unwrap_or_else(Rational::zero),
    }
}

fn key_to_cost(key: Rational, norm: Norm) -> SocialCost {
    match norm {
        Norm::L1 | Norm::Inf => SocialCost::Exact(key),
        Norm::Lp(p) => SocialCost::Real(rational::to_f64(&key).powf(1.0 / p as f64)),
    }
}

pub fn lp_cost_of(costs: &[Rational], norm: Norm) -> SocialCost {
    key_to_cost(norm_key(costs, norm), norm)
}

pub fn lp_cost(game: &FiniteGame, x: &Profile, norm: Norm) -> Result<SocialCost> {
    Ok(lp_cost_of(&game.costs(x)?, norm))
}

fn ratio_price(num: &Rational, den: &Rational, norm: Norm) -> Price {
    if den.is_zero() {
        return if num.is_zero() {
            Price::Exact(Rational::one())
        } else {
            Price::Unbounded
        };
    }
    let r = num / den;
    match norm {
        Norm::L1 | Norm::Inf => Price::Exact(r),
        Norm::Lp(p) => Price::Real(rational::to_f64(&r).powf(1.0 / p as f64)),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub norm: Norm,
    pub optimum: SocialCost,
    pub optimum_profile: Profile,
    pub best_sne: Profile,
    pub best_sne_cost: SocialCost,
    pub worst_sne: Profile,
    pub worst_sne_cost: SocialCost,
    pub price_of_stability: Price,
    pub price_of_anarchy: Price,
    pub sne_count: usize,
}

/// Strong price of stability and anarchy by brute force.
pub fn efficiency(game: &FiniteGame, norm: Norm) -> Result<EfficiencyReport> {
    let table = game.table()?;
    let keys: Vec<Rational> = game
        .exec()
        .map(table.len(), |idx| norm_key(table.costs(idx), norm));
    let opt_idx = argmin(&keys).expect("non-empty profile space");
    let sne = enumerate_sne(game)?;
    if sne.is_empty() {
        return Err(Error::Domain("the game has no strong Nash equilibrium".into()));
    }
    let space = table.space();
    let sne_idx: Vec<usize> = sne.iter().map(|p| space.index(&p.0)).collect();
    let best = *sne_idx
        .iter()
        .min_by(|a, b| keys[**a].cmp(&keys[**b]))
        .expect("non-empty");
    let worst = *sne_idx
        .iter()
        .max_by(|a, b| keys[**a].cmp(&keys[**b]).then(b.cmp(a)))
        .expect("non-empty");
    Ok(EfficiencyReport {
        norm,
        optimum: key_to_cost(keys[opt_idx].clone(), norm),
        optimum_profile: space.profile(opt_idx),
        best_sne: space.profile(best),
        best_sne_cost: key_to_cost(keys[best].clone(), norm),
        worst_sne: space.profile(worst),
        worst_sne_cost: key_to_cost(keys[worst].clone(), norm),
        price_of_stability: ratio_price(&keys[best], &keys[opt_idx], norm),
        price_of_anarchy: ratio_price(&keys[worst], &keys[opt_idx], norm),
        sne_count: sne.len(),
    })
}

pub fn strong_pos(game: &FiniteGame, norm: Norm) -> Result<Price> {
    Ok(efficiency(game, norm)?.price_of_stability)
}

pub fn strong_poa(game: &FiniteGame, norm: Norm) -> Result<Price> {
    Ok(efficiency(game, norm)?.price_of_anarchy)
}

fn argmin(keys: &[Rational]) -> Option<usize> {
    (0..keys.len()).min_by(|a, b| keys[*a].cmp(&keys[*b]))
}

fn all_profiles_where(game: &FiniteGame, x: &Profile, pred: impl Fn(&[Rational], &[Rational]) -> bool + Sync + Send) -> Result<bool> {
    let table = game.table()?;
    let cx = game.costs(x)?;
    let table = &*table;
    Ok(game
        .exec()
        .find_first(table.len(), |idx| (!pred(&cx, table.costs(idx))).then_some(()))
        .is_none())
}

/// No `y` is at least as good for everyone and strictly better for someone.
pub fn is_strict_pareto(game: &FiniteGame, x: &Profile) -> Result<bool> {
    all_profiles_where(game, x, |cx, cy| {
        let dominated = cx.iter().zip(cy).all(|(a, b)| b <= a) && cx.iter().zip(cy).any(|(a, b)| b < a);
        !dominated
    })
}

/// No `y` is strictly better for everyone.
pub fn is_weak_pareto(game: &FiniteGame, x: &Profile) -> Result<bool> {
    all_profiles_where(game, x, |cx, cy| !cx.iter().zip(cy).all(|(a, b)| b < a))
}

/// For every `y` lowering some `π_i`, some `j` with `π_j(x) >= π_i(x)` must
/// get strictly worse.
pub fn is_minmax_fair(game: &FiniteGame, x: &Profile) -> Result<bool> {
    all_profiles_where(game, x, |cx, cy| {
        (0..cx.len()).all(|i| {
            cy[i] >= cx[i] || (0..cx.len()).any(|j| cx[j] >= cx[i] && cy[j] > cx[j])
        })
    })
}

fn sorted_rank_rows(table: &CostTable, game: &FiniteGame) -> Vec<Vec<u32>> {
    game.exec().map(table.len(), |idx| sorted_desc(table.ranks(idx)))
}

/// Profiles whose private-cost vector is minimal in the sorted
/// lexicographical order.
pub fn sorted_lex_minimizers(game: &FiniteGame) -> Result<Vec<Profile>> {
    let table = game.table()?;
    let rows = sorted_rank_rows(&table, game);
    let best = rows
        .iter()
        .min_by(|a, b| cmp_sorted(a, b))
        .expect("non-empty")
        .clone();
    Ok(rows
        .iter()
        .enumerate()
        .filter(|(_, r)| cmp_sorted(r, &best) == Ordering::Equal)
        .map(|(idx, _)| table.space().profile(idx))
        .collect())
}

pub fn enumerate_minmax_fair(game: &FiniteGame) -> Result<Vec<Profile>> {
    let space = game.space()?;
    let mut out = Vec::new();
    for idx in 0..space.len() {
        let x = space.profile(idx);
        if is_minmax_fair(game, &x)? {
            out.push(x);
        }
    }
    Ok(out)
}
