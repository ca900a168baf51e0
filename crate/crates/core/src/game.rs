//! Finite strategic games in normal form and their improving moves.

use std::fmt;
use std::ops::ControlFlow;
use std::sync::{Arc, OnceLock};

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lexorder::rank_compress;
use crate::rational::Rational;

/// Enumeration limits. Exceeding one is an error, never a silent cut-off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_profiles: usize,
    pub max_coalitions: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_profiles: 1_000_000,
            max_coalitions: 1 << 12,
        }
    }
}

/// One strategy index per player.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Profile(pub Vec<usize>);

impl Profile {
    pub fn new(choices: Vec<usize>) -> Self {
        Profile(choices)
    }

    pub fn choices(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Mixed-radix indexing of the profile space; the first player is the most
/// significant digit so index order is lexicographic profile order.
#[derive(Clone, Debug)]
pub struct ProfileSpace {
    counts: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl ProfileSpace {
    pub fn new(counts: &[usize], budget: &Budget) -> Result<Self> {
        let mut strides = vec![0; counts.len()];
        let mut len: usize = 1;
        for i in (0..counts.len()).rev() {
            strides[i] = len;
            len = len
                .checked_mul(counts[i])
                .filter(|&l| l <= budget.max_profiles)
                .ok_or_else(|| {
                    Error::Budget(format!(
                        "profile space exceeds {} profiles",
                        budget.max_profiles
                    ))
                })?;
        }
        Ok(ProfileSpace {
            counts: counts.to_vec(),
            strides,
            len,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn stride(&self, player: usize) -> usize {
        self.strides[player]
    }

    pub fn index(&self, choices: &[usize]) -> usize {
        choices.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|s| {
                let c = index / s;
                index %= s;
                c
            })
            .collect()
    }

    pub fn profile(&self, index: usize) -> Profile {
        Profile(self.decode(index))
    }
}

pub type CostFn = dyn Fn(&[usize]) -> Vec<Rational> + Send + Sync;

/// Private costs of every profile, with an order-preserving integer rank per
/// entry for fast strict comparisons.
#[derive(Debug)]
pub struct CostTable {
    space: ProfileSpace,
    players: usize,
    costs: Vec<Rational>,
    ranks: Vec<u32>,
}

impl CostTable {
    pub fn space(&self) -> &ProfileSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn costs(&self, index: usize) -> &[Rational] {
        &self.costs[index * self.players..(index + 1) * self.players]
    }

    pub fn ranks(&self, index: usize) -> &[u32] {
        &self.ranks[index * self.players..(index + 1) * self.players]
    }
}

/// A finite game `(N, X, π)` with an exact private-cost oracle.
///
/// The oracle must be deterministic and pure. The full cost table is built
/// once, on first use of an enumeration op, and cached.
pub struct FiniteGame {
    counts: Vec<usize>,
    oracle: Arc<CostFn>,
    budget: Budget,
    exec: Exec,
    table: OnceLock<Arc<CostTable>>,
}

impl Clone for FiniteGame {
    fn clone(&self) -> Self {
        let table = OnceLock::new();
        if let Some(t) = self.table.get() {
            let _ = table.set(t.clone());
        }
        FiniteGame {
            counts: self.counts.clone(),
            oracle: self.oracle.clone(),
            budget: self.budget,
            exec: self.exec,
            table,
        }
    }
}

impl fmt::Debug for FiniteGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGame")
            .field("strategy_counts", &self.counts)
            .field("budget", &self.budget)
            .finish_non_exhaustive()
    }
}

impl FiniteGame {
    pub fn new<F>(strategy_counts: Vec<usize>, oracle: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Vec<Rational> + Send + Sync + 'static,
    {
        Self::from_arc(strategy_counts, Arc::new(oracle))
    }

    pub fn from_arc(strategy_counts: Vec<usize>, oracle: Arc<CostFn>) -> Result<Self> {
        if strategy_counts.is_empty() {
            return Err(Error::validation("players", "a game needs at least one player"));
        }
        if let Some(i) = strategy_counts.iter().position(|&c| c == 0) {
            return Err(Error::validation(
                "strategies",
                format!("player {i} has an empty strategy set"),
            ));
        }
        Ok(FiniteGame {
            counts: strategy_counts,
            oracle,
            budget: Budget::default(),
            exec: Exec::default(),
            table: OnceLock::new(),
        })
    }

    /// A game given by its cost table in lexicographic profile order.
    pub fn from_table(strategy_counts: Vec<usize>, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let space = ProfileSpace::new(&strategy_counts, &Budget::default())?;
        if rows.len() != space.len() {
            return Err(Error::validation(
                "cost table",
                format!("expected {} rows, found {}", space.len(), rows.len()),
            ));
        }
        let n = strategy_counts.len();
        if let Some(r) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::validation(
                "cost table",
                format!("row {r} does not have {n} entries"),
            ));
        }
        let rows = Arc::new(rows);
        let space = Arc::new(space);
        FiniteGame::new(strategy_counts, move |x: &[usize]| rows[space.index(x)].clone())
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self.table = OnceLock::new();
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn players(&self) -> usize {
        self.counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn oracle(&self) -> Arc<CostFn> {
        self.oracle.clone()
    }

    pub fn space(&self) -> Result<ProfileSpace> {
        ProfileSpace::new(&self.counts, &self.budget)
    }

    pub fn check_profile(&self, x: &Profile) -> Result<()> {
        if x.0.len() != self.counts.len() {
            return Err(Error::Dimension {
                left: x.0.len(),
                right: self.counts.len(),
            });
        }
        if let Some(i) = (0..x.0.len()).find(|&i| x.0[i] >= self.counts[i]) {
            return Err(Error::validation(
                "profile",
                format!("player {i} strategy {} out of range {}", x.0[i], self.counts[i]),
            ));
        }
        Ok(())
    }

    /// Private costs at a single profile, straight from the oracle.
    pub fn costs(&self, x: &Profile) -> Result<Vec<Rational>> {
        self.check_profile(x)?;
        if let Some(t) = self.table.get() {
            return Ok(t.costs(t.space.index(&x.0)).to_vec());
        }
        let c = (self.oracle)(&x.0);
        check_cost_row(&x.0, &c, self.players())?;
        Ok(c)
    }

    pub fn table(&self) -> Result<Arc<CostTable>> {
        if let Some(t) = self.table.get() {
            return Ok(t.clone());
        }
        let table = Arc::new(self.build_table(self.exec)?);
        let _ = self.table.set(table.clone());
        Ok(table)
    }

    /// Tabulates without touching the cache.
    pub fn build_table(&self, exec: Exec) -> Result<CostTable> {
        let space = self.space()?;
        let n = self.players();
        let rows = exec.map(space.len(), |idx| {
            let x = space.decode(idx);
            let c = (self.oracle)(&x);
            check_cost_row(&x, &c, n).map(|_| c)
        });
        let mut costs = Vec::with_capacity(space.len() * n);
        for row in rows {
            costs.extend(row?);
        }
        let ranks = rank_compress(&costs);
        Ok(CostTable {
            space,
            players: n,
            costs,
            ranks,
        })
    }
}

fn check_cost_row(x: &[usize], c: &[Rational], n: usize) -> Result<()> {
    if c.len() != n {
        return Err(Error::validation(
            "cost oracle",
            format!("profile {x:?} returned {} costs for {n} players", c.len()),
        ));
    }
    if let Some(i) = c.iter().position(|v| v.is_negative()) {
        return Err(Error::validation(
            "non-negativity",
            format!("player {i} has cost {} at profile {x:?}", c[i]),
        ));
    }
    Ok(())
}

/// Which deviations count as improving.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveMode {
    /// Every coalition member strictly gains.
    Strict,
    /// Nobody in the coalition loses and at least one member strictly gains.
    WeakSsne,
    /// Every coalition member gains more than the given amount.
    AlphaStrict(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImprovingMove {
    pub from: Profile,
    pub coalition: Vec<usize>,
    pub to: Profile,
    pub mode: MoveMode,
}

/// Coalitions of movable players (at least two strategies each), ordered by
/// size and then lexicographically.
pub(crate) fn coalitions(counts: &[usize], max_size: usize, budget: &Budget) -> Result<Vec<Vec<usize>>> {
    let movable: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] >= 2).collect();
    let mut out = Vec::new();
    for size in 1..=max_size.min(movable.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.iter().map(|&k| movable[k]).collect());
            if out.len() > budget.max_coalitions {
                return Err(Error::Budget(format!(
                    "more than {} coalitions",
                    budget.max_coalitions
                )));
            }
            let Some(pos) = (0..size).rev().find(|&p| idx[p] != p + movable.len() - size) else {
                break;
            };
            idx[pos] += 1;
            for q in pos + 1..size {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    Ok(out)
}

/// Enumerates improving moves out of tabulated profiles.
///
/// A deviation is identified with the set `D` of players that change
/// strategy. Under `Strict` and `AlphaStrict` the reported coalition is `D`
/// itself: any larger coalition realising the same profile pair imposes more
/// conditions. Under `WeakSsne` a non-changing player may be the one who
/// strictly gains, so when no member of `D` strictly gains the coalition is
/// extended by the smallest-indexed outside player who does, size permitting.
pub struct MoveScanner<'a> {
    table: &'a CostTable,
    coalitions: Vec<Vec<usize>>,
    mode: MoveMode,
    max_coalition: usize,
}

impl<'a> MoveScanner<'a> {
    pub fn new(game: &FiniteGame, table: &'a CostTable, max_coalition: usize, mode: MoveMode) -> Result<Self> {
        let n = game.players();
        if max_coalition == 0 || max_coalition > n {
            return Err(Error::Domain(format!(
                "max coalition {max_coalition} outside 1..={n}"
            )));
        }
        if let MoveMode::AlphaStrict(a) = &mode {
            if !a.is_positive() {
                return Err(Error::Domain("alpha must be positive".into()));
            }
        }
        Ok(MoveScanner {
            table,
            coalitions: coalitions(game.strategy_counts(), max_coalition, game.budget())?,
            mode,
            max_coalition,
        })
    }

    pub fn table(&self) -> &CostTable {
        self.table
    }

    pub fn mode(&self) -> &MoveMode {
        &self.mode
    }

    /// Calls `f(coalition, target_index)` for every improving move out of
    /// `from`, in coalition order then lexicographic deviation order.
    pub fn scan<F>(&self, from: usize, mut f: F) -> ControlFlow<()>
    where
        F: FnMut(&[usize], usize) -> ControlFlow<()>,
    {
        let space = &self.table.space;
        let counts = space.counts();
        let x = space.decode(from);
        let rx = self.table.ranks(from);
        let mut extended: Vec<usize> = Vec::new();
        for d in &self.coalitions {
            // odometer over y_i != x_i for i in d
            let mut digits: Vec<usize> = d.iter().map(|&i| usize::from(x[i] == 0)).collect();
            loop {
                let mut to = from;
                for (k, &i) in d.iter().enumerate() {
                    to = to + digits[k] * space.stride(i) - x[i] * space.stride(i);
                }
                let ry = self.table.ranks(to);
                match &self.mode {
                    MoveMode::Strict => {
                        if d.iter().all(|&i| ry[i] < rx[i]) {
                            f(d, to)?;
                        }
                    }
                    MoveMode::AlphaStrict(alpha) => {
                        let cx = self.table.costs(from);
                        let cy = self.table.costs(to);
                        if d.iter().all(|&i| &(&cx[i] - &cy[i]) > alpha) {
                            f(d, to)?;
                        }
                    }
                    MoveMode::WeakSsne => {
                        if d.iter().all(|&i| ry[i] <= rx[i]) {
                            if d.iter().any(|&i| ry[i] < rx[i]) {
                                f(d, to)?;
                            } else if d.len() < self.max_coalition {
                                let gainer = (0..rx.len()).find(|&j| !d.contains(&j) && ry[j] < rx[j]);
                                if let Some(j) = gainer {
                                    extended.clear();
                                    extended.extend_from_slice(d);
                                    extended.push(j);
                                    extended.sort_unstable();
                                    f(&extended, to)?;
                                }
                            }
                        }
                    }
                }
                // advance odometer, skipping each member's current strategy
                let mut k = d.len();
                let advanced = loop {
                    if k == 0 {
                        break false;
                    }
                    k -= 1;
                    let i = d[k];
                    let mut next = digits[k] + 1;
                    if next == x[i] {
                        next += 1;
                    }
                    if next < counts[i] {
                        digits[k] = next;
                        for (kk, &ii) in d.iter().enumerate().skip(k + 1) {
                            digits[kk] = usize::from(x[ii] == 0);
                        }
                        break true;
                    }
                };
                if !advanced {
                    break;
                }
            }
        }
        ControlFlow::Continue(())
    }

    pub fn has_move(&self, from: usize) -> bool {
        self.scan(from, |_, _| ControlFlow::Break(())).is_break()
    }

    pub fn targets(&self, from: usize) -> Vec<(Vec<usize>, usize)> {
        let mut out = Vec::new();
        let _ = self.scan(from, |c, to| {
            out.push((c.to_vec(), to));
            ControlFlow::Continue(())
        });
        out
    }

    pub fn to_move(&self, from: usize, coalition: &[usize], to: usize) -> ImprovingMove {
        ImprovingMove {
            from: self.table.space.profile(from),
            coalition: coalition.to_vec(),
            to: self.table.space.profile(to),
            mode: self.mode.clone(),
        }
    }
}

pub fn improving_moves(
    game: &FiniteGame,
    x: &Profile,
    max_coalition: usize,
    mode: MoveMode,
) -> Result<Vec<ImprovingMove>> {
    game.check_profile(x)?;
    let table = game.table()?;
    let scanner = MoveScanner::new(game, &table, max_coalition, mode)?;
    let from = table.space.index(&x.0);
    Ok(scanner
        .targets(from)
        .into_iter()
        .map(|(c, to)| scanner.to_move(from, &c, to))
        .collect())
}

fn has_any_move(game: &FiniteGame, x: &Profile, max_coalition: usize, mode: MoveMode) -> Result<bool> {
    game.check_profile(x)?;
    let table = game.table()?;
    let scanner = MoveScanner::new(game, &table, max_coalition, mode)?;
    Ok(scanner.has_move(table.space.index(&x.0)))
}

/// No coalition of any size has a deviation that strictly helps all members.
pub fn is_sne(game: &FiniteGame, x: &Profile) -> Result<bool> {
    Ok(!has_any_move(game, x, game.players(), MoveMode::Strict)?)
}

/// Super strong equilibrium: no coalition can make one member strictly
/// better without making any member worse.
pub fn is_ssne(game: &FiniteGame, x: &Profile) -> Result<bool> {
    Ok(!has_any_move(game, x, game.players(), MoveMode::WeakSsne)?)
}

pub fn is_pne(game: &FiniteGame, x: &Profile) -> Result<bool> {
    Ok(!has_any_move(game, x, 1, MoveMode::Strict)?)
}

fn enumerate_stable(game: &FiniteGame, max_coalition: usize, mode: MoveMode) -> Result<Vec<Profile>> {
    let table = game.table()?;
    let scanner = MoveScanner::new(game, &table, max_coalition, mode)?;
    let stable = game.exec().map(table.len(), |idx| !scanner.has_move(idx));
    Ok(stable
        .into_iter()
        .enumerate()
        .filter(|(_, s)| *s)
        .map(|(idx, _)| table.space.profile(idx))
        .collect())
}

/// All strong Nash equilibria, in lexicographic order.
pub fn enumerate_sne(game: &FiniteGame) -> Result<Vec<Profile>> {
    enumerate_stable(game, game.players(), MoveMode::Strict)
}

pub fn enumerate_ssne(game: &FiniteGame) -> Result<Vec<Profile>> {
    enumerate_stable(game, game.players(), MoveMode::WeakSsne)
}

pub fn enumerate_pne(game: &FiniteGame) -> Result<Vec<Profile>> {
    enumerate_stable(game, 1, MoveMode::Strict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{int, ratio};

    fn table_game(counts: Vec<usize>, rows: &[&[i64]]) -> FiniteGame {
        FiniteGame::from_table(
            counts,
            rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn profile_space_is_lexicographic() {
        let s = ProfileSpace::new(&[2, 3], &Budget::default()).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.decode(0), vec![0, 0]);
        assert_eq!(s.decode(1), vec![0, 1]);
        assert_eq!(s.decode(3), vec![1, 0]);
        assert_eq!(s.index(&[1, 2]), 5);
    }

    #[test]
    fn budget_is_enforced() {
        let b = Budget {
            max_profiles: 10,
            ..Budget::default()
        };
        assert!(matches!(ProfileSpace::new(&[4, 4], &b), Err(Error::Budget(_))));
    }

    #[test]
    fn coalition_order() {
        let c = coalitions(&[2, 1, 2, 2], 2, &Budget::default()).unwrap();
        assert_eq!(c, vec![vec![0], vec![2], vec![3], vec![0, 2], vec![0, 3], vec![2, 3]]);
    }

    #[test]
    fn rejects_bad_games() {
        assert!(FiniteGame::new(vec![], |_| vec![]).is_err());
        assert!(FiniteGame::new(vec![2, 0], |_| vec![]).is_err());
        let g = FiniteGame::new(vec![2], |_| vec![int(-1)]).unwrap();
        assert!(matches!(g.table(), Err(Error::Validation { .. })));
        let g = table_game(vec![2], &[&[0], &[1]]);
        assert!(g.check_profile(&Profile(vec![2])).is_err());
        assert!(improving_moves(&g, &Profile(vec![0]), 2, MoveMode::Strict).is_err());
    }

    #[test]
    fn poa_fixture_sne_at_origin() {
        let g = fixtures::poa_unbounded(int(1));
        assert!(improving_moves(&g, &Profile(vec![0, 0]), 2, MoveMode::Strict)
            .unwrap()
            .is_empty());
        assert_eq!(
            enumerate_sne(&g).unwrap(),
            vec![Profile(vec![0, 0]), Profile(vec![1, 1])]
        );
        assert!(is_ssne(&g, &Profile(vec![0, 0])).unwrap());
    }

    #[test]
    fn example_root_unique_sne() {
        let g = fixtures::example_root(3, int(1), ratio(1, 100));
        assert!(is_sne(&g, &Profile(vec![0, 0, 0])).unwrap());
        assert!(!is_sne(&g, &Profile(vec![1, 0, 0])).unwrap());
        assert_eq!(enumerate_sne(&g).unwrap(), vec![Profile(vec![0, 0, 0])]);
    }

    #[test]
    fn never_returns_self_move() {
        let g = table_game(vec![2, 2], &[&[1, 2], &[0, 0], &[3, 1], &[2, 2]]);
        for idx in 0..4 {
            let x = g.space().unwrap().profile(idx);
            for mode in [MoveMode::Strict, MoveMode::WeakSsne, MoveMode::AlphaStrict(ratio(1, 2))] {
                for m in improving_moves(&g, &x, 2, mode).unwrap() {
                    assert_ne!(m.from, m.to);
                    for i in 0..2 {
                        if !m.coalition.contains(&i) {
                            assert_eq!(m.from.0[i], m.to.0[i]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn neutral_mover_helping_partner_breaks_ssne() {
        // Player 0 switching 0 -> 1 leaves its own cost at 1 and lowers player
        // 1's cost from 2 to 1. Strict moves do not exist from (0,0).
        let g = table_game(vec![2, 1], &[&[1, 2], &[1, 1]]);
        let x = Profile(vec![0, 0]);
        assert!(is_sne(&g, &x).unwrap());
        assert!(!is_ssne(&g, &x).unwrap());
        let moves = improving_moves(&g, &x, 2, MoveMode::WeakSsne).unwrap();
        assert_eq!(moves.len(), 1);
        assert_eq!(moves[0].coalition, vec![0, 1]);
        // with coalitions capped at one player the extension is not allowed
        assert!(improving_moves(&g, &x, 1, MoveMode::WeakSsne).unwrap().is_empty());
    }

    #[test]
    fn constant_game_everything_is_sne() {
        let g = FiniteGame::new(vec![2, 3], |_| vec![int(4), int(4)]).unwrap();
        assert_eq!(enumerate_sne(&g).unwrap().len(), 6);
    }

    #[test]
    fn single_player_sne_iff_minimizer() {
        let g = table_game(vec![4], &[&[3], &[1], &[1], &[2]]);
        let sne = enumerate_sne(&g).unwrap();
        assert_eq!(sne, vec![Profile(vec![1]), Profile(vec![2])]);
    }

    #[test]
    fn alpha_moves_need_large_gain() {
        let g = table_game(vec![2], &[&[3], &[2]]);
        let x = Profile(vec![0]);
        assert_eq!(improving_moves(&g, &x, 1, MoveMode::AlphaStrict(ratio(1, 2))).unwrap().len(), 1);
        assert!(improving_moves(&g, &x, 1, MoveMode::AlphaStrict(int(1))).unwrap().is_empty());
        assert!(improving_moves(&g, &x, 1, MoveMode::AlphaStrict(int(0))).is_err());
    }
}
