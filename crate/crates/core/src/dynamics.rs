//! Coalition improvement dynamics and full improvement graphs.

use std::ops::ControlFlow;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{is_sne, is_ssne, FiniteGame, MoveMode, MoveScanner, Profile};
use crate::rational::Rational;

pub const DEFAULT_STEP_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// First move in coalition order, then lexicographic deviation order.
    First,
    /// Move maximising the smallest cost decrease among coalition members.
    BestResponse,
    /// Uniform over all available moves.
    Random(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub mode: MoveMode,
    pub max_coalition: usize,
    pub rule: SelectionRule,
    pub step_cap: u64,
}

impl DynamicsConfig {
    /// Strict moves by coalitions of any size, first-move selection.
    pub fn strong(players: usize) -> Self {
        DynamicsConfig {
            mode: MoveMode::Strict,
            max_coalition: players,
            rule: SelectionRule::First,
            step_cap: DEFAULT_STEP_CAP,
        }
    }

    pub fn with_rule(mut self, rule: SelectionRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_step_cap(mut self, cap: u64) -> Self {
        self.step_cap = cap;
        self
    }

    pub fn with_max_coalition(mut self, k: usize) -> Self {
        self.max_coalition = k;
        self
    }

    pub fn with_mode(mut self, mode: MoveMode) -> Self {
        self.mode = mode;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalClass {
    Ssne,
    Sne,
    /// No move of the configured kind, but some larger or weaker deviation exists.
    Stable,
    StepCap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub path: Vec<Profile>,
    pub coalitions: Vec<Vec<usize>>,
    pub terminal: Profile,
    pub steps: u64,
    pub class: TerminalClass,
    pub bound: Option<BigUint>,
}

impl RunReport {
    pub fn with_bound(mut self, bound: BigUint) -> Self {
        self.bound = Some(bound);
        self
    }
}

fn min_gain(cx: &[Rational], cy: &[Rational], coalition: &[usize]) -> Rational {
    coalition
        .iter()
        .map(|&i| &cx[i] - &cy[i])
        .min()
        .expect("coalitions are non-empty")
}

pub fn run(game: &FiniteGame, x0: &Profile, cfg: &DynamicsConfig) -> Result<RunReport> {
    if cfg.step_cap == 0 {
        return Err(Error::validation("step cap", "must be at least 1"));
    }
    game.check_profile(x0)?;
    let table = game.table()?;
    let scanner = MoveScanner::new(game, &table, cfg.max_coalition, cfg.mode.clone())?;
    let space = table.space();
    let mut rng = match cfg.rule {
        SelectionRule::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut cur = space.index(&x0.0);
    let mut path = vec![x0.clone()];
    let mut coalitions = Vec::new();
    let mut steps = 0u64;
    let mut capped = false;
    loop {
        let next: Option<(Vec<usize>, usize)> = match cfg.rule {
            SelectionRule::First => {
                let mut found = None;
                let _ = scanner.scan(cur, |c, to| {
                    found = Some((c.to_vec(), to));
                    ControlFlow::Break(())
                });
                found
            }
            SelectionRule::BestResponse => {
                let cx = table.costs(cur);
                let mut best: Option<(Rational, Vec<usize>, usize)> = None;
                let _ = scanner.scan(cur, |c, to| {
                    let g = min_gain(cx, table.costs(to), c);
                    if best.as_ref().is_none_or(|(bg, _, _)| g > *bg) {
                        best = Some((g, c.to_vec(), to));
                    }
                    ControlFlow::Continue(())
                });
                best.map(|(_, c, to)| (c, to))
            }
            SelectionRule::Random(_) => {
                let mut all = scanner.targets(cur);
                if all.is_empty() {
                    None
                } else {
                    let k = rng.as_mut().expect("seeded").gen_range(0..all.len());
                    Some(all.swap_remove(k))
                }
            }
        };
        let Some((c, to)) = next else { break };
        if steps == cfg.step_cap {
            capped = true;
            break;
        }
        cur = to;
        steps += 1;
        path.push(space.profile(cur));
        coalitions.push(c);
    }
    let terminal = space.profile(cur);
    let class = if capped {
        TerminalClass::StepCap
    } else if is_ssne(game, &terminal)? {
        TerminalClass::Ssne
    } else if is_sne(game, &terminal)? {
        TerminalClass::Sne
    } else {
        TerminalClass::Stable
    };
    Ok(RunReport {
        path,
        coalitions,
        terminal,
        steps,
        class,
        bound: None,
    })
}

/// Profiles are nodes, indexed like the game's profile space; an arc
/// `u → v` exists when some admissible coalition move leads from `u` to `v`.
#[derive(Clone, Debug)]
pub struct ImprovementGraph {
    pub counts: Vec<usize>,
    pub successors: Vec<Vec<u32>>,
}

impl ImprovementGraph {
    pub fn node_count(&self) -> usize {
        self.successors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(u, s)| s.iter().map(move |&v| (u, v as usize)))
    }

    /// A directed cycle as a node sequence `v0 → … → vk → v0`, if any.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        const WHITE: u8 = 0;
        const GREY: u8 = 1;
        const BLACK: u8 = 2;
        let n = self.node_count();
        let mut color = vec![WHITE; n];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for root in 0..n {
            if color[root] != WHITE {
                continue;
            }
            color[root] = GREY;
            stack.push((root, 0));
            while let Some(&mut (u, ref mut next)) = stack.last_mut() {
                if let Some(&v) = self.successors[u].get(*next) {
                    *next += 1;
                    let v = v as usize;
                    match color[v] {
                        WHITE => {
                            color[v] = GREY;
                            stack.push((v, 0));
                        }
                        GREY => {
                            let start = stack.iter().position(|&(w, _)| w == v).expect("grey is on stack");
                            return Some(stack[start..].iter().map(|&(w, _)| w).collect());
                        }
                        _ => {}
                    }
                } else {
                    color[u] = BLACK;
                    stack.pop();
                }
            }
        }
        None
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Number of arcs on the longest path starting at each node.
    pub fn heights(&self) -> Result<Vec<u64>> {
        let n = self.node_count();
        let mut indeg = vec![0usize; n];
        for (_, v) in self.edges() {
            indeg[v] += 1;
        }
        let mut order: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &v in &self.successors[u] {
                let v = v as usize;
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    order.push(v);
                }
            }
        }
        if order.len() != n {
            return Err(Error::Domain("improvement graph has a cycle".into()));
        }
        let mut h = vec![0u64; n];
        for &u in order.iter().rev() {
            h[u] = self.successors[u]
                .iter()
                .map(|&v| h[v as usize] + 1)
                .max()
                .unwrap_or(0);
        }
        Ok(h)
    }
}

pub fn improvement_graph_with_mode(game: &FiniteGame, max_coalition: usize, mode: MoveMode) -> Result<ImprovementGraph> {
    let table = game.table()?;
    if table.len() > u32::MAX as usize {
        return Err(Error::Budget("profile space exceeds 2^32 nodes".into()));
    }
    let scanner = MoveScanner::new(game, &table, max_coalition, mode)?;
    let successors = game.exec().map(table.len(), |u| {
        let mut s: Vec<u32> = scanner.targets(u).into_iter().map(|(_, v)| v as u32).collect();
        s.sort_unstable();
        s.dedup();
        s
    });
    Ok(ImprovementGraph {
        counts: game.strategy_counts().to_vec(),
        successors,
    })
}

/// Graph of strict improving moves by coalitions of size at most `max_coalition`.
pub fn improvement_graph(game: &FiniteGame, max_coalition: usize) -> Result<ImprovementGraph> {
    improvement_graph_with_mode(game, max_coalition, MoveMode::Strict)
}

pub fn longest_path_length(graph: &ImprovementGraph) -> Result<u64> {
    Ok(graph.heights()?.into_iter().max().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congestion::{build_game, phi_pi};
    use crate::fixtures;
    use crate::lexorder::sorted_lex_cmp;
    use crate::potential::{compute_exponent, path_bound, power_potential};
    use crate::rational::int;
    use std::cmp::Ordering;

    fn pennies() -> FiniteGame {
        // player 0 wants to match, player 1 wants to differ
        FiniteGame::from_table(
            vec![2, 2],
            vec![
                vec![int(0), int(1)],
                vec![int(1), int(0)],
                vec![int(1), int(0)],
                vec![int(0), int(1)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn pennies_cycles_until_the_cap() {
        let g = pennies();
        let cfg = DynamicsConfig::strong(2).with_max_coalition(1).with_step_cap(25);
        let r = run(&g, &Profile(vec![0, 0]), &cfg).unwrap();
        assert_eq!(r.class, TerminalClass::StepCap);
        assert_eq!(r.steps, 25);
        let graph = improvement_graph(&g, 1).unwrap();
        let cycle = graph.find_cycle().unwrap();
        assert_eq!(cycle.len(), 4);
        assert!(longest_path_length(&graph).is_err());
    }

    #[test]
    fn start_at_sne_takes_no_steps() {
        let g = fixtures::poa_unbounded(int(1));
        let r = run(&g, &Profile(vec![0, 0]), &DynamicsConfig::strong(2)).unwrap();
        assert_eq!(r.steps, 0);
        assert_eq!(r.path.len(), 1);
        assert!(matches!(r.class, TerminalClass::Sne | TerminalClass::Ssne));
    }

    #[test]
    fn single_profile_graph() {
        let g = FiniteGame::from_table(vec![1], vec![vec![int(4)]]).unwrap();
        let graph = improvement_graph(&g, 1).unwrap();
        assert_eq!(graph.node_count(), 1);
        assert_eq!(graph.edge_count(), 0);
        assert_eq!(longest_path_length(&graph).unwrap(), 0);
    }

    #[test]
    fn chain_of_three() {
        let g = FiniteGame::from_table(vec![3], vec![vec![int(2)], vec![int(1)], vec![int(0)]]).unwrap();
        let graph = improvement_graph(&g, 1).unwrap();
        assert_eq!(graph.edge_count(), 3);
        assert_eq!(longest_path_length(&graph).unwrap(), 2);
    }

    #[test]
    fn bottleneck_runs_end_in_sne_with_decreasing_phi() {
        let bg = build_game(fixtures::upsilon_counter());
        let g = bg.game();
        let spec = compute_exponent(g, &phi_pi(&bg), 2).unwrap();
        let bound = path_bound(&spec);
        let space = g.space().unwrap();
        for seed in 0..5 {
            for start in 0..space.len() {
                let cfg = DynamicsConfig::strong(2).with_rule(SelectionRule::Random(seed));
                let r = run(g, &space.profile(start), &cfg).unwrap();
                assert!(matches!(r.class, TerminalClass::Sne | TerminalClass::Ssne));
                assert!(BigUint::from(r.steps) <= bound);
                for w in r.path.windows(2) {
                    let a = g.costs(&w[0]).unwrap();
                    let b = g.costs(&w[1]).unwrap();
                    assert_eq!(sorted_lex_cmp(&b, &a).unwrap(), Ordering::Less);
                    assert!(power_potential(&spec, &w[1]) < power_potential(&spec, &w[0]));
                }
            }
        }
    }

    #[test]
    fn random_rule_is_reproducible() {
        let g = fixtures::example_root(3, int(1), crate::rational::ratio(1, 100));
        let x0 = Profile(vec![1, 1, 0]);
        let cfg = DynamicsConfig::strong(3).with_rule(SelectionRule::Random(7));
        assert_eq!(run(&g, &x0, &cfg).unwrap(), run(&g, &x0, &cfg).unwrap());
    }

    #[test]
    fn best_response_prefers_larger_gains() {
        let g = FiniteGame::from_table(vec![3], vec![vec![int(5)], vec![int(4)], vec![int(0)]]).unwrap();
        let cfg = DynamicsConfig::strong(1).with_rule(SelectionRule::BestResponse);
        let r = run(&g, &Profile(vec![0]), &cfg).unwrap();
        assert_eq!(r.steps, 1);
        assert_eq!(r.terminal, Profile(vec![2]));
        let first = run(&g, &Profile(vec![0]), &DynamicsConfig::strong(1)).unwrap();
        assert_eq!(first.steps, 2);
    }

    #[test]
    fn terminal_class_matches_game_core() {
        let g = fixtures::example_root(3, int(1), crate::rational::ratio(1, 100));
        let space = g.space().unwrap();
        for idx in 0..space.len() {
            let r = run(&g, &space.profile(idx), &DynamicsConfig::strong(3)).unwrap();
            assert!(is_sne(&g, &r.terminal).unwrap());
            assert_eq!(r.class == TerminalClass::Ssne, is_ssne(&g, &r.terminal).unwrap());
        }
    }
}
