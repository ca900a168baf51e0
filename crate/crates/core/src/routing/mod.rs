//! Bottleneck routing games on digraphs and two SNE algorithms for the
//! single-commodity unit-demand case.

pub mod flow;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::congestion::{CongestionModel, Facility, FacilityCost};
use crate::error::{Error, Result};
use crate::game::Profile;
use crate::potential::{power_sum, MAX_EXPONENT};
use crate::rational::{self, Rational};

use flow::{cancel_cycles, decompose, excess, unit_max_flow, Digraph, IntegralFlow};

/// Simple-path enumeration refuses to list more paths than this per pair.
pub const MAX_PATHS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingArc {
    pub tail: usize,
    pub head: usize,
    /// `c(k)` for `k = 0..=n`.
    pub cost: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingInstance {
    pub vertices: Vec<String>,
    pub arcs: Vec<RoutingArc>,
    /// `(source, sink)` per player; all unit demands.
    pub terminals: Vec<(usize, usize)>,
    pub cost_bound: Rational,
}

impl RoutingInstance {
    /// Validates tables (length `n+1`, non-negative, non-decreasing); the
    /// cost bound defaults to the largest table entry.
    pub fn new(
        vertices: Vec<String>,
        arcs: Vec<RoutingArc>,
        terminals: Vec<(usize, usize)>,
        cost_bound: Option<Rational>,
    ) -> Result<Self> {
        let n = terminals.len();
        if n == 0 {
            return Err(Error::validation("players", "no players"));
        }
        let nv = vertices.len();
        if let Some(&(s, t)) = terminals.iter().find(|&&(s, t)| s >= nv || t >= nv || s == t) {
            return Err(Error::validation(
                "terminals",
                format!("pair ({s}, {t}) is out of range or has equal ends"),
            ));
        }
        for (a, arc) in arcs.iter().enumerate() {
            if arc.tail >= nv || arc.head >= nv || arc.tail == arc.head {
                return Err(Error::validation("arcs", format!("arc {a} has invalid ends")));
            }
            if arc.cost.len() != n + 1 {
                return Err(Error::validation(
                    "load table",
                    format!("arc {a} needs {} entries, found {}", n + 1, arc.cost.len()),
                ));
            }
            if arc.cost.iter().any(|c| c.is_negative()) {
                return Err(Error::validation("non-negativity", format!("arc {a} has a negative cost")));
            }
            if let Some(k) = (1..=n).find(|&k| arc.cost[k] < arc.cost[k - 1]) {
                return Err(Error::validation(
                    "monotonicity",
                    format!("arc {a}: c({k}) < c({})", k - 1),
                ));
            }
        }
        let max = arcs
            .iter()
            .flat_map(|a| a.cost.iter())
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero);
        let cost_bound = match cost_bound {
            Some(c) if c < max => {
                return Err(Error::validation(
                    "cost bound",
                    format!("bound {} is below the table maximum {}", rational::format(&c), rational::format(&max)),
                ))
            }
            Some(c) => c,
            None => max,
        };
        Ok(RoutingInstance {
            vertices,
            arcs,
            terminals,
            cost_bound,
        })
    }

    pub fn players(&self) -> usize {
        self.terminals.len()
    }

    pub fn digraph(&self) -> Digraph {
        let pairs: Vec<(usize, usize)> = self.arcs.iter().map(|a| (a.tail, a.head)).collect();
        Digraph::new(self.vertices.len(), &pairs)
    }

    pub fn common_terminals(&self) -> Result<(usize, usize)> {
        let first = self.terminals[0];
        if self.terminals.iter().any(|&p| p != first) {
            return Err(Error::validation("single commodity", "players have different terminals"));
        }
        Ok(first)
    }

    /// Simple `s`–`t` paths as arc sequences in lexicographic order.
    pub fn simple_paths(&self, s: usize, t: usize) -> Result<Vec<Vec<usize>>> {
        let g = self.digraph();
        let mut out = Vec::new();
        let mut on_path = vec![false; g.vertices];
        let mut path = Vec::new();
        on_path[s] = true;
        extend_paths(&g, s, t, &mut on_path, &mut path, &mut out)?;
        Ok(out)
    }

    /// The congestion model whose strategies are all simple paths.
    pub fn to_model(&self) -> Result<CongestionModel> {
        let facilities = self
            .arcs
            .iter()
            .map(|a| Facility {
                name: format!("{}->{}", self.vertices[a.tail], self.vertices[a.head]),
                cost: FacilityCost::LoadTable(a.cost.clone()),
            })
            .collect();
        let mut strategies = Vec::with_capacity(self.players());
        for (i, &(s, t)) in self.terminals.iter().enumerate() {
            let paths = self.simple_paths(s, t)?;
            if paths.is_empty() {
                return Err(Error::Infeasible(format!(
                    "player {i}: {} is unreachable from {}",
                    self.vertices[t], self.vertices[s]
                )));
            }
            strategies.push(paths);
        }
        CongestionModel::new(self.players(), facilities, strategies)
    }

    /// Profile of the given per-player paths in [`Self::to_model`] indexing.
    pub fn profile_of(&self, paths: &[Vec<usize>]) -> Result<Profile> {
        if paths.len() != self.players() {
            return Err(Error::Dimension {
                left: paths.len(),
                right: self.players(),
            });
        }
        let mut choice = Vec::with_capacity(paths.len());
        for (i, p) in paths.iter().enumerate() {
            let (s, t) = self.terminals[i];
            let all = self.simple_paths(s, t)?;
            let idx = all.iter().position(|q| q == p).ok_or_else(|| {
                Error::validation("path", format!("player {i} path {p:?} is not a simple s-t path"))
            })?;
            choice.push(idx);
        }
        Ok(Profile(choice))
    }

    pub fn arc_loads(&self, paths: &[Vec<usize>]) -> Vec<usize> {
        let mut loads = vec![0; self.arcs.len()];
        for p in paths {
            for &a in p {
                loads[a] += 1;
            }
        }
        loads
    }

    pub fn player_costs(&self, paths: &[Vec<usize>]) -> Vec<Rational> {
        let loads = self.arc_loads(paths);
        paths
            .iter()
            .map(|p| {
                p.iter()
                    .map(|&a| &self.arcs[a].cost[loads[a]])
                    .max()
                    .cloned()
                    .unwrap_or_else(Rational::zero)
            })
            .collect()
    }
}

fn extend_paths(
    g: &Digraph,
    v: usize,
    t: usize,
    on_path: &mut [bool],
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) -> Result<()> {
    if v == t {
        if out.len() == MAX_PATHS {
            return Err(Error::Budget(format!("more than {MAX_PATHS} simple paths")));
        }
        out.push(path.clone());
        return Ok(());
    }
    for &a in g.out_arcs(v) {
        let w = g.heads[a];
        if on_path[w] {
            continue;
        }
        on_path[w] = true;
        path.push(a);
        extend_paths(g, w, t, on_path, path, out)?;
        path.pop();
        on_path[w] = false;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingSolution {
    pub profile: Profile,
    pub paths: Vec<Vec<usize>>,
    pub costs: Vec<Rational>,
    pub flow: IntegralFlow,
    /// Arcs of the minimum cut used by the identical-cost algorithm.
    pub cut: Option<Vec<usize>>,
    /// Exponent and objective value of the convex-cost algorithm.
    pub exponent: Option<u32>,
    pub potential: Option<Rational>,
}

fn finish(
    inst: &RoutingInstance,
    flow: IntegralFlow,
    paths: Vec<Vec<usize>>,
    cut: Option<Vec<usize>>,
    exponent: Option<u32>,
    potential: Option<Rational>,
) -> Result<RoutingSolution> {
    let profile = inst.profile_of(&paths)?;
    let costs = inst.player_costs(&paths);
    Ok(RoutingSolution {
        profile,
        paths,
        costs,
        flow,
        cut,
        exponent,
        potential,
    })
}

fn identical_table(inst: &RoutingInstance) -> Result<&[Rational]> {
    let first = &inst.arcs.first().ok_or_else(|| Error::Infeasible("graph has no arcs".into()))?.cost;
    if inst.arcs.iter().any(|a| &a.cost != first) {
        return Err(Error::validation("identical costs", "arc cost tables differ"));
    }
    Ok(first)
}

/// Splits the players over the arc-disjoint paths of a maximum unit flow,
/// as evenly as possible.
pub fn sne_identical_costs(inst: &RoutingInstance) -> Result<RoutingSolution> {
    identical_table(inst)?;
    let (s, t) = inst.common_terminals()?;
    let g = inst.digraph();
    let mf = unit_max_flow(&g, s, t);
    if mf.value == 0 {
        return Err(Error::Infeasible(format!(
            "{} is unreachable from {}",
            inst.vertices[t], inst.vertices[s]
        )));
    }
    let mut unit = mf.flow.clone();
    cancel_cycles(&g, &mut unit);
    let disjoint: Vec<Vec<usize>> = decompose(&g, &unit, s, t).into_iter().map(|(p, _)| p).collect();
    let n = inst.players();
    let m = disjoint.len();
    let hi = n.div_ceil(m);
    let light = m * hi - n;
    let mut paths = Vec::with_capacity(n);
    for (j, p) in disjoint.iter().enumerate() {
        let take = if j < light { hi - 1 } else { hi };
        for _ in 0..take {
            paths.push(p.clone());
        }
    }
    let flow = flow_of(inst, &g, &paths, s, t);
    finish(inst, flow, paths, Some(mf.min_cut), None, None)
}

fn flow_of(inst: &RoutingInstance, g: &Digraph, paths: &[Vec<usize>], s: usize, t: usize) -> IntegralFlow {
    let arc_flow: Vec<u64> = inst.arc_loads(paths).into_iter().map(|l| l as u64).collect();
    let decomposition = decompose(g, &arc_flow, s, t);
    IntegralFlow {
        value: paths.len() as u64,
        arc_flow,
        decomposition,
    }
}

/// Confirms the identical-cost SNE structure: no arc of a minimum cut
/// carries more than `⌈n/m⌉` players and no player's bottleneck exceeds
/// `c(⌈n/m⌉)`.
pub fn verify_cut_certificate(inst: &RoutingInstance, profile: &Profile) -> Result<bool> {
    let table = identical_table(inst)?;
    let (s, t) = inst.common_terminals()?;
    let model = inst.to_model()?;
    if profile.0.len() != inst.players() {
        return Err(Error::Dimension {
            left: profile.0.len(),
            right: inst.players(),
        });
    }
    let paths: Vec<Vec<usize>> = profile
        .0
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            model.strategies()[i]
                .get(j)
                .cloned()
                .ok_or_else(|| Error::validation("profile", format!("player {i} strategy {j} out of range")))
        })
        .collect::<Result<_>>()?;
    let mf = unit_max_flow(&inst.digraph(), s, t);
    let m = mf.min_cut.len();
    let hi = inst.players().div_ceil(m);
    let loads = inst.arc_loads(&paths);
    let cut_ok = mf.min_cut.iter().all(|&a| loads[a] <= hi);
    let cost_ok = inst.player_costs(&paths).iter().all(|c| c <= &table[hi]);
    Ok(cut_ok && cost_ok)
}

/// Routing-scale bounds for `ψ` after dividing costs by `C`: the largest
/// value `max_a c_a(n)/C` and the smallest positive gap between any two
/// achievable values, zero included.
pub fn routing_scale_bounds(inst: &RoutingInstance) -> (Rational, Rational) {
    let c = scale_of(inst);
    let n = inst.players();
    let mut values: Vec<Rational> = inst
        .arcs
        .iter()
        .flat_map(|a| a.cost[1..=n].iter().map(|v| v / &c))
        .collect();
    values.push(Rational::zero());
    values.sort();
    values.dedup();
    let phi_max = values.last().cloned().unwrap_or_else(Rational::zero);
    let eps = values
        .windows(2)
        .map(|w| &w[1] - &w[0])
        .min()
        .unwrap_or_else(Rational::one);
    (phi_max, eps)
}

fn scale_of(inst: &RoutingInstance) -> Rational {
    if inst.cost_bound.is_positive() {
        inst.cost_bound.clone()
    } else {
        Rational::one()
    }
}

/// Exponent for the flow objective, from [`routing_scale_bounds`] with
/// `q = n·|A|`.
pub fn routing_exponent(inst: &RoutingInstance) -> Result<u32> {
    let (phi_max, eps) = routing_scale_bounds(inst);
    let q = inst.players() * inst.arcs.len();
    let m = rational::exponent_above_log_bound(q, &(phi_max / eps));
    if m > MAX_EXPONENT {
        return Err(Error::Budget(format!("routing exponent {m} exceeds {MAX_EXPONENT}")));
    }
    Ok(m as u32)
}

/// Tables must be convex on the loads a used arc can carry, `1..=n`.
fn check_convex(inst: &RoutingInstance) -> Result<()> {
    let n = inst.players();
    for (a, arc) in inst.arcs.iter().enumerate() {
        for k in 2..n {
            let second = &arc.cost[k + 1] - &arc.cost[k] * Rational::from_integer(2.into()) + &arc.cost[k - 1];
            if second.is_negative() {
                return Err(Error::validation(
                    "convexity",
                    format!("arc {a}: second difference at load {k} is {}", rational::format(&second)),
                ));
            }
        }
    }
    Ok(())
}

/// `g_a(k) = (c_a(k)/C)^M · k`.
fn flow_cost(arc: &RoutingArc, c: &Rational, m: u32, k: usize) -> Rational {
    rational::pow(&(&arc.cost[k] / c), m) * Rational::from_integer(k.into())
}

/// Minimises `Σ_a (c_a(x_a)/C)^M · x_a` over integral flows of value `n`
/// by successive shortest paths, then splits the flow into unit paths.
pub fn sne_convex_costs(inst: &RoutingInstance) -> Result<RoutingSolution> {
    let (s, t) = inst.common_terminals()?;
    check_convex(inst)?;
    let m = routing_exponent(inst)?;
    let c = scale_of(inst);
    let n = inst.players();
    let g = inst.digraph();
    // g_a at every load, and unit steps between consecutive loads
    let gval: Vec<Vec<Rational>> = inst
        .arcs
        .iter()
        .map(|a| (0..=n).map(|k| flow_cost(a, &c, m, k)).collect())
        .collect();
    let step = |a: usize, k: usize| &gval[a][k + 1] - &gval[a][k];
    let mut x = vec![0usize; inst.arcs.len()];
    for _ in 0..n {
        let path = shortest_augmenting_path(&g, &x, n, s, t, &step)
            .ok_or_else(|| Error::Infeasible(format!("{} is unreachable from {}", inst.vertices[t], inst.vertices[s])))?;
        for (a, forward) in path {
            if forward {
                x[a] += 1;
            } else {
                x[a] -= 1;
            }
        }
    }
    let mut arc_flow: Vec<u64> = x.iter().map(|&v| v as u64).collect();
    cancel_cycles(&g, &mut arc_flow);
    debug_assert!({
        let e = excess(&g, &arc_flow);
        e[s] == n as i64 && e[t] == -(n as i64)
    });
    let decomposition = decompose(&g, &arc_flow, s, t);
    let mut paths = Vec::with_capacity(n);
    for (p, mult) in &decomposition {
        for _ in 0..*mult {
            paths.push(p.clone());
        }
    }
    let potential: Rational = (0..inst.arcs.len()).map(|a| gval[a][arc_flow[a] as usize].clone()).sum();
    let flow = IntegralFlow {
        arc_flow,
        value: n as u64,
        decomposition,
    };
    finish(inst, flow, paths, None, Some(m), Some(potential))
}

/// Bellman–Ford over the residual graph; returns arcs with direction.
fn shortest_augmenting_path<F>(g: &Digraph, x: &[usize], cap: usize, s: usize, t: usize, step: &F) -> Option<Vec<(usize, bool)>>
where
    F: Fn(usize, usize) -> Rational,
{
    let nv = g.vertices;
    let mut dist: Vec<Option<Rational>> = vec![None; nv];
    let mut pred: Vec<Option<(usize, bool)>> = vec![None; nv];
    dist[s] = Some(Rational::zero());
    for _ in 0..nv {
        let mut changed = false;
        for a in 0..g.arc_count() {
            let (u, v) = (g.tails[a], g.heads[a]);
            if x[a] < cap {
                if let Some(du) = &dist[u] {
                    let cand = du + step(a, x[a]);
                    if dist[v].as_ref().is_none_or(|dv| cand < *dv) {
                        dist[v] = Some(cand);
                        pred[v] = Some((a, true));
                        changed = true;
                    }
                }
            }
            if x[a] > 0 {
                if let Some(dv) = &dist[v] {
                    let cand = dv - step(a, x[a] - 1);
                    if dist[u].as_ref().is_none_or(|du| cand < *du) {
                        dist[u] = Some(cand);
                        pred[u] = Some((a, false));
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist[t].as_ref()?;
    let mut path = Vec::new();
    let mut v = t;
    let mut guard = 0;
    while v != s {
        let (a, forward) = pred[v]?;
        path.push((a, forward));
        v = if forward { g.tails[a] } else { g.heads[a] };
        guard += 1;
        if guard > nv {
            return None;
        }
    }
    path.reverse();
    Some(path)
}

/// `Σ_{i,a} ψ_{i,a}^M` with costs divided by `C`; equals the flow
/// objective at the flow induced by `paths`.
pub fn scaled_psi_potential(inst: &RoutingInstance, paths: &[Vec<usize>], m: u32) -> Rational {
    let c = scale_of(inst);
    let loads = inst.arc_loads(paths);
    let values: Vec<Rational> = paths
        .iter()
        .flat_map(|p| p.iter().map(|&a| &inst.arcs[a].cost[loads[a]] / &c))
        .collect();
    power_sum(&values, m)
}
