//! Random instances for property tests and benchmarks.
//!
//! All costs are small non-negative integers so that every quantity derived
//! from them stays exact and the power bounds stay at least one.

use std::sync::Arc;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::congestion::{build_game, BottleneckGame, CongestionModel, Facility, FacilityCost, WeightedEdge};
use crate::game::FiniteGame;
use crate::rational::{self, Rational};
use crate::routing::{RoutingArc, RoutingInstance};
use crate::splittable::{PwlCost, SplitFacility, SplittableInstance};

#[derive(Clone, Copy, Debug)]
pub struct CongestionShape {
    pub max_players: usize,
    pub max_facilities: usize,
    pub max_strategies: usize,
    pub max_cost: i64,
}

impl Default for CongestionShape {
    fn default() -> Self {
        CongestionShape {
            max_players: 4,
            max_facilities: 6,
            max_strategies: 5,
            max_cost: 9,
        }
    }
}

fn nondecreasing<R: Rng>(len: usize, max: i64, rng: &mut R) -> Vec<Rational> {
    let mut v: Vec<i64> = (0..len).map(|_| rng.gen_range(0..=max)).collect();
    v.sort_unstable();
    v.into_iter().map(rational::int).collect()
}

/// Inclusion-monotone table indexed by user bitmask.
fn monotone_set_table<R: Rng>(players: usize, max: i64, rng: &mut R) -> Vec<Rational> {
    let size = 1usize << players;
    let mut t: Vec<i64> = vec![0; size];
    for mask in 1..size {
        let below = (0..players)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| t[mask & !(1 << i)])
            .max()
            .unwrap_or(0);
        t[mask] = below.max(rng.gen_range(0..=max));
    }
    t.into_iter().map(rational::int).collect()
}

fn random_cost<R: Rng>(players: usize, max: i64, rng: &mut R) -> FacilityCost {
    match rng.gen_range(0..3) {
        0 => FacilityCost::LoadTable(nondecreasing(players + 1, max, rng)),
        1 => FacilityCost::SetTable(monotone_set_table(players, max, rng)),
        _ => {
            let mut edges = Vec::new();
            for a in 0..players {
                for b in a + 1..players {
                    if rng.gen_bool(0.5) {
                        edges.push(WeightedEdge {
                            a,
                            b,
                            weight: rational::int(rng.gen_range(0..=max)),
                        });
                    }
                }
            }
            FacilityCost::Interference(Arc::new(edges))
        }
    }
}

fn random_strategies<R: Rng>(facilities: usize, max_strategies: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let count = rng.gen_range(1..=max_strategies);
    let mut list: Vec<Vec<usize>> = Vec::new();
    for _ in 0..count {
        let size = rng.gen_range(1..=facilities.min(3));
        let mut ids: Vec<usize> = (0..facilities).collect();
        ids.shuffle(rng);
        let mut s = ids[..size].to_vec();
        s.sort_unstable();
        if !list.contains(&s) {
            list.push(s);
        }
    }
    list
}

/// A congestion model mixing load tables, set tables and interference costs.
pub fn congestion_model<R: Rng>(shape: CongestionShape, rng: &mut R) -> CongestionModel {
    let n = rng.gen_range(shape.max_players.min(2)..=shape.max_players);
    let m = rng.gen_range(1..=shape.max_facilities);
    let facilities = (0..m)
        .map(|j| Facility {
            name: format!("f{j}"),
            cost: random_cost(n, shape.max_cost, rng),
        })
        .collect();
    let strategies = (0..n).map(|_| random_strategies(m, shape.max_strategies, rng)).collect();
    CongestionModel::new(n, facilities, strategies).expect("generated model satisfies the axioms")
}

pub fn bottleneck_game<R: Rng>(shape: CongestionShape, rng: &mut R) -> BottleneckGame {
    build_game(congestion_model(shape, rng))
}

/// A tabulated normal-form game with up to 3 players and 4 strategies each.
pub fn normal_form<R: Rng>(max_cost: i64, rng: &mut R) -> FiniteGame {
    let n = rng.gen_range(1..=3);
    let counts: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
    let rows = counts.iter().product::<usize>();
    let table = (0..rows)
        .map(|_| (0..n).map(|_| rational::int(rng.gen_range(0..=max_cost))).collect())
        .collect();
    FiniteGame::from_table(counts, table).expect("generated table is well formed")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoutingCosts {
    /// One shared nondecreasing table on every arc.
    Identical,
    /// Independent tables, each convex on loads 1..=n.
    Convex,
}

fn convex_table<R: Rng>(n: usize, max_step: i64, rng: &mut R) -> Vec<Rational> {
    let mut steps: Vec<i64> = (0..n.saturating_sub(1)).map(|_| rng.gen_range(0..=max_step)).collect();
    steps.sort_unstable();
    let base = rng.gen_range(0..=max_step);
    let mut t = vec![rng.gen_range(0..=base), base];
    for s in steps {
        let last = *t.last().expect("table is non-empty");
        t.push(last + s);
    }
    t.into_iter().map(rational::int).collect()
}

/// Single-commodity DAG with vertex 0 as source and the last vertex as sink.
/// Arcs only go forward, so every path is simple; instances whose strategy
/// space would exceed `max_profiles` are redrawn.
pub fn routing_dag<R: Rng>(costs: RoutingCosts, max_profiles: usize, rng: &mut R) -> RoutingInstance {
    loop {
        let n = rng.gen_range(1..=4);
        let nv = rng.gen_range(2..=5);
        let arc_count = rng.gen_range(1..=12);
        let mut ends: Vec<(usize, usize)> = (0..nv - 1).map(|v| (v, v + 1)).collect();
        while ends.len() < arc_count {
            let a = rng.gen_range(0..nv - 1);
            let b = rng.gen_range(a + 1..nv);
            ends.push((a, b));
        }
        ends.shuffle(rng);
        let shared = nondecreasing(n + 1, 9, rng);
        let arcs: Vec<RoutingArc> = ends
            .into_iter()
            .map(|(tail, head)| RoutingArc {
                tail,
                head,
                cost: match costs {
                    RoutingCosts::Identical => shared.clone(),
                    RoutingCosts::Convex => convex_table(n, 4, rng),
                },
            })
            .collect();
        let vertices = (0..nv).map(|v| format!("v{v}")).collect();
        let inst = RoutingInstance::new(vertices, arcs, vec![(0, nv - 1); n], None)
            .expect("generated routing instance is valid");
        let paths = inst.simple_paths(0, nv - 1).map(|p| p.len()).unwrap_or(usize::MAX);
        if (paths as f64).powi(n as i32) <= max_profiles as f64 {
            return inst;
        }
    }
}

fn random_pwl<R: Rng>(top: i64, convex: bool, rng: &mut R) -> PwlCost {
    let pieces = rng.gen_range(1..=3);
    let mut xs: Vec<i64> = (1..top.max(2)).collect();
    xs.shuffle(rng);
    let mut xs: Vec<i64> = xs.into_iter().take(pieces - 1).collect();
    xs.push(top.max(1));
    xs.sort_unstable();
    xs.dedup();
    let mut slopes: Vec<i64> = (0..xs.len()).map(|_| rng.gen_range(if convex { 1 } else { 0 }..=4)).collect();
    if convex {
        slopes.sort_unstable();
    }
    let y0 = rng.gen_range(0..=3);
    let mut points = vec![(Rational::zero(), rational::int(y0))];
    let (mut x, mut y) = (0i64, y0);
    for (nx, s) in xs.into_iter().zip(slopes) {
        y += s * (nx - x);
        x = nx;
        points.push((rational::int(x), rational::int(y)));
    }
    PwlCost::new(points).expect("generated breakpoints are monotone")
}


/// Splittable instance with arbitrary strategies and monotone costs.
pub fn splittable<R: Rng>(rng: &mut R) -> SplittableInstance {
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=4);
    let demands: Vec<Rational> = (0..n).map(|_| rational::int(rng.gen_range(1..=3))).collect();
    let total: i64 = demands.iter().map(|d| d.to_integer().try_into().unwrap_or(3)).sum();
    let facilities = (0..m)
        .map(|j| SplitFacility {
            name: format!("r{j}"),
            cost: random_pwl(total, false, rng),
        })
        .collect();
    let strategies = (0..n).map(|_| random_strategies(m, 3, rng)).collect();
    SplittableInstance::new(facilities, strategies, demands, None).expect("generated instance is valid")
}

/// Parallel links with convex strictly increasing costs.
pub fn convex_parallel_links<R: Rng>(rng: &mut R) -> SplittableInstance {
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=3);
    let demands: Vec<Rational> = (0..n).map(|_| rational::int(rng.gen_range(1..=2))).collect();
    let total: i64 = demands.iter().map(|d| d.to_integer().try_into().unwrap_or(2)).sum();
    let costs = (0..m).map(|_| random_pwl(total, true, rng)).collect();
    SplittableInstance::parallel_links(costs, demands).expect("generated instance is valid")
}
