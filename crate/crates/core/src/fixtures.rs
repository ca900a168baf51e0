//! Small hand-built instances with known equilibria.

use num_traits::Zero;

use crate::congestion::{singleton_load_model, CongestionModel};
use crate::game::FiniteGame;
use crate::rational::{int, Rational};
use crate::routing::{RoutingArc, RoutingInstance};
use crate::splittable::{PwlCost, SplitFacility, SplittableInstance};

/// Players 0 and 1 choose from `{0, 1}`, the others are fixed. The unique
/// SNE is all-zero with every player at `k − ε`, while `(1, 0, …)` gives
/// costs `(k, 0, …, 0)`.
pub fn example_root(n: usize, k: Rational, eps: Rational) -> FiniteGame {
    assert!(n >= 2, "needs two deciding players");
    let km = &k - &eps;
    let rows = vec![
        vec![km; n],
        vec![k.clone(); n],
        {
            let mut r = vec![Rational::zero(); n];
            r[0] = k.clone();
            r
        },
        {
            let mut r = vec![k.clone(); n];
            r[1] = eps.clone();
            r
        },
    ];
    let mut counts = vec![2, 2];
    counts.extend(std::iter::repeat_n(1, n - 2));
    FiniteGame::from_table(counts, rows).expect("static table")
}

/// Two players; both `(0,0)` and `(1,1)` are SNE but `(1,1)` costs `k`.
pub fn poa_unbounded(k: Rational) -> FiniteGame {
    let z = Rational::zero;
    FiniteGame::from_table(
        vec![2, 2],
        vec![
            vec![z(), z()],
            vec![z(), k.clone()],
            vec![k.clone(), k.clone()],
            vec![z(), k],
        ],
    )
    .expect("static table")
}

fn table(values: &[i64]) -> Vec<Rational> {
    values.iter().map(|&v| int(v)).collect()
}

/// Vertices `s, a, b, t`; arcs `s→a, a→t` cost 1 only at full load `n`,
/// arcs `s→b, b→t` cost 1 up to load 1 and 2 above, and `b→a` is free.
pub fn routing_multi_sne(n: usize) -> RoutingInstance {
    let c1: Vec<Rational> = (0..=n).map(|l| int(i64::from(l >= n))).collect();
    let c2: Vec<Rational> = (0..=n).map(|l| int(if l <= 1 { 1 } else { 2 })).collect();
    let zero = vec![Rational::zero(); n + 1];
    RoutingInstance::new(
        ["s", "a", "b", "t"].map(String::from).to_vec(),
        vec![
            RoutingArc { tail: 0, head: 1, cost: c1.clone() },
            RoutingArc { tail: 1, head: 3, cost: c1 },
            RoutingArc { tail: 0, head: 2, cost: c2.clone() },
            RoutingArc { tail: 2, head: 3, cost: c2 },
            RoutingArc { tail: 2, head: 1, cost: zero },
        ],
        vec![(0, 3); n],
        None,
    )
    .expect("static instance")
}

/// Two players from `s` to `t`; outer arcs cost 0 alone and 1 shared,
/// the two middle arcs `a→b`, `b→a` always cost 1.
pub fn routing_pne_not_sne() -> RoutingInstance {
    let outer = table(&[0, 0, 1]);
    let middle = table(&[1, 1, 1]);
    RoutingInstance::new(
        ["s", "a", "b", "t"].map(String::from).to_vec(),
        vec![
            RoutingArc { tail: 0, head: 1, cost: outer.clone() },
            RoutingArc { tail: 1, head: 3, cost: outer.clone() },
            RoutingArc { tail: 0, head: 2, cost: outer.clone() },
            RoutingArc { tail: 2, head: 3, cost: outer },
            RoutingArc { tail: 1, head: 2, cost: middle.clone() },
            RoutingArc { tail: 2, head: 1, cost: middle },
        ],
        vec![(0, 3); 2],
        None,
    )
    .expect("static instance")
}

/// `s→a→b→t` and `s→b→a→t` in [`routing_pne_not_sne`] arc indices.
pub fn zigzag_paths() -> Vec<Vec<usize>> {
    vec![vec![0, 4, 3], vec![2, 5, 1]]
}

/// Two players choosing `f` (constant 10) or `g` (cost equals load).
pub fn upsilon_counter() -> CongestionModel {
    singleton_load_model(2, vec![table(&[10, 10, 10]), table(&[0, 1, 2])]).expect("static model")
}

/// One player with demand 1 on `r1` (cost equals load) or `r2` (cost 2).
pub fn splittable_discontinuity() -> SplittableInstance {
    SplittableInstance::new(
        vec![
            SplitFacility { name: "r1".into(), cost: PwlCost::affine(int(1), int(0), int(1)).expect("valid") },
            SplitFacility { name: "r2".into(), cost: PwlCost::constant(int(2)).expect("valid") },
        ],
        vec![vec![vec![0], vec![1]]],
        vec![int(1)],
        None,
    )
    .expect("static instance")
}

/// Splittable version of [`upsilon_counter`] with unit demands.
pub fn splittable_upsilon_counter() -> SplittableInstance {
    SplittableInstance::new(
        vec![
            SplitFacility { name: "f".into(), cost: PwlCost::constant(int(10)).expect("valid") },
            SplitFacility { name: "g".into(), cost: PwlCost::affine(int(1), int(0), int(2)).expect("valid") },
        ],
        vec![vec![vec![0], vec![1]]; 2],
        vec![int(1), int(1)],
        None,
    )
    .expect("static instance")
}
