//! Integral flows on multigraphs: unit-capacity max flow, cycle
//! cancelling and deterministic path decomposition.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// Arc list view of a digraph; parallel arcs allowed.
#[derive(Clone, Debug)]
pub struct Digraph {
    pub vertices: usize,
    pub tails: Vec<usize>,
    pub heads: Vec<usize>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(vertices: usize, arcs: &[(usize, usize)]) -> Self {
        let mut out = vec![Vec::new(); vertices];
        let mut inc = vec![Vec::new(); vertices];
        for (a, &(u, v)) in arcs.iter().enumerate() {
            out[u].push(a);
            inc[v].push(a);
        }
        Digraph {
            vertices,
            tails: arcs.iter().map(|a| a.0).collect(),
            heads: arcs.iter().map(|a| a.1).collect(),
            out,
            inc,
        }
    }

    pub fn arc_count(&self) -> usize {
        self.tails.len()
    }

    /// Outgoing arcs of `v` in index order.
    pub fn out_arcs(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn in_arcs(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegralFlow {
    pub arc_flow: Vec<u64>,
    pub value: u64,
    /// Paths as arc sequences with multiplicities, summing to `arc_flow`.
    pub decomposition: Vec<(Vec<usize>, u64)>,
}

#[derive(Clone, Debug)]
pub struct MaxFlow {
    pub flow: Vec<u64>,
    pub value: u64,
    /// Arcs leaving the set of vertices reachable from the source in the
    /// final residual graph.
    pub min_cut: Vec<usize>,
}

/// Edmonds–Karp with capacity one on every arc.
pub fn unit_max_flow(g: &Digraph, s: usize, t: usize) -> MaxFlow {
    let mut flow = vec![0u64; g.arc_count()];
    let mut value = 0;
    loop {
        // BFS over residual arcs: forward when empty, backward when full
        let mut pred: Vec<Option<(usize, bool)>> = vec![None; g.vertices];
        let mut seen = vec![false; g.vertices];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in g.out_arcs(u) {
                let v = g.heads[a];
                if flow[a] == 0 && !seen[v] {
                    seen[v] = true;
                    pred[v] = Some((a, true));
                    queue.push_back(v);
                }
            }
            for &a in g.in_arcs(u) {
                let v = g.tails[a];
                if flow[a] == 1 && !seen[v] {
                    seen[v] = true;
                    pred[v] = Some((a, false));
                    queue.push_back(v);
                }
            }
        }
        if !seen[t] || s == t {
            let min_cut = (0..g.arc_count())
                .filter(|&a| seen[g.tails[a]] && !seen[g.heads[a]])
                .collect();
            return MaxFlow { flow, value, min_cut };
        }
        let mut v = t;
        while v != s {
            let (a, forward) = pred[v].expect("reached vertices have predecessors");
            if forward {
                flow[a] = 1;
                v = g.tails[a];
            } else {
                flow[a] = 0;
                v = g.heads[a];
            }
        }
        value += 1;
    }
}

/// Removes directed cycles from the support of `flow`.
pub fn cancel_cycles(g: &Digraph, flow: &mut [u64]) {
    while let Some(cycle) = find_flow_cycle(g, flow) {
        let m = cycle.iter().map(|&a| flow[a]).min().expect("cycles are non-empty");
        for &a in &cycle {
            flow[a] -= m;
        }
    }
}

fn find_flow_cycle(g: &Digraph, flow: &[u64]) -> Option<Vec<usize>> {
    let mut color = vec![0u8; g.vertices];
    for root in 0..g.vertices {
        if color[root] != 0 {
            continue;
        }
        // stack of (vertex, next out-arc position, arc used to enter)
        let mut stack: Vec<(usize, usize, Option<usize>)> = vec![(root, 0, None)];
        color[root] = 1;
        while let Some(top) = stack.last_mut() {
            let (u, pos) = (top.0, top.1);
            if let Some(&a) = g.out_arcs(u).get(pos) {
                top.1 += 1;
                if flow[a] == 0 {
                    continue;
                }
                let v = g.heads[a];
                match color[v] {
                    0 => {
                        color[v] = 1;
                        stack.push((v, 0, Some(a)));
                    }
                    1 => {
                        let start = stack.iter().position(|e| e.0 == v).expect("grey vertex on stack");
                        let mut cycle: Vec<usize> = stack[start + 1..].iter().map(|e| e.2.expect("entered by arc")).collect();
                        cycle.push(a);
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                color[u] = 2;
                stack.pop();
            }
        }
    }
    None
}

/// Decomposes an acyclic `s`–`t` flow into paths, always following the
/// smallest-indexed outgoing arc that still carries flow. This yields the
/// lexicographically smallest arc sequence first.
pub fn decompose(g: &Digraph, flow: &[u64], s: usize, t: usize) -> Vec<(Vec<usize>, u64)> {
    let mut rest = flow.to_vec();
    let mut out = Vec::new();
    while let Some(&first) = g.out_arcs(s).iter().find(|&&a| rest[a] > 0) {
        let mut path = vec![first];
        let mut v = g.heads[first];
        while v != t {
            let a = *g
                .out_arcs(v)
                .iter()
                .find(|&&a| rest[a] > 0)
                .expect("conservation holds at inner vertices");
            path.push(a);
            v = g.heads[a];
        }
        let m = path.iter().map(|&a| rest[a]).min().expect("path is non-empty");
        for &a in &path {
            rest[a] -= m;
        }
        out.push((path, m));
    }
    out
}

/// Net outflow minus inflow at each vertex.
pub fn excess(g: &Digraph, flow: &[u64]) -> Vec<i64> {
    let mut e = vec![0i64; g.vertices];
    for a in 0..g.arc_count() {
        e[g.tails[a]] += flow[a] as i64;
        e[g.heads[a]] -= flow[a] as i64;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_parallel_arcs() {
        let g = Digraph::new(2, &[(0, 1), (0, 1)]);
        let mf = unit_max_flow(&g, 0, 1);
        assert_eq!(mf.value, 2);
        assert_eq!(mf.min_cut, vec![0, 1]);
        assert_eq!(decompose(&g, &mf.flow, 0, 1), vec![(vec![0], 1), (vec![1], 1)]);
    }

    #[test]
    fn reroutes_through_backward_arcs() {
        // s=0, a=1, b=2, t=3 with a diagonal that BFS takes first
        let g = Digraph::new(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
        let mf = unit_max_flow(&g, 0, 3);
        assert_eq!(mf.value, 2);
        assert_eq!(mf.min_cut.len(), 2);
        let e = excess(&g, &mf.flow);
        assert_eq!(e, vec![2, 0, 0, -2]);
    }

    #[test]
    fn cycles_are_cancelled() {
        let g = Digraph::new(3, &[(0, 2), (0, 1), (1, 0)]);
        let mut flow = vec![1, 1, 1];
        cancel_cycles(&g, &mut flow);
        assert_eq!(flow, vec![1, 0, 0]);
        assert_eq!(decompose(&g, &flow, 0, 2), vec![(vec![0], 1)]);
    }

    #[test]
    fn unreachable_sink() {
        let g = Digraph::new(3, &[(0, 1)]);
        let mf = unit_max_flow(&g, 0, 2);
        assert_eq!(mf.value, 0);
        assert!(mf.min_cut.is_empty());
    }
}
