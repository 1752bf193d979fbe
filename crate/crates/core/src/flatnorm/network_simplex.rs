//! Primal network simplex for uncapacitated min-cost flow.
//!
//! The spanning tree is kept strongly feasible (every zero-flow tree arc
//! points away from the root), which rules out cycling on degenerate
//! pivots. Leaving-arc ties follow the usual first/second-side rule.

use crate::error::{Error, Result};

pub(crate) struct Network {
    n: usize,
    src: Vec<usize>,
    tgt: Vec<usize>,
    cost: Vec<f64>,
    /// Net outflow required at each node; sums to zero.
    supply: Vec<f64>,
}

pub(crate) struct FlowSolution {
    pub flow: Vec<f64>,
    /// Node potentials with `cost + pi[src] - pi[tgt] >= 0` on every arc.
    pub pi: Vec<f64>,
    pub cost: f64,
    pub pivots: usize,
}

const NONE: usize = usize::MAX;

impl Network {
    pub fn new(supply: Vec<f64>) -> Self {
        Network {
            n: supply.len(),
            src: Vec::new(),
            tgt: Vec::new(),
            cost: Vec::new(),
            supply,
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cost: f64) -> usize {
        debug_assert!(from < self.n && to < self.n && cost >= 0.0);
        self.src.push(from);
        self.tgt.push(to);
        self.cost.push(cost);
        self.src.len() - 1
    }

    #[cfg(test)]
    pub fn arc_count(&self) -> usize {
        self.src.len()
    }

    /// Solves from the star tree `star[u]` (an arc between `u` and `root`).
    ///
    /// Nodes with positive supply must use an arc into the root, the others
    /// an arc out of it.
    pub fn solve(&self, root: usize, star: &[usize]) -> Result<FlowSolution> {
        let n = self.n;
        let m = self.src.len();
        let mut flow = vec![0.0; m];
        let mut parent = vec![NONE; n];
        let mut pred = vec![NONE; n];
        let mut up = vec![false; n];
        for u in (0..n).filter(|&u| u != root) {
            let e = star[u];
            let (s, t) = (self.src[e], self.tgt[e]);
            if s == u && t == root && self.supply[u] > 0.0 {
                up[u] = true;
                flow[e] = self.supply[u];
            } else if s == root && t == u && self.supply[u] <= 0.0 {
                flow[e] = -self.supply[u];
            } else {
                return Err(Error::Solver(format!(
                    "initial tree arc {e} does not match the supply at node {u}"
                )));
            }
            parent[u] = root;
            pred[u] = e;
        }

        let mut depth = vec![0usize; n];
        let mut pi = vec![0.0; n];
        let mut order = Vec::with_capacity(n);
        let mut child_start = vec![0usize; n + 1];
        let mut children = vec![0usize; n];
        let mut refresh = |parent: &[usize],
                           pred: &[usize],
                           up: &[bool],
                           depth: &mut [usize],
                           pi: &mut [f64]| {
            child_start.iter_mut().for_each(|c| *c = 0);
            for u in 0..n {
                if parent[u] != NONE {
                    child_start[parent[u] + 1] += 1;
                }
            }
            for i in 0..n {
                child_start[i + 1] += child_start[i];
            }
            let mut fill = child_start.clone();
            for u in 0..n {
                if parent[u] != NONE {
                    children[fill[parent[u]]] = u;
                    fill[parent[u]] += 1;
                }
            }
            order.clear();
            order.push(root);
            depth[root] = 0;
            pi[root] = 0.0;
            let mut head = 0;
            while head < order.len() {
                let p = order[head];
                head += 1;
                for &c in &children[child_start[p]..child_start[p + 1]] {
                    let e = pred[c];
                    depth[c] = depth[p] + 1;
                    // tree arcs have zero reduced cost
                    pi[c] = if up[c] {
                        pi[p] - self.cost[e]
                    } else {
                        pi[p] + self.cost[e]
                    };
                    order.push(c);
                }
            }
            order.len() == n
        };
        if !refresh(&parent, &pred, &up, &mut depth, &mut pi) {
            return Err(Error::Solver("initial tree does not span the network".into()));
        }

        let max_cost = self.cost.iter().cloned().fold(0.0, f64::max);
        let eps = 1e-12 * max_cost.max(1.0);
        let block = ((m as f64).sqrt().ceil() as usize).max(10).min(m.max(1));
        let mut next_arc = 0usize;
        let mut pivots = 0usize;
        let max_pivots = 50 * (n + m) + 1000;

        loop {
            // block pricing
            let mut entering = NONE;
            let mut best = -eps;
            let mut scanned = 0;
            while scanned < m {
                let end = (scanned + block).min(m);
                for _ in scanned..end {
                    let e = next_arc;
                    next_arc = if next_arc + 1 == m { 0 } else { next_arc + 1 };
                    let rc = self.cost[e] + pi[self.src[e]] - pi[self.tgt[e]];
                    if rc < best {
                        best = rc;
                        entering = e;
                    }
                }
                scanned = end;
                if entering != NONE {
                    break;
                }
            }
            if entering == NONE {
                break;
            }
            pivots += 1;
            if pivots > max_pivots {
                return Err(Error::Solver(format!("no convergence after {pivots} pivots")));
            }

            let first = self.src[entering];
            let second = self.tgt[entering];
            let join = {
                let (mut a, mut b) = (first, second);
                while a != b {
                    if depth[a] >= depth[b] {
                        a = parent[a];
                    } else {
                        b = parent[b];
                    }
                }
                a
            };

            // leaving arc: only arcs whose flow decreases can block
            let mut delta = f64::INFINITY;
            let mut u_out = NONE;
            let mut out_side = 0;
            let mut u = first;
            while u != join {
                if up[u] && flow[pred[u]] < delta {
                    delta = flow[pred[u]];
                    u_out = u;
                    out_side = 1;
                }
                u = parent[u];
            }
            let mut u = second;
            while u != join {
                if !up[u] && flow[pred[u]] <= delta {
                    delta = flow[pred[u]];
                    u_out = u;
                    out_side = 2;
                }
                u = parent[u];
            }
            if u_out == NONE {
                return Err(Error::Solver("unbounded flow problem".into()));
            }

            if delta > 0.0 {
                flow[entering] += delta;
                let mut u = first;
                while u != join {
                    flow[pred[u]] += if up[u] { -delta } else { delta };
                    u = parent[u];
                }
                let mut u = second;
                while u != join {
                    flow[pred[u]] += if up[u] { delta } else { -delta };
                    u = parent[u];
                }
            }

            // re-hang the path from the entering endpoint up to u_out
            let (u_in, v_in) = if out_side == 1 {
                (first, second)
            } else {
                (second, first)
            };
            let mut prev_node = v_in;
            let mut prev_arc = entering;
            let mut prev_up = self.src[entering] == u_in;
            let mut x = u_in;
            loop {
                let next = parent[x];
                let (old_arc, old_up) = (pred[x], up[x]);
                parent[x] = prev_node;
                pred[x] = prev_arc;
                up[x] = prev_up;
                if x == u_out {
                    break;
                }
                prev_node = x;
                prev_arc = old_arc;
                prev_up = !old_up;
                x = next;
            }
            refresh(&parent, &pred, &up, &mut depth, &mut pi);
        }

        let cost = flow.iter().zip(&self.cost).map(|(f, c)| f * c).sum();
        Ok(FlowSolution {
            flow,
            pi,
            cost,
            pivots,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sources_two_sinks() {
        // nodes 0,1 supply 1 each; 2,3 demand 1 each; root 4 with λ = 10
        let mut net = Network::new(vec![1.0, 1.0, -1.0, -1.0, 0.0]);
        let c = [[1.0, 3.0], [2.0, 1.5]];
        for i in 0..2 {
            for j in 0..2 {
                net.add_arc(i, 2 + j, c[i][j]);
            }
        }
        let star: Vec<usize> = vec![
            net.add_arc(0, 4, 10.0),
            net.add_arc(1, 4, 10.0),
            net.add_arc(4, 2, 10.0),
            net.add_arc(4, 3, 10.0),
            NONE,
        ];
        let sol = net.solve(4, &star).unwrap();
        assert!((sol.cost - 2.5).abs() < 1e-12);
        for e in 0..net.arc_count() {
            let rc = net.cost[e] + sol.pi[net.src[e]] - sol.pi[net.tgt[e]];
            assert!(rc > -1e-12);
        }
    }

    #[test]
    fn bad_star_is_rejected() {
        let mut net = Network::new(vec![1.0, -1.0, 0.0]);
        let a = net.add_arc(2, 0, 1.0);
        let b = net.add_arc(2, 1, 1.0);
        assert!(net.solve(2, &[a, b, NONE]).is_err());
    }
}
