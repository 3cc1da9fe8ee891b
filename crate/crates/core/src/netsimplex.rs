//! Primal network simplex on the complete bipartite transport network.
//!
//! Nodes `0..n` are supplies, `n..n+m` demands and `n+m` is an artificial
//! root. Arc `i*m + j` carries flow from supply `i` to demand `j` at cost
//! `C[i][j]`; every non-root node also has a big-M artificial arc to or from
//! the root, and the initial basis is the star of those artificial arcs.
//! All arcs are uncapacitated, so a non-tree arc always carries zero flow and
//! only tree arcs store a flow value.
//!
//! Reduced costs use `cost(u -> v) + pi[u] - pi[v]`. Tree arcs have reduced
//! cost zero; at termination every arc has nonnegative reduced cost.
//!
//! Entering arcs are chosen by block search. The leaving arc is the last
//! blocking arc met when walking the pivot cycle in its orientation from the
//! join node, which keeps the tree strongly feasible and rules out cycling
//! on degenerate pivots.

use std::time::Instant;

use crate::model::{
    validate_instance, Certificate, Deadline, Flow, OTInstance, SolveResult, SolveStatus, Violation,
};

const NONE: usize = usize::MAX;

/// Spanning-tree basis over the `n + m + 1` nodes.
///
/// Every non-root node `v` owns the tree arc `pred[v]` joining it to
/// `parent[v]`; `pred_up[v]` is true when that arc points from `v` to its
/// parent. `flow[v]` is the flow on `pred[v]`.
#[derive(Debug, Clone)]
pub struct TreeState {
    pub parent: Vec<usize>,
    pub pred: Vec<usize>,
    pub pred_up: Vec<bool>,
    pub depth: Vec<usize>,
    pub potential: Vec<i64>,
    pub flow: Vec<i64>,
    first_child: Vec<usize>,
    next_sibling: Vec<usize>,
    prev_sibling: Vec<usize>,
}

impl TreeState {
    fn unlink(&mut self, v: usize) {
        let p = self.parent[v];
        let (prev, next) = (self.prev_sibling[v], self.next_sibling[v]);
        if prev == NONE {
            self.first_child[p] = next;
        } else {
            self.next_sibling[prev] = next;
        }
        if next != NONE {
            self.prev_sibling[next] = prev;
        }
        self.prev_sibling[v] = NONE;
        self.next_sibling[v] = NONE;
    }

    fn link(&mut self, v: usize, p: usize) {
        self.parent[v] = p;
        let head = self.first_child[p];
        self.next_sibling[v] = head;
        self.prev_sibling[v] = NONE;
        if head != NONE {
            self.prev_sibling[head] = v;
        }
        self.first_child[p] = v;
    }

    pub fn children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(
            (self.first_child[v] != NONE).then_some(self.first_child[v]),
            move |&c| (self.next_sibling[c] != NONE).then_some(self.next_sibling[c]),
        )
    }
}

/// `min_k (row[k] - dem[k])`, or `i64::MAX` on empty input.
fn segment_min(row: &[i64], dem: &[i64]) -> i64 {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") {
        // SAFETY: the CPU supports AVX2, checked just above.
        return unsafe { segment_min_avx2(row, dem) };
    }
    segment_min_lanes(row, dem)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn segment_min_avx2(row: &[i64], dem: &[i64]) -> i64 {
    segment_min_lanes(row, dem)
}

#[inline(always)]
fn segment_min_lanes(row: &[i64], dem: &[i64]) -> i64 {
    let mut lanes = [i64::MAX; 8];
    let (rc, dc) = (row.chunks_exact(8), dem.chunks_exact(8));
    let (rt, dt) = (rc.remainder(), dc.remainder());
    for (xs, ys) in rc.zip(dc) {
        for l in 0..8 {
            let v = xs[l] - ys[l];
            lanes[l] = if v < lanes[l] { v } else { lanes[l] };
        }
    }
    let mut low = lanes.into_iter().fold(i64::MAX, i64::min);
    for (&x, &y) in rt.iter().zip(dt) {
        low = low.min(x - y);
    }
    low
}

pub struct NetworkSimplex<'a> {
    inst: &'a OTInstance,
    n: usize,
    m: usize,
    root: usize,
    art_cost: i64,
    tree: TreeState,
    block_size: usize,
    next_arc: usize,
    pivots: u64,
    stack: Vec<usize>,
    path: Vec<usize>,
}

impl<'a> NetworkSimplex<'a> {
    /// Builds the artificial starting basis. The instance must be valid.
    pub fn new(inst: &'a OTInstance) -> Result<Self, Violation> {
        validate_instance(inst)?;
        let (n, m) = (inst.n(), inst.m());
        let nodes = n + m + 1;
        let root = n + m;
        let art_cost = 1 + inst.max_cost() * (n + m) as i64;
        let arcs = n * m;
        let mut tree = TreeState {
            parent: vec![NONE; nodes],
            pred: vec![NONE; nodes],
            pred_up: vec![false; nodes],
            depth: vec![0; nodes],
            potential: vec![0; nodes],
            flow: vec![0; nodes],
            first_child: vec![NONE; nodes],
            next_sibling: vec![NONE; nodes],
            prev_sibling: vec![NONE; nodes],
        };
        for v in (0..n + m).rev() {
            tree.link(v, root);
            tree.pred[v] = arcs + v;
            tree.depth[v] = 1;
            if v < n {
                tree.pred_up[v] = true;
                tree.flow[v] = inst.supplies()[v];
                tree.potential[v] = -art_cost;
            } else {
                tree.pred_up[v] = false;
                tree.flow[v] = inst.demands()[v - n];
                tree.potential[v] = art_cost;
            }
        }
        let block_size = ((arcs as f64).sqrt().ceil() as usize)
            .max(10)
            .min(arcs.max(1));
        Ok(Self {
            inst,
            n,
            m,
            root,
            art_cost,
            tree,
            block_size,
            next_arc: 0,
            pivots: 0,
            stack: Vec::new(),
            path: Vec::new(),
        })
    }

    pub fn tree(&self) -> &TreeState {
        &self.tree
    }

    pub fn pivots(&self) -> u64 {
        self.pivots
    }

    pub fn artificial_cost(&self) -> i64 {
        self.art_cost
    }

    fn arc_ends(&self, arc: usize) -> (usize, usize) {
        let arcs = self.n * self.m;
        if arc < arcs {
            (arc / self.m, self.n + arc % self.m)
        } else {
            let v = arc - arcs;
            if v < self.n {
                (v, self.root)
            } else {
                (self.root, v)
            }
        }
    }

    fn arc_cost(&self, arc: usize) -> i64 {
        let arcs = self.n * self.m;
        if arc < arcs {
            self.inst.costs()[arc]
        } else {
            self.art_cost
        }
    }

    /// Reduced cost of the real arc `i -> j`.
    #[inline]
    pub fn reduced_cost(&self, i: usize, j: usize) -> i64 {
        self.inst.cost(i, j) + self.tree.potential[i] - self.tree.potential[self.n + j]
    }

    /// Cost of the current basic solution including artificial arcs.
    pub fn total_cost(&self) -> i128 {
        (0..self.root)
            .map(|v| self.arc_cost(self.tree.pred[v]) as i128 * self.tree.flow[v] as i128)
            .sum()
    }

    /// Block search over the real arcs; returns the arc with the most
    /// negative reduced cost in the first block that contains one.
    ///
    /// The scan walks row segments as slices so the inner minimum vectorizes.
    /// Ties go to the earliest arc in scan order.
    fn find_entering(&mut self) -> Option<usize> {
        let arcs = self.n * self.m;
        let costs = self.inst.costs();
        let pi = &self.tree.potential;
        let (n, m) = (self.n, self.m);
        let pi_dem = &pi[n..n + m];
        let mut best = 0i64;
        let mut best_arc = NONE;
        let mut count = self.block_size;
        let mut e = self.next_arc;
        let mut left = arcs;
        while left > 0 {
            let (i, j) = (e / m, e % m);
            let len = (m - j).min(count).min(left);
            let row = &costs[e..e + len];
            let dem = &pi_dem[j..j + len];
            let low = segment_min(row, dem);
            if low + pi[i] < best {
                best = low + pi[i];
                let k = row
                    .iter()
                    .zip(dem)
                    .position(|(&c, &p)| c - p == low)
                    .expect("minimum is attained");
                best_arc = e + k;
            }
            e += len;
            if e == arcs {
                e = 0;
            }
            left -= len;
            count -= len;
            if count == 0 {
                if best < 0 {
                    break;
                }
                count = self.block_size;
            }
        }
        if best < 0 {
            self.next_arc = e;
            Some(best_arc)
        } else {
            None
        }
    }

    fn join(&self, mut a: usize, mut b: usize) -> usize {
        let t = &self.tree;
        while a != b {
            if t.depth[a] >= t.depth[b] {
                a = t.parent[a];
            } else {
                b = t.parent[b];
            }
        }
        a
    }

    /// Performs one pivot. Returns false once no arc has negative reduced
    /// cost, i.e. the basis is optimal.
    pub fn pivot(&mut self) -> bool {
        let Some(entering) = self.find_entering() else {
            return false;
        };
        let (first, second) = self.arc_ends(entering);
        let entering_rc =
            self.arc_cost(entering) + self.tree.potential[first] - self.tree.potential[second];
        let join = self.join(first, second);

        // leaving arc: last blocking arc of the cycle oriented by `entering`
        let mut delta = i64::MAX;
        let mut u_out = NONE;
        let mut from_first = true;
        let mut x = first;
        while x != join {
            if self.tree.pred_up[x] && self.tree.flow[x] < delta {
                delta = self.tree.flow[x];
                u_out = x;
            }
            x = self.tree.parent[x];
        }
        let mut x = second;
        while x != join {
            if !self.tree.pred_up[x] && self.tree.flow[x] <= delta {
                delta = self.tree.flow[x];
                u_out = x;
                from_first = false;
            }
            x = self.tree.parent[x];
        }
        assert!(u_out != NONE, "negative cycle of infinite capacity");

        if delta > 0 {
            let mut x = first;
            while x != join {
                if self.tree.pred_up[x] {
                    self.tree.flow[x] -= delta;
                } else {
                    self.tree.flow[x] += delta;
                }
                x = self.tree.parent[x];
            }
            let mut x = second;
            while x != join {
                if self.tree.pred_up[x] {
                    self.tree.flow[x] += delta;
                } else {
                    self.tree.flow[x] -= delta;
                }
                x = self.tree.parent[x];
            }
        }

        let (u_in, v_in) = if from_first {
            (first, second)
        } else {
            (second, first)
        };
        // the moved subtree shifts so that the entering arc becomes tight
        let shift = if u_in == first {
            -entering_rc
        } else {
            entering_rc
        };
        self.reroot(u_in, v_in, u_out, entering, delta, shift);
        self.pivots += 1;
        true
    }

    /// Detaches the subtree under `u_out`, re-roots it at `u_in` and hangs it
    /// below `v_in` through the entering arc.
    fn reroot(
        &mut self,
        u_in: usize,
        v_in: usize,
        u_out: usize,
        entering: usize,
        delta: i64,
        shift: i64,
    ) {
        let t = &mut self.tree;
        let mut path = std::mem::take(&mut self.path);
        path.clear();
        let mut x = u_in;
        loop {
            path.push(x);
            if x == u_out {
                break;
            }
            x = t.parent[x];
        }
        t.unlink(u_out);
        for w in path.windows(2) {
            t.unlink(w[0]);
        }
        let mut carry_pred = entering;
        let mut carry_flow = delta;
        let mut carry_up = u_in < self.n;
        let mut new_parent = v_in;
        for &x in &path {
            let (old_pred, old_flow, old_up) = (t.pred[x], t.flow[x], t.pred_up[x]);
            t.pred[x] = carry_pred;
            t.flow[x] = carry_flow;
            t.pred_up[x] = carry_up;
            t.link(x, new_parent);
            carry_pred = old_pred;
            carry_flow = old_flow;
            carry_up = !old_up;
            new_parent = x;
        }
        self.path = path;
        self.refresh_subtree(u_in, shift);
    }

    /// Recomputes depth below `top` from its parent and shifts the
    /// potentials of the subtree by `shift`.
    fn refresh_subtree(&mut self, top: usize, shift: i64) {
        let mut stack = std::mem::take(&mut self.stack);
        stack.clear();
        stack.push(top);
        let t = &mut self.tree;
        while let Some(v) = stack.pop() {
            t.depth[v] = t.depth[t.parent[v]] + 1;
            t.potential[v] += shift;
            let mut c = t.first_child[v];
            while c != NONE {
                stack.push(c);
                c = t.next_sibling[c];
            }
        }
        self.stack = stack;
    }

    /// Runs pivots until optimal or until the deadline passes.
    pub fn run(&mut self, deadline: Deadline) -> SolveStatus {
        loop {
            if self.pivots.is_multiple_of(1024) && deadline.expired() {
                return SolveStatus::TimedOut;
            }
            if !self.pivot() {
                return SolveStatus::Converged;
            }
        }
    }

    /// Flow on the real arcs of the current basis.
    pub fn flow(&self) -> Flow {
        let arcs = self.n * self.m;
        let entries = (0..self.root).filter_map(|v| {
            let arc = self.tree.pred[v];
            (arc < arcs && self.tree.flow[v] > 0)
                .then(|| (arc / self.m, arc % self.m, self.tree.flow[v] as f64))
        });
        Flow::new(self.n, self.m, entries).expect("tree arcs in range")
    }

    /// Flow still routed through the root.
    pub fn artificial_flow(&self) -> i64 {
        let arcs = self.n * self.m;
        (0..self.root)
            .filter(|&v| self.tree.pred[v] >= arcs)
            .map(|v| self.tree.flow[v])
            .sum()
    }

    pub fn potentials(&self) -> Certificate {
        Certificate::Potentials {
            supply: self.tree.potential[..self.n].to_vec(),
            demand: self.tree.potential[self.n..self.root].to_vec(),
        }
    }

    /// Structural check of the basis: spanning tree, zero reduced cost on
    /// tree arcs, nonnegative flows and conservation at every node.
    pub fn check_tree(&self) -> Result<(), String> {
        let t = &self.tree;
        let nodes = self.root + 1;
        let mut seen = vec![false; nodes];
        let mut stack = vec![self.root];
        let mut count = 0;
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut seen[v], true) {
                return Err(format!("node {v} reached twice"));
            }
            count += 1;
            for c in t.children(v) {
                if t.parent[c] != v {
                    return Err(format!("child {c} of {v} has parent {}", t.parent[c]));
                }
                stack.push(c);
            }
        }
        if count != nodes {
            return Err(format!("tree spans {count} of {nodes} nodes"));
        }
        let mut net = vec![0i64; nodes];
        for v in 0..self.root {
            let (s, d) = self.arc_ends(t.pred[v]);
            let p = t.parent[v];
            let ok = if t.pred_up[v] {
                (s, d) == (v, p)
            } else {
                (s, d) == (p, v)
            };
            if !ok {
                return Err(format!("pred arc of {v} does not join it to its parent"));
            }
            let rc = self.arc_cost(t.pred[v]) + t.potential[s] - t.potential[d];
            if rc != 0 {
                return Err(format!("tree arc into {v} has reduced cost {rc}"));
            }
            if t.flow[v] < 0 {
                return Err(format!("negative flow {} on tree arc of {v}", t.flow[v]));
            }
            net[s] += t.flow[v];
            net[d] -= t.flow[v];
        }
        for i in 0..self.n {
            if net[i] != self.inst.supplies()[i] {
                return Err(format!("supply node {i} ships {}", net[i]));
            }
        }
        for j in 0..self.m {
            if -net[self.n + j] != self.inst.demands()[j] {
                return Err(format!("demand node {j} receives {}", -net[self.n + j]));
            }
        }
        Ok(())
    }
}

/// Exact transport plan by network simplex.
pub fn solve_network_simplex(inst: &OTInstance) -> Result<SolveResult, Violation> {
    solve_network_simplex_with(inst, Deadline::NONE)
}

pub fn solve_network_simplex_with(
    inst: &OTInstance,
    deadline: Deadline,
) -> Result<SolveResult, Violation> {
    let started = Instant::now();
    let mut ns = NetworkSimplex::new(inst)?;
    let status = ns.run(deadline);
    if status == SolveStatus::Converged {
        assert_eq!(
            ns.artificial_flow(),
            0,
            "balanced complete bipartite instance left flow on the root"
        );
    }
    let flow = ns.flow();
    Ok(
        SolveResult::from_flow("network_simplex", inst, flow, ns.pivots(), started)
            .exact(status == SolveStatus::Converged)
            .status(status)
            .certificate(ns.potentials()),
    )
}

/// Smallest reduced cost `C[i][j] + pi_i - pi_j` over all real arcs.
pub fn min_reduced_cost(inst: &OTInstance, supply: &[i64], demand: &[i64]) -> i64 {
    let mut min = i64::MAX;
    for i in 0..inst.n() {
        for (j, &c) in inst.cost_row(i).iter().enumerate() {
            min = min.min(c + supply[i] - demand[j]);
        }
    }
    min
}
