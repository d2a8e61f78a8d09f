//! Hamiltonian cycle search over the panel dual graph.
//!
//! The solver pipeline: split the 4-regular dual graph into a 2-factor by
//! alternately coloring the edges of a random Euler circuit, merge the
//! resulting vertex-disjoint cycles by splicing pairs of aligned edges,
//! unstick stalled covers with targeted 2-opt reversals, and fall back to
//! exact backtracking on small graphs. Every stage is deterministic for a
//! fixed seed; retries derive their seeds from the attempt index.

use crate::panel::PanelNetwork;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error, PartialEq)]
pub enum StripifyError {
    #[error("dual graph is not 4-regular (node {0} has degree {1})")]
    NotFourRegular(usize, usize),
    #[error("panel network has {0} connected components; a single strip needs 1")]
    Disconnected(usize),
    #[error("no 2-factor found within the retry budget")]
    TwoFactorNotFound,
    #[error("cycle merging stuck with {remaining} cycles")]
    MergeStuck { remaining: usize },
    #[error("no Hamiltonian cycle found within budget ({remaining} cycles in best cover)")]
    CycleNotFound { remaining: usize },
}

/// Graph with one node per panel and one edge per shared panel edge.
#[derive(Debug, Clone)]
pub struct DualGraph {
    adj: Vec<Vec<(usize, usize)>>,
    edge_count: usize,
}

impl DualGraph {
    /// Builds a graph from explicit node count and edge list; edge ids are
    /// assigned in sorted order of the node pairs.
    pub fn from_edges(nodes: usize, edges: &[(usize, usize)]) -> Self {
        let mut sorted: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        sorted.sort();
        sorted.dedup();
        let mut adj = vec![Vec::new(); nodes];
        for (id, &(a, b)) in sorted.iter().enumerate() {
            adj[a].push((b, id));
            adj[b].push((a, id));
        }
        for list in &mut adj {
            list.sort();
        }
        DualGraph {
            adj,
            edge_count: sorted.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adj[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.adj[a].iter().find(|&&(n, _)| n == b).map(|&(_, e)| e)
    }

    pub fn degree_histogram(&self) -> HashMap<usize, usize> {
        let mut h = HashMap::new();
        for n in 0..self.len() {
            *h.entry(self.degree(n)).or_insert(0) += 1;
        }
        h
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut components = 0;
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }
}

/// One node per panel, one edge per shared edge; 4-regular by
/// construction of the panel network.
pub fn build_dual_graph(network: &PanelNetwork) -> DualGraph {
    let mut adj = vec![Vec::with_capacity(4); network.len()];
    for p in 0..network.len() {
        for n in network.neighbors(p) {
            adj[p].push((n.panel, n.edge));
        }
        adj[p].sort();
    }
    DualGraph {
        adj,
        edge_count: network.edge_count(),
    }
}

/// Spanning set of vertex-disjoint cycles covering every node.
#[derive(Debug, Clone)]
pub struct CycleCover {
    pub cycles: Vec<Vec<usize>>,
}

impl CycleCover {
    pub fn covered_nodes(&self) -> usize {
        self.cycles.iter().map(|c| c.len()).sum()
    }
}

/// Hamiltonian cycle over the panels: a cyclic order plus the shared edge
/// used at each step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripCycle {
    pub order: Vec<usize>,
    /// `hinges[i]` joins `order[i]` and `order[(i + 1) % n]`.
    pub hinges: Vec<usize>,
}

impl StripCycle {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CycleViolation {
    LengthMismatch { expected: usize, got: usize },
    DuplicatePanel { index: usize, panel: usize },
    NonAdjacentStep { index: usize },
    WrongHinge { index: usize },
}

impl std::fmt::Display for CycleViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CycleViolation::LengthMismatch { expected, got } => {
                write!(f, "cycle covers {got} panels, network has {expected}")
            }
            CycleViolation::DuplicatePanel { index, panel } => {
                write!(f, "duplicate panel {panel} at index {index}")
            }
            CycleViolation::NonAdjacentStep { index } => {
                write!(f, "non-adjacent step at index {index}")
            }
            CycleViolation::WrongHinge { index } => {
                write!(f, "hinge at index {index} is not the shared edge")
            }
        }
    }
}

/// Checks permutation, cyclic adjacency and hinge-edge consistency.
/// Violations are the return value, not an error.
pub fn validate_cycle(cycle: &StripCycle, network: &PanelNetwork) -> Result<(), CycleViolation> {
    let n = network.len();
    if cycle.order.len() != n || cycle.hinges.len() != n {
        return Err(CycleViolation::LengthMismatch {
            expected: n,
            got: cycle.order.len(),
        });
    }
    let mut seen = vec![false; n];
    for (i, &p) in cycle.order.iter().enumerate() {
        if p >= n || seen[p] {
            return Err(CycleViolation::DuplicatePanel { index: i, panel: p });
        }
        seen[p] = true;
    }
    for i in 0..n {
        let a = cycle.order[i];
        let b = cycle.order[(i + 1) % n];
        match network.shared_edge(a, b) {
            None => return Err(CycleViolation::NonAdjacentStep { index: i }),
            Some(e) => {
                if e != cycle.hinges[i] {
                    return Err(CycleViolation::WrongHinge { index: i });
                }
            }
        }
    }
    Ok(())
}

/// Splits an even-degree graph into a 2-regular spanning subgraph by
/// 2-coloring the edges of an Euler circuit alternately, then reads off
/// the cycles. A 2-regular input is returned as its own cover.
pub fn compute_2factor(g: &DualGraph, seed: u64) -> Result<CycleCover, StripifyError> {
    Ok(two_factor_cover(g, seed)?.into_cycle_cover())
}

fn two_factor_cover(g: &DualGraph, seed: u64) -> Result<Cover, StripifyError> {
    let n = g.len();
    if n == 0 {
        return Err(StripifyError::TwoFactorNotFound);
    }
    if (0..n).all(|v| g.degree(v) == 2) {
        let mut nbr = vec![[(usize::MAX, usize::MAX); 2]; n];
        for v in 0..n {
            nbr[v][0] = g.adj[v][0];
            nbr[v][1] = g.adj[v][1];
        }
        return Ok(Cover::from_neighbors(nbr));
    }
    for v in 0..n {
        if g.degree(v) != 4 {
            return Err(StripifyError::NotFourRegular(v, g.degree(v)));
        }
    }
    if g.component_count() != 1 {
        return Err(StripifyError::Disconnected(g.component_count()));
    }

    // Incidence lists shuffled per node; Hierholzer walk over them.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut incidence: Vec<Vec<(usize, usize)>> = g.adj.clone();
    for list in &mut incidence {
        list.shuffle(&mut rng);
    }
    let mut cursor = vec![0usize; n];
    let mut used = vec![false; g.edge_count];
    let mut stack: Vec<(usize, usize)> = vec![(0, usize::MAX)];
    let mut circuit_edges: Vec<(usize, usize, usize)> = Vec::with_capacity(g.edge_count);
    // Collect the circuit as (from, to, edge) in traversal order.
    let mut trail: Vec<(usize, usize)> = Vec::new();
    while let Some(&(v, e_in)) = stack.last() {
        let mut advanced = false;
        while cursor[v] < incidence[v].len() {
            let (w, e) = incidence[v][cursor[v]];
            cursor[v] += 1;
            if !used[e] {
                used[e] = true;
                stack.push((w, e));
                advanced = true;
                break;
            }
        }
        if !advanced {
            trail.push((v, e_in));
            stack.pop();
        }
    }
    // trail is the circuit reversed; adjacent entries share the edge.
    trail.reverse();
    for i in 0..trail.len() - 1 {
        let (a, _) = trail[i];
        let (b, e) = trail[i + 1];
        circuit_edges.push((a, b, e));
    }
    if circuit_edges.len() != g.edge_count {
        return Err(StripifyError::TwoFactorNotFound);
    }

    // Alternate colors; the even-length circuit gives every node exactly
    // two edges of each color.
    let mut nbr = vec![[(usize::MAX, usize::MAX); 2]; n];
    let mut fill = |v: usize, w: usize, e: usize| -> Result<(), StripifyError> {
        let slot = if nbr[v][0].0 == usize::MAX {
            0
        } else if nbr[v][1].0 == usize::MAX {
            1
        } else {
            return Err(StripifyError::TwoFactorNotFound);
        };
        nbr[v][slot] = (w, e);
        Ok(())
    };
    for (i, &(a, b, e)) in circuit_edges.iter().enumerate() {
        if i % 2 == 0 {
            fill(a, b, e)?;
            fill(b, a, e)?;
        }
    }
    if nbr.iter().any(|p| p[0].0 == usize::MAX || p[1].0 == usize::MAX) {
        return Err(StripifyError::TwoFactorNotFound);
    }
    Ok(Cover::from_neighbors(nbr))
}

/// Union-find over cover cycles; merging only ever unions.
struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Working representation of a cycle cover: two cover neighbors per node.
struct Cover {
    nbr: Vec<[(usize, usize); 2]>,
    dsu: Dsu,
    cycle_count: usize,
}

impl Cover {
    fn from_neighbors(nbr: Vec<[(usize, usize); 2]>) -> Self {
        let n = nbr.len();
        let mut dsu = Dsu::new(n);
        for (v, pair) in nbr.iter().enumerate() {
            dsu.union(v, pair[0].0);
            dsu.union(v, pair[1].0);
        }
        let mut roots: Vec<usize> = (0..n).map(|v| dsu.find(v)).collect();
        roots.sort();
        roots.dedup();
        let cycle_count = roots.len();
        Cover {
            nbr,
            dsu,
            cycle_count,
        }
    }

    fn same_cycle(&mut self, a: usize, b: usize) -> bool {
        self.dsu.find(a) == self.dsu.find(b)
    }

    fn cover_neighbors(&self, v: usize) -> [(usize, usize); 2] {
        self.nbr[v]
    }

    fn replace(&mut self, v: usize, old: usize, new: (usize, usize)) {
        if self.nbr[v][0].0 == old {
            self.nbr[v][0] = new;
        } else if self.nbr[v][1].0 == old {
            self.nbr[v][1] = new;
        } else {
            unreachable!("cover edge ({v}, {old}) missing");
        }
    }

    /// Splice two cycles: remove cover edges (a, a2) and (b, b2), add the
    /// graph edges (a, b) and (a2, b2).
    fn splice(&mut self, a: usize, a2: usize, b: usize, b2: usize, e_ab: usize, e_a2b2: usize) {
        self.replace(a, a2, (b, e_ab));
        self.replace(b, b2, (a, e_ab));
        self.replace(a2, a, (b2, e_a2b2));
        self.replace(b2, b, (a2, e_a2b2));
        self.dsu.union(a, b);
        self.cycle_count -= 1;
    }

    /// Nodes of the cycle containing `start`, in walk order.
    fn cycle_from(&self, start: usize) -> Vec<usize> {
        let mut nodes = vec![start];
        let mut prev = start;
        let mut cur = self.nbr[start][0].0;
        while cur != start {
            nodes.push(cur);
            let [x, y] = self.nbr[cur];
            let next = if x.0 == prev { y.0 } else { x.0 };
            prev = cur;
            cur = next;
        }
        nodes
    }

    fn into_cycle_cover(mut self) -> CycleCover {
        let n = self.nbr.len();
        let mut root_of: Vec<usize> = (0..n).map(|v| self.dsu.find(v)).collect();
        let mut starts: Vec<usize> = Vec::new();
        let mut seen_root: HashMap<usize, ()> = HashMap::new();
        for v in 0..n {
            if seen_root.insert(root_of[v], ()).is_none() {
                starts.push(v);
            }
        }
        root_of.clear();
        let mut cycles: Vec<Vec<usize>> = starts.iter().map(|&s| self.cycle_from(s)).collect();
        cycles.sort_by_key(|c| c[0]);
        CycleCover { cycles }
    }

    /// Extracts the Hamiltonian cycle in canonical orientation: starts at
    /// node 0 and proceeds toward the smaller-id cover neighbor.
    fn extract_hamiltonian(&self) -> StripCycle {
        let n = self.nbr.len();
        let [a, b] = self.nbr[0];
        let first = if a.0 <= b.0 { a } else { b };
        let mut order = Vec::with_capacity(n);
        let mut hinges = Vec::with_capacity(n);
        order.push(0);
        hinges.push(first.1);
        let mut prev = 0;
        let mut cur = first.0;
        while cur != 0 {
            order.push(cur);
            let [x, y] = self.nbr[cur];
            let (next, edge) = if x.0 == prev { y } else { x };
            hinges.push(edge);
            prev = cur;
            cur = next;
        }
        StripCycle { order, hinges }
    }
}

/// Builds a cover from explicit cycles, looking edge ids up in the graph.
fn cover_from_cycles(cover: &CycleCover, g: &DualGraph) -> Result<Cover, StripifyError> {
    let n = g.len();
    let mut nbr = vec![[(usize::MAX, usize::MAX); 2]; n];
    for cycle in &cover.cycles {
        let m = cycle.len();
        for i in 0..m {
            let a = cycle[i];
            let b = cycle[(i + 1) % m];
            let e = g
                .has_edge(a, b)
                .ok_or(StripifyError::MergeStuck { remaining: cover.cycles.len() })?;
            let slot_a = if nbr[a][0].0 == usize::MAX { 0 } else { 1 };
            nbr[a][slot_a] = (b, e);
            let slot_b = if nbr[b][0].0 == usize::MAX { 0 } else { 1 };
            nbr[b][slot_b] = (a, e);
        }
    }
    Ok(Cover::from_neighbors(nbr))
}

/// Worklist splicing: repeatedly replace a pair of aligned cover edges
/// across two cycles with the two graph edges joining them. Each splice
/// strictly decreases the cycle count.
fn stitch(cover: &mut Cover, g: &DualGraph) {
    let mut work: VecDeque<(usize, usize, usize)> = VecDeque::new();
    for a in 0..g.len() {
        for &(b, e) in &g.adj[a] {
            if a < b {
                work.push_back((a, b, e));
            }
        }
    }
    while let Some((a, b, e_ab)) = work.pop_front() {
        if cover.cycle_count == 1 {
            return;
        }
        if cover.same_cycle(a, b) {
            continue;
        }
        let mut applied = false;
        'combos: for (a2, _e_aa2) in cover.cover_neighbors(a) {
            for (b2, _e_bb2) in cover.cover_neighbors(b) {
                if let Some(e_a2b2) = g.has_edge(a2, b2) {
                    cover.splice(a, a2, b, b2, e_ab, e_a2b2);
                    applied = true;
                    // Alignment around the touched nodes changed; their
                    // incident edges become candidates again.
                    for v in [a, a2, b, b2] {
                        for &(w, e) in &g.adj[v] {
                            work.push_back((v.min(w), v.max(w), e));
                        }
                    }
                    break 'combos;
                }
            }
        }
        let _ = applied;
    }
}

/// Rotation-based closure: opens the largest cover cycle into a path,
/// absorbs every other cycle through any single edge at the moving path
/// end, and rotates the end (a 2-opt segment reversal) when it is
/// blocked. Finally rotates until the two path ends are adjacent and
/// closes the Hamiltonian cycle.
///
/// The path lives in a ring buffer so a rotation can reverse whichever
/// side of the pivot is shorter: reversing the prefix and advancing the
/// ring start yields the same path read from the other direction.
struct PathMachine<'g> {
    g: &'g DualGraph,
    ring: Vec<usize>,
    start: usize,
    len: usize,
    /// Ring slot per node, or usize::MAX while in a straggler.
    slot: Vec<usize>,
    /// Cover adjacency of straggler nodes.
    straggler_nbr: Vec<[usize; 2]>,
    stragglers_left: usize,
}

impl<'g> PathMachine<'g> {
    fn from_cover(cover: &Cover, g: &'g DualGraph) -> Self {
        let n = g.len();
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut seen = vec![false; n];
        for v in 0..n {
            if !seen[v] {
                let cyc = cover.cycle_from(v);
                for &u in &cyc {
                    seen[u] = true;
                }
                cycles.push(cyc);
            }
        }
        // Open the largest cycle; ties break toward the smaller lead node.
        let largest = cycles
            .iter()
            .enumerate()
            .max_by_key(|(_, c)| (c.len(), usize::MAX - c[0]))
            .map(|(i, _)| i)
            .unwrap();
        let path = cycles.swap_remove(largest);
        // Double capacity leaves room to relocate blocks without the
        // live region colliding with itself.
        let mut ring = vec![usize::MAX; 2 * n];
        let mut slot = vec![usize::MAX; n];
        for (i, &v) in path.iter().enumerate() {
            ring[i] = v;
            slot[v] = i;
        }
        let mut straggler_nbr = vec![[usize::MAX; 2]; n];
        for cyc in &cycles {
            let m = cyc.len();
            for i in 0..m {
                straggler_nbr[cyc[i]] = [cyc[(i + m - 1) % m], cyc[(i + 1) % m]];
            }
        }
        PathMachine {
            g,
            ring,
            start: 0,
            len: path.len(),
            slot,
            straggler_nbr,
            stragglers_left: cycles.len(),
        }
    }

    fn raw(&self, logical: usize) -> usize {
        let r = self.start + logical;
        if r >= self.ring.len() {
            r - self.ring.len()
        } else {
            r
        }
    }

    fn at(&self, logical: usize) -> usize {
        self.ring[self.raw(logical)]
    }

    fn set(&mut self, logical: usize, node: usize) {
        let r = self.raw(logical);
        self.ring[r] = node;
        self.slot[node] = r;
    }

    /// Logical path position of a node, or usize::MAX off-path.
    fn pos(&self, node: usize) -> usize {
        let s = self.slot[node];
        if s == usize::MAX {
            return usize::MAX;
        }
        let cap = self.ring.len();
        if s >= self.start {
            s - self.start
        } else {
            s + cap - self.start
        }
    }

    fn head(&self) -> usize {
        self.at(0)
    }

    fn end(&self) -> usize {
        self.at(self.len - 1)
    }

    fn reverse_range(&mut self, a: usize, b: usize) {
        // Reverses logical positions [a, b).
        let (mut i, mut j) = (a, b.wrapping_sub(1));
        while i < j {
            let (u, v) = (self.at(i), self.at(j));
            self.set(i, v);
            self.set(j, u);
            i += 1;
            j -= 1;
        }
    }

    /// Multi-source BFS distance field over the dual graph.
    fn distance_field(&self, sources: impl Iterator<Item = usize>) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.g.len()];
        let mut queue = VecDeque::new();
        for s in sources {
            if dist[s] == u32::MAX {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &(w, _) in self.g.neighbors(v) {
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Field pulling the moving end toward the remaining stragglers.
    fn straggler_field(&self) -> Vec<u32> {
        let sources: Vec<usize> = (0..self.g.len())
            .filter(|&v| self.slot[v] == usize::MAX)
            .collect();
        self.distance_field(sources.into_iter())
    }

    /// Field pulling the moving end toward closure with the path head.
    fn closure_field(&self) -> Vec<u32> {
        let head = self.head();
        let sources: Vec<usize> = self.g.neighbors(head).iter().map(|&(w, _)| w).collect();
        self.distance_field(sources.into_iter())
    }

    /// Straggler nodes walked from `w`, leaving toward `second` and
    /// ending at w's other cover neighbor.
    fn straggler_walk(&self, w: usize, second: usize) -> Vec<usize> {
        let mut seq = vec![w];
        let mut prev = w;
        let mut cur = second;
        while cur != w {
            seq.push(cur);
            let [a, b] = self.straggler_nbr[cur];
            let next = if a == prev { b } else { a };
            prev = cur;
            cur = next;
        }
        seq
    }

    /// Splices the straggler containing `w` onto the path end. Any single
    /// graph edge from the end into the straggler suffices.
    fn absorb_at_end(&mut self, w: usize) {
        let [n1, n2] = self.straggler_nbr[w];
        // Walk toward the larger neighbor so the smaller one becomes the
        // new end; fixed rule for determinism.
        let seq = self.straggler_walk(w, n1.max(n2));
        for v in seq {
            self.straggler_nbr[v] = [usize::MAX; 2];
            let logical = self.len;
            self.len += 1;
            self.set(logical, v);
        }
        self.stragglers_left -= 1;
    }

    /// Tries to splice a straggler into the path edge after position `i`:
    /// needs straggler edge (b, b2) with (path[i], b) and (path[i+1], b2)
    /// both in the graph. Shifts the shorter path side to make room.
    fn absorb_into_edge(&mut self, i: usize) -> bool {
        if i + 1 >= self.len {
            return false;
        }
        let (u, v) = (self.at(i), self.at(i + 1));
        for &(b, _) in self.g.neighbors(u) {
            if self.slot[b] != usize::MAX {
                continue;
            }
            for b2 in self.straggler_nbr[b] {
                if self.g.has_edge(v, b2).is_none() {
                    continue;
                }
                let [n1, n2] = self.straggler_nbr[b];
                let away = if n1 == b2 { n2 } else { n1 };
                if away == b2 {
                    continue;
                }
                let seq = self.straggler_walk(b, away);
                debug_assert_eq!(*seq.last().unwrap(), b2);
                for &s in &seq {
                    self.straggler_nbr[s] = [usize::MAX; 2];
                }
                let m = seq.len();
                let cap = self.ring.len();
                if self.len - i - 1 <= i + 1 {
                    // Shift the tail up by m.
                    for j in (i + 1..self.len).rev() {
                        let node = self.at(j);
                        self.set(j + m, node);
                    }
                } else {
                    // Shift the head down by m.
                    let new_start = (self.start + cap - m) % cap;
                    for j in 0..=i {
                        let node = self.at(j);
                        let r = (new_start + j) % cap;
                        self.ring[r] = node;
                        self.slot[node] = r;
                    }
                    self.start = new_start;
                }
                self.len += m;
                for (k, &node) in seq.iter().enumerate() {
                    self.set(i + 1 + k, node);
                }
                self.stragglers_left -= 1;
                return true;
            }
        }
        false
    }

    /// Rotation at the path end: add edge (end, w), remove the path edge
    /// after w. Reverses the suffix, or, when the prefix side is shorter,
    /// re-bases the ring and appends the reversed prefix behind the tail
    /// (the same path read from the other direction, so the moving end
    /// swaps sides). Returns the logical position of the new path edge.
    fn rotate(&mut self, w_pos: usize, allow_side_swap: bool) -> usize {
        let suffix = self.len - w_pos - 1;
        let prefix = w_pos + 1;
        if !allow_side_swap || suffix <= prefix {
            self.reverse_range(w_pos + 1, self.len);
            w_pos
        } else {
            // Stored order becomes: old suffix, then the old prefix
            // reversed. Targets lie in the free band past the live
            // region, so sources are never clobbered.
            let cap = self.ring.len();
            for j in 0..prefix {
                let node = self.at(w_pos - j);
                let r = (self.start + self.len + j) % cap;
                self.ring[r] = node;
                self.slot[node] = r;
            }
            self.start = (self.start + prefix) % cap;
            // The new edge (old end, w) joins the two blocks.
            self.len - w_pos - 2
        }
    }

    /// Scans path edges from `i` for interior straggler splices,
    /// cascading over freshly inserted segments.
    fn vacuum(&mut self, start: usize, mut last: usize) {
        let mut i = start;
        while i <= last && self.stragglers_left > 0 && i + 1 < self.len {
            let before = self.len;
            if self.absorb_into_edge(i) {
                last += self.len - before;
            } else {
                i += 1;
            }
        }
    }

    /// Rotation candidates: path neighbors of the end excluding the
    /// current predecessor.
    fn rotation_candidates(&self) -> Vec<usize> {
        let end = self.end();
        let mut out: Vec<usize> = self
            .g
            .neighbors(end)
            .iter()
            .filter_map(|&(w, _)| {
                let p = self.pos(w);
                if p == usize::MAX || p + 2 >= self.len {
                    None
                } else {
                    Some(p)
                }
            })
            .collect();
        out.sort();
        out
    }

    /// Rotation guided by a distance field: usually descend toward the
    /// target set, occasionally step randomly to escape plateaus.
    /// Returns false when no rotation exists.
    fn guided_rotate(&mut self, field: &[u32], rng: &mut ChaCha8Rng, allow_side_swap: bool) -> bool {
        let cands = self.rotation_candidates();
        if cands.is_empty() {
            return false;
        }
        let pick = if rng.gen_range(0..8u8) == 0 {
            cands[rng.gen_range(0..cands.len())]
        } else {
            // New end after rotating at position p is the node at p + 1;
            // among equally close options take the shortest reversal.
            let best = cands.iter().map(|&p| field[self.at(p + 1)]).min().unwrap();
            cands
                .into_iter()
                .filter(|&p| field[self.at(p + 1)] == best)
                .max()
                .unwrap()
        };
        let edge_pos = self.rotate(pick, allow_side_swap);
        // The rotation exposed one new path edge; a straggler may splice
        // straight into it.
        self.vacuum(edge_pos, edge_pos);
        true
    }

    /// Drives absorption and closure. Returns the Hamiltonian node order
    /// on success.
    fn run(mut self, rng: &mut ChaCha8Rng, rotation_budget: usize) -> Option<Vec<usize>> {
        let n = self.g.len();
        let mut rotations = 0usize;
        let mut field = self.straggler_field();
        let mut best = u32::MAX;
        let mut stall = 0u32;
        'outer: while self.stragglers_left > 0 {
            let end = self.end();
            for &(w, _) in self.g.neighbors(end) {
                if self.slot[w] == usize::MAX {
                    let tail = self.len.saturating_sub(1);
                    self.absorb_at_end(w);
                    self.vacuum(tail, self.len.saturating_sub(2));
                    field = self.straggler_field();
                    best = u32::MAX;
                    stall = 0;
                    continue 'outer;
                }
            }
            let before = self.stragglers_left;
            if !self.guided_rotate(&field, rng, true) {
                return None;
            }
            if self.stragglers_left != before {
                field = self.straggler_field();
                best = u32::MAX;
                stall = 0;
            } else {
                let d = field[self.end()];
                if d < best {
                    best = d;
                    stall = 0;
                } else {
                    stall += 1;
                    if stall > 256 {
                        self.flip();
                        best = u32::MAX;
                        stall = 0;
                    }
                }
            }
            rotations += 1;
            if rotations > rotation_budget {
                return None;
            }
        }
        // Close the path into a cycle. Side swaps change the head, so
        // rotations here keep it fixed; a stalled end flips instead.
        debug_assert_eq!(self.len, n);
        let mut field = self.closure_field();
        let mut best = u32::MAX;
        let mut stall = 0u32;
        loop {
            let (head, end) = (self.head(), self.end());
            if self.g.has_edge(head, end).is_some() {
                return Some((0..self.len).map(|i| self.at(i)).collect());
            }
            if !self.guided_rotate(&field, rng, false) {
                return None;
            }
            let d = field[self.end()];
            if d < best {
                best = d;
                stall = 0;
            } else {
                stall += 1;
                if stall > 256 {
                    self.flip();
                    field = self.closure_field();
                    best = u32::MAX;
                    stall = 0;
                }
            }
            rotations += 1;
            if rotations > rotation_budget {
                return None;
            }
        }
    }

    /// Reverses the whole path so the former head becomes the moving end.
    fn flip(&mut self) {
        self.reverse_range(0, self.len);
    }
}

/// Cover adjacency for a Hamiltonian node order.
fn cover_from_order(order: &[usize], g: &DualGraph) -> Cover {
    let n = order.len();
    let mut nbr = vec![[(usize::MAX, usize::MAX); 2]; n];
    for i in 0..n {
        let a = order[i];
        let b = order[(i + 1) % n];
        let e = g.has_edge(a, b).expect("consecutive path nodes are adjacent");
        let slot_a = if nbr[a][0].0 == usize::MAX { 0 } else { 1 };
        nbr[a][slot_a] = (b, e);
        let slot_b = if nbr[b][0].0 == usize::MAX { 0 } else { 1 };
        nbr[b][slot_b] = (a, e);
    }
    Cover::from_neighbors(nbr)
}

/// Merges a cycle cover into a single Hamiltonian cycle by splicing, or
/// reports how many cycles remain.
pub fn merge_cycles(cover: &CycleCover, g: &DualGraph) -> Result<StripCycle, StripifyError> {
    let mut work = cover_from_cycles(cover, g)?;
    stitch(&mut work, g);
    if work.cycle_count == 1 {
        Ok(work.extract_hamiltonian())
    } else {
        Err(StripifyError::MergeStuck {
            remaining: work.cycle_count,
        })
    }
}

/// Solver configuration. All budgets are deterministic step counts so a
/// fixed seed always yields the same cycle.
#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    pub seed: u64,
    /// Independent 2-factor attempts (distinct Euler tours).
    pub retry_budget: u32,
    /// End rotations per attempt, as a multiple of the node count.
    pub rotation_factor: u32,
    /// Maximum node count for the exact backtracking fallback.
    pub exact_threshold: usize,
    /// Node-expansion budget for the exact fallback.
    pub backtrack_steps: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            seed: 0,
            retry_budget: 32,
            rotation_factor: 8,
            exact_threshold: 60,
            backtrack_steps: 20_000_000,
        }
    }
}

fn attempt_seed(seed: u64, attempt: u32) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(attempt as u64 + 1)
}

fn solve_attempt(g: &DualGraph, seed: u64, rotation_factor: u32) -> Result<StripCycle, usize> {
    let mut cover = match two_factor_cover(g, seed) {
        Ok(c) => c,
        Err(_) => return Err(usize::MAX),
    };
    stitch(&mut cover, g);
    if cover.cycle_count == 1 {
        return Ok(cover.extract_hamiltonian());
    }
    let remaining = cover.cycle_count;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bf0_3635);
    let budget = (rotation_factor as usize) * g.len().max(64);
    let machine = PathMachine::from_cover(&cover, g);
    match machine.run(&mut rng, budget) {
        Some(order) => Ok(cover_from_order(&order, g).extract_hamiltonian()),
        None => Err(remaining),
    }
}

/// Exact backtracking with a degree-availability prune and a deterministic
/// step budget. Returns None when no cycle exists or the budget ran out.
fn backtrack_exact(g: &DualGraph, step_budget: u64) -> Option<StripCycle> {
    let n = g.len();
    if n == 0 {
        return None;
    }
    if n == 1 {
        return None;
    }
    let mut steps = 0u64;
    let mut path = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    path.push(0usize);
    visited[0] = true;

    fn dfs(
        g: &DualGraph,
        path: &mut Vec<usize>,
        visited: &mut [bool],
        steps: &mut u64,
        budget: u64,
    ) -> bool {
        if *steps >= budget {
            return false;
        }
        *steps += 1;
        let n = g.len();
        let cur = *path.last().unwrap();
        if path.len() == n {
            return g.has_edge(cur, 0).is_some();
        }
        // Prune: every unvisited node needs two available connections.
        for v in 0..n {
            if visited[v] {
                continue;
            }
            let mut avail = 0;
            for &(w, _) in &g.adj[v] {
                if !visited[w] || w == cur || w == 0 {
                    avail += 1;
                }
            }
            if avail < 2 {
                return false;
            }
        }
        for &(w, _) in &g.adj[cur] {
            if !visited[w] {
                visited[w] = true;
                path.push(w);
                if dfs(g, path, visited, steps, budget) {
                    return true;
                }
                path.pop();
                visited[w] = false;
            }
        }
        false
    }

    if dfs(g, &mut path, &mut visited, &mut steps, step_budget) {
        let mut hinges = Vec::with_capacity(n);
        for i in 0..n {
            let a = path[i];
            let b = path[(i + 1) % n];
            hinges.push(g.has_edge(a, b).unwrap());
        }
        // Canonical orientation: second node is the smaller neighbor.
        let cycle = StripCycle {
            order: path,
            hinges,
        };
        Some(canonicalize(cycle))
    } else {
        None
    }
}

fn canonicalize(cycle: StripCycle) -> StripCycle {
    let n = cycle.order.len();
    let zero = cycle.order.iter().position(|&p| p == 0).unwrap();
    let at = |i: isize| -> usize {
        cycle.order[((zero as isize + i).rem_euclid(n as isize)) as usize]
    };
    let forward = at(1) <= at(-1);
    let mut order = Vec::with_capacity(n);
    let mut hinges = Vec::with_capacity(n);
    for i in 0..n {
        let idx = if forward {
            (zero + i) % n
        } else {
            (zero + n - i) % n
        };
        order.push(cycle.order[idx]);
        let hidx = if forward {
            (zero + i) % n
        } else {
            (zero + n - i + n - 1) % n
        };
        hinges.push(cycle.hinges[hidx]);
    }
    StripCycle { order, hinges }
}

/// Finds a Hamiltonian cycle over the panel network.
///
/// Pipeline: seeded 2-factor + merge attempts, 2-opt repair on stalled
/// covers, then exact backtracking when the graph is small. Failure does
/// not prove that no cycle exists.
pub fn find_hamiltonian_cycle(
    network: &PanelNetwork,
    config: &SolveConfig,
) -> Result<StripCycle, StripifyError> {
    let components = network.component_count();
    if components != 1 {
        return Err(StripifyError::Disconnected(components));
    }
    let g = build_dual_graph(network);
    for v in 0..g.len() {
        if g.degree(v) != 4 {
            return Err(StripifyError::NotFourRegular(v, g.degree(v)));
        }
    }

    let attempts: Vec<u32> = (0..config.retry_budget).collect();
    let run =
        |&attempt: &u32| solve_attempt(&g, attempt_seed(config.seed, attempt), config.rotation_factor);

    #[cfg(feature = "parallel")]
    let result = attempts.par_iter().map(run).find_first(|r| r.is_ok());
    #[cfg(not(feature = "parallel"))]
    let result = attempts.iter().map(run).find(|r| r.is_ok());

    let mut best_remaining = usize::MAX;
    match result {
        Some(Ok(cycle)) => {
            debug_assert!(validate_cycle(&cycle, network).is_ok());
            return Ok(cycle);
        }
        _ => {
            // Gather diagnostics from a fresh sequential pass.
            for attempt in 0..config.retry_budget.min(4) {
                if let Err(rem) = solve_attempt(&g, attempt_seed(config.seed, attempt), 1) {
                    best_remaining = best_remaining.min(rem);
                }
            }
        }
    }

    if g.len() <= config.exact_threshold {
        if let Some(cycle) = backtrack_exact(&g, config.backtrack_steps) {
            debug_assert!(validate_cycle(&cycle, network).is_ok());
            return Ok(cycle);
        }
    }
    Err(StripifyError::CycleNotFound {
        remaining: if best_remaining == usize::MAX {
            0
        } else {
            best_remaining
        },
    })
}
