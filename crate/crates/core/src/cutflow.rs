//! Maximal flows from a finite site set to infinity.
//!
//! The infinite problem is approached through the balls `V_n = {|x|_1 <= n}`:
//! the source set is contracted to one node, the sphere `B_n = {|x|_1 = n}` to
//! another, and an exact integer max flow is computed between them. Minimal
//! cutsets are recovered from residual reachability and turned into closed
//! dual paths. A brute-force enumeration of surrounding dual cycles serves as
//! an independent oracle on small boxes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::capacity::{Capacities, CapacityField, DistributionSpec};
use crate::error::CutError;
use crate::lattice::{neighbors, s_of_bond, s_of_dual_bond, Bond, DualBond, DualSite, Site, SiteSet};
use crate::rational::Rational;

/// Default ratio between the largest box tried and the radius of the source.
pub const DEFAULT_NMAX_FACTOR: i64 = 512;

/// Margin added to the source radius for the first box.
pub const FIRST_BOX_MARGIN: i64 = 8;

/// Largest box radius accepted by [`brute_force_min_cycle`].
pub const ORACLE_MAX_RADIUS: i64 = 8;

/// Sites of the ball `V_n` in lexicographic order.
#[derive(Clone, Debug)]
pub struct Ball {
    n: i64,
    offsets: Vec<usize>,
}

impl Ball {
    pub fn new(n: i64) -> Self {
        let mut offsets = Vec::with_capacity(2 * n as usize + 2);
        let mut acc = 0usize;
        for x in -n..=n {
            offsets.push(acc);
            acc += (2 * (n - x.abs()) + 1) as usize;
        }
        offsets.push(acc);
        Ball { n, offsets }
    }

    pub fn radius(&self) -> i64 {
        self.n
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().expect("nonempty")
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, s: Site) -> bool {
        s.l1_norm() <= self.n
    }

    pub fn on_boundary(&self, s: Site) -> bool {
        s.l1_norm() == self.n
    }

    pub fn index(&self, s: Site) -> Option<usize> {
        if !self.contains(s) {
            return None;
        }
        let half = self.n - s.x.abs();
        Some(self.offsets[(s.x + self.n) as usize] + (s.y + half) as usize)
    }

    pub fn site(&self, idx: usize) -> Site {
        let col = self.offsets.partition_point(|&o| o <= idx) - 1;
        let x = col as i64 - self.n;
        let half = self.n - x.abs();
        Site::new(x, (idx - self.offsets[col]) as i64 - half)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        let n = self.n;
        (-n..=n).flat_map(move |x| {
            let h = n - x.abs();
            (-h..=h).map(move |y| Site::new(x, y))
        })
    }

    /// Bonds with both endpoints in the ball, each once, lexicographically.
    pub fn bonds(&self) -> impl Iterator<Item = Bond> + '_ {
        self.sites().flat_map(move |s| {
            let right = Bond::horizontal(s);
            let up = Bond::vertical(s);
            [right, up].into_iter().filter(move |e| self.contains(e.b()))
        })
    }
}

/// Antisymmetric flow on the bonds of a ball; `values[e]` is the flow from
/// `e.a()` to `e.b()`, absent bonds carry nothing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowAssignment {
    pub box_radius: i64,
    values: BTreeMap<Bond, i64>,
}

impl FlowAssignment {
    pub fn zero(box_radius: i64) -> Self {
        FlowAssignment { box_radius, values: BTreeMap::new() }
    }

    /// Flow from `from` to the neighbouring site `to`.
    pub fn get(&self, from: Site, to: Site) -> i64 {
        let Ok(e) = Bond::new(from, to) else { return 0 };
        let f = self.values.get(&e).copied().unwrap_or(0);
        if e.a() == from {
            f
        } else {
            -f
        }
    }

    /// Sets the flow from `from` to `to`, and hence `-value` the other way.
    pub fn set(&mut self, from: Site, to: Site, value: i64) {
        let e = Bond::new(from, to).expect("neighbouring sites");
        let v = if e.a() == from { value } else { -value };
        if v == 0 {
            self.values.remove(&e);
        } else {
            self.values.insert(e, v);
        }
    }

    /// Nonzero entries as `(bond, flow from a to b)`.
    pub fn iter(&self) -> impl Iterator<Item = (Bond, i64)> + '_ {
        self.values.iter().map(|(e, f)| (*e, *f))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Net outflow at `x`.
    pub fn divergence(&self, x: Site) -> i64 {
        neighbors(x).iter().map(|&y| self.get(x, y)).sum()
    }

    pub fn translate(&self, dx: i64, dy: i64) -> Self {
        let mut out = FlowAssignment::zero(self.box_radius);
        for (e, f) in self.iter() {
            out.set(e.a().translate(dx, dy), e.b().translate(dx, dy), f);
        }
        out
    }
}

/// A set of bonds separating a source set from infinity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cutset {
    pub bonds: Vec<Bond>,
    pub source: SiteSet,
}

impl Cutset {
    pub fn capacity<C: Capacities>(&self, field: &C) -> u64 {
        self.bonds.iter().map(|&e| field.capacity(e)).sum()
    }

    /// Largest l1 norm of an endpoint.
    pub fn l1_extent(&self) -> i64 {
        self.bonds.iter().map(|e| e.a().l1_norm().max(e.b().l1_norm())).max().unwrap_or(0)
    }
}

/// Closed walk on the dual lattice, first site repeated at the end.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualCycle {
    pub sites: Vec<DualSite>,
}

impl DualCycle {
    /// Number of dual bonds.
    pub fn len(&self) -> usize {
        self.sites.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bonds(&self) -> impl Iterator<Item = DualBond> + '_ {
        self.sites.windows(2).map(|w| DualBond::new(w[0], w[1]).expect("consecutive sites are adjacent"))
    }

    /// Sum of `capacity(s(d))` over the dual bonds.
    pub fn weight<C: Capacities>(&self, field: &C) -> u64 {
        self.bonds().map(|d| field.capacity(s_of_dual_bond(d))).sum()
    }

    /// Ray-crossing parity along `+x` from `site`.
    pub fn encloses(&self, site: Site) -> bool {
        self.bonds().filter(|d| crosses_ray(*d, site)).count() % 2 == 1
    }
}

/// The dual bond crosses the horizontal half-line from `site` towards `+x`.
fn crosses_ray(d: DualBond, site: Site) -> bool {
    d.is_vertical() && d.a().j == site.y - 1 && d.a().i >= site.x
}

#[derive(Clone, Debug)]
pub struct MaxFlowResult {
    /// Micro-units.
    pub value: u64,
    pub flow: FlowAssignment,
    pub mincut: Cutset,
    pub box_used: i64,
    pub stabilized: bool,
}

/// JSON shape of a [`MaxFlowResult`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxFlowSummary {
    pub value_micro: u64,
    pub box_used: i64,
    pub stabilized: bool,
    pub mincut: Vec<[i64; 4]>,
    pub source_size: usize,
}

impl MaxFlowResult {
    pub fn summary(&self) -> MaxFlowSummary {
        MaxFlowSummary {
            value_micro: self.value,
            box_used: self.box_used,
            stabilized: self.stabilized,
            mincut: self.mincut.bonds.iter().map(|e| [e.a().x, e.a().y, e.b().x, e.b().y]).collect(),
            source_size: self.mincut.source.len(),
        }
    }
}

/// Integer max flow by Dinic's blocking flows. Arcs come in pairs `(2k, 2k+1)`
/// that are each other's reverse.
struct Network {
    adj_start: Vec<usize>,
    adj: Vec<usize>,
    to: Vec<u32>,
    residual: Vec<i64>,
}

impl Network {
    /// `edges` are undirected `(u, v, capacity)`.
    fn undirected(nodes: usize, edges: &[(u32, u32, i64)]) -> Self {
        let mut to = Vec::with_capacity(2 * edges.len());
        let mut residual = Vec::with_capacity(2 * edges.len());
        let mut degree = vec![0usize; nodes + 1];
        for &(u, v, c) in edges {
            to.push(v);
            residual.push(c);
            to.push(u);
            residual.push(c);
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut adj_start = vec![0usize; nodes + 1];
        for i in 0..nodes {
            adj_start[i + 1] = adj_start[i] + degree[i];
        }
        let mut fill = adj_start.clone();
        let mut adj = vec![0usize; 2 * edges.len()];
        for (k, &(u, v, _)) in edges.iter().enumerate() {
            adj[fill[u as usize]] = 2 * k;
            fill[u as usize] += 1;
            adj[fill[v as usize]] = 2 * k + 1;
            fill[v as usize] += 1;
        }
        Network { adj_start, adj, to, residual }
    }

    fn levels(&self, s: usize) -> Vec<u32> {
        let mut level = vec![u32::MAX; self.adj_start.len() - 1];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.adj[self.adj_start[v]..self.adj_start[v + 1]] {
                let w = self.to[e] as usize;
                if self.residual[e] > 0 && level[w] == u32::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        level
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0i64;
        loop {
            let mut level = self.levels(s);
            if level[t] == u32::MAX {
                return total;
            }
            total += self.blocking_flow(s, t, &mut level);
        }
    }

    fn blocking_flow(&mut self, s: usize, t: usize, level: &mut [u32]) -> i64 {
        let mut current: Vec<usize> = self.adj_start[..self.adj_start.len() - 1].to_vec();
        let mut path: Vec<usize> = Vec::new();
        let mut pushed = 0i64;
        let mut v = s;
        loop {
            if v == t {
                let bottleneck = path.iter().map(|&e| self.residual[e]).min().expect("nonempty path");
                for &e in &path {
                    self.residual[e] -= bottleneck;
                    self.residual[e ^ 1] += bottleneck;
                }
                pushed += bottleneck;
                let k = path.iter().position(|&e| self.residual[e] == 0).expect("saturated arc");
                v = self.to[path[k] ^ 1] as usize;
                path.truncate(k);
                continue;
            }
            let end = self.adj_start[v + 1];
            let mut advanced = false;
            while current[v] < end {
                let e = self.adj[current[v]];
                let w = self.to[e] as usize;
                if self.residual[e] > 0 && level[w] == level[v] + 1 {
                    path.push(e);
                    v = w;
                    advanced = true;
                    break;
                }
                current[v] += 1;
            }
            if !advanced {
                // dead end for the rest of this phase
                level[v] = u32::MAX - 1;
                match path.pop() {
                    None => return pushed,
                    Some(e) => {
                        v = self.to[e ^ 1] as usize;
                        current[v] += 1;
                    }
                }
            }
        }
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        self.levels(s).into_iter().map(|l| l != u32::MAX).collect()
    }
}

const SOURCE: u32 = 0;
const SINK: u32 = 1;

/// Exact max flow from `source` to the sphere `B_n`, contracted to single nodes.
pub fn truncated_maxflow<C: Capacities>(field: &C, source: &SiteSet, n: i64) -> Result<MaxFlowResult, CutError> {
    if let Some(s) = source.iter().find(|s| s.l1_norm() >= n) {
        return Err(CutError::SourceTouchesBoundary(*s));
    }
    let ball = Ball::new(n);
    let mut node_of = vec![0u32; ball.len()];
    let mut next = 2u32;
    for (idx, s) in ball.sites().enumerate() {
        node_of[idx] = if source.contains(&s) {
            SOURCE
        } else if ball.on_boundary(s) {
            SINK
        } else {
            next += 1;
            next - 1
        };
    }

    let mut edges = Vec::new();
    let mut arc_of_bond: Vec<(Bond, usize)> = Vec::new();
    for e in ball.bonds() {
        let u = node_of[ball.index(e.a()).expect("in ball")];
        let v = node_of[ball.index(e.b()).expect("in ball")];
        if u == v {
            continue;
        }
        let c = field.capacity(e) as i64;
        if c == 0 {
            continue;
        }
        arc_of_bond.push((e, 2 * edges.len()));
        edges.push((u, v, c));
    }
    let mut net = Network::undirected(next as usize, &edges);
    let value = net.max_flow(SOURCE as usize, SINK as usize) as u64;

    let mut flow = FlowAssignment::zero(n);
    for (k, &(e, arc)) in arc_of_bond.iter().enumerate() {
        let f = edges[k].2 - net.residual[arc];
        if f != 0 {
            flow.set(e.a(), e.b(), f);
        }
    }

    let reach = net.reachable(SOURCE as usize);
    let bonds = minimal_cut_bonds(&ball, |idx| reach[node_of[idx] as usize]);
    let mincut = Cutset { bonds, source: source.clone() };
    debug_assert_eq!(mincut.capacity(field), value);
    Ok(MaxFlowResult { value, flow, mincut, box_used: n, stabilized: false })
}

/// Boundary of the complement of the sink-side component: a minimal cut
/// whenever the source side is connected.
fn minimal_cut_bonds(ball: &Ball, source_side: impl Fn(usize) -> bool) -> Vec<Bond> {
    let mut outer = vec![false; ball.len()];
    let mut stack: Vec<usize> = Vec::new();
    for (idx, s) in ball.sites().enumerate() {
        if ball.on_boundary(s) {
            outer[idx] = true;
            stack.push(idx);
        }
    }
    while let Some(idx) = stack.pop() {
        for m in neighbors(ball.site(idx)) {
            if let Some(j) = ball.index(m) {
                if !outer[j] && !source_side(j) {
                    outer[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    ball.bonds()
        .filter(|e| {
            let (i, j) = (ball.index(e.a()).expect("in ball"), ball.index(e.b()).expect("in ball"));
            outer[i] != outer[j]
        })
        .collect()
}

/// Removing `cut` leaves no path from `source` to `B_n` inside `V_n`.
pub fn cut_separates(cut: &Cutset, n: i64) -> bool {
    let ball = Ball::new(n);
    let removed: BTreeSet<Bond> = cut.bonds.iter().copied().collect();
    let mut seen = vec![false; ball.len()];
    let mut stack: Vec<Site> = cut.source.iter().copied().filter(|s| ball.contains(*s)).collect();
    for s in &stack {
        seen[ball.index(*s).expect("in ball")] = true;
    }
    while let Some(s) = stack.pop() {
        if ball.on_boundary(s) {
            return false;
        }
        for m in neighbors(s) {
            let Some(j) = ball.index(m) else { continue };
            if !seen[j] && !removed.contains(&Bond::new(s, m).expect("neighbours")) {
                seen[j] = true;
                stack.push(m);
            }
        }
    }
    true
}

/// Min cut to infinity by box doubling: boxes `n0, 2 n0, 4 n0, ...` with
/// `n0 = radius + 8`, stopping once two consecutive values agree and the
/// larger box's cut lies strictly inside the smaller box.
pub fn mincut_infinity<C: Capacities>(field: &C, source: &SiteSet) -> Result<MaxFlowResult, CutError> {
    mincut_infinity_with(field, source, DEFAULT_NMAX_FACTOR)
}

pub fn mincut_infinity_with<C: Capacities>(
    field: &C,
    source: &SiteSet,
    nmax_factor: i64,
) -> Result<MaxFlowResult, CutError> {
    let radius = source.l1_radius();
    let n_max = nmax_factor * radius.max(1);
    let mut n = radius + FIRST_BOX_MARGIN;
    let mut prev = truncated_maxflow(field, source, n)?;
    loop {
        let bigger = 2 * n;
        if bigger > n_max {
            return Err(CutError::BudgetExceeded { best: Box::new(prev) });
        }
        let mut cur = truncated_maxflow(field, source, bigger)?;
        debug_assert!(cur.value <= prev.value);
        if cur.value == prev.value && cur.mincut.l1_extent() < n {
            cur.stabilized = true;
            return Ok(cur);
        }
        prev = cur;
        n = bigger;
    }
}

/// Where a flow first breaks feasibility.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlowViolation {
    OutsideBox(Bond),
    CapacityExceeded { bond: Bond, flow: i64, capacity: u64 },
    Divergence { site: Site, divergence: i64 },
}

/// Checks `|f(e)| <= t_e` on every bond and zero divergence at every
/// interior site of the box outside `source`.
pub fn verify_flow<C: Capacities>(field: &C, flow: &FlowAssignment, source: &SiteSet) -> Result<(), FlowViolation> {
    let n = flow.box_radius;
    let mut div: BTreeMap<Site, i64> = BTreeMap::new();
    for (e, f) in flow.iter() {
        if e.a().l1_norm() > n || e.b().l1_norm() > n {
            return Err(FlowViolation::OutsideBox(e));
        }
        let capacity = field.capacity(e);
        if f.unsigned_abs() > capacity {
            return Err(FlowViolation::CapacityExceeded { bond: e, flow: f, capacity });
        }
        *div.entry(e.a()).or_default() += f;
        *div.entry(e.b()).or_default() -= f;
    }
    for (site, d) in div {
        if d != 0 && site.l1_norm() < n && !source.contains(&site) {
            return Err(FlowViolation::Divergence { site, divergence: d });
        }
    }
    Ok(())
}

/// `sum_{x in source} Div f(x)`.
pub fn flow_value(flow: &FlowAssignment, source: &SiteSet) -> i64 {
    source.iter().map(|&x| flow.divergence(x)).sum()
}

/// Orders the dual image of a minimal cutset into a closed dual path.
pub fn cutset_to_cycle(cut: &Cutset) -> Result<DualCycle, CutError> {
    let mut adjacency: BTreeMap<DualSite, Vec<DualSite>> = BTreeMap::new();
    for &e in &cut.bonds {
        let d = s_of_bond(e);
        adjacency.entry(d.a()).or_default().push(d.b());
        adjacency.entry(d.b()).or_default().push(d.a());
    }
    if adjacency.is_empty() || adjacency.values().any(|v| v.len() != 2) {
        return Err(CutError::NotACycle);
    }
    let (&start, first) = adjacency.iter().next().expect("nonempty");
    let mut sites = vec![start];
    let mut prev = start;
    let mut cur = *first.iter().min().expect("degree two");
    while cur != start {
        sites.push(cur);
        let nbrs = &adjacency[&cur];
        let next = if nbrs[0] == prev { nbrs[1] } else { nbrs[0] };
        prev = cur;
        cur = next;
    }
    sites.push(start);
    if sites.len() - 1 != cut.bonds.len() {
        return Err(CutError::NotACycle);
    }
    Ok(DualCycle { sites })
}

/// Minimum weight of a simple closed dual path enclosing every site of
/// `source`, over dual bonds whose primal bond lies in `V_radius`; found by
/// exhaustive depth-first enumeration with branch-and-bound.
pub fn brute_force_min_cycle<C: Capacities>(field: &C, source: &SiteSet, radius: i64) -> Result<u64, CutError> {
    if radius > ORACLE_MAX_RADIUS {
        return Err(CutError::OracleRadius(radius));
    }
    if let Some(s) = source.iter().find(|s| s.l1_norm() >= radius) {
        return Err(CutError::SourceTouchesBoundary(*s));
    }
    let usable = |d: DualBond| {
        let e = s_of_dual_bond(d);
        e.a().l1_norm() <= radius
            && e.b().l1_norm() <= radius
            && !(source.contains(&e.a()) && source.contains(&e.b()))
    };
    let mut adjacency: BTreeMap<DualSite, Vec<(DualSite, u64)>> = BTreeMap::new();
    let ball = Ball::new(radius);
    for e in ball.bonds() {
        let d = s_of_bond(e);
        if usable(d) {
            let w = field.capacity(e);
            adjacency.entry(d.a()).or_default().push((d.b(), w));
            adjacency.entry(d.b()).or_default().push((d.a(), w));
        }
    }

    // every enclosing cycle crosses the +x ray from `anchor`; enumerate by the
    // innermost crossing so each cycle is seen exactly once
    let anchor = source.first();
    let rays: Vec<DualBond> = (anchor.x..radius)
        .map(|x| s_of_bond(Bond::horizontal(Site::new(x, anchor.y))))
        .filter(|d| usable(*d))
        .collect();
    let mut best = u64::MAX;
    for (k, &ray) in rays.iter().enumerate() {
        let banned: BTreeSet<DualBond> = rays[..=k].iter().copied().collect();
        let (from, to) = (ray.a(), ray.b());
        let w_ray = field.capacity(s_of_dual_bond(ray));
        let lower = dual_distances(&adjacency, from, &banned);
        let mut search = CycleSearch {
            adjacency: &adjacency,
            banned: &banned,
            lower: &lower,
            target: from,
            source,
            best: &mut best,
            path: vec![from, to],
        };
        search.extend(w_ray);
    }
    Ok(best)
}

fn dual_distances(
    adjacency: &BTreeMap<DualSite, Vec<(DualSite, u64)>>,
    origin: DualSite,
    banned: &BTreeSet<DualBond>,
) -> BTreeMap<DualSite, u64> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let mut dist = BTreeMap::from([(origin, 0u64)]);
    let mut heap = BinaryHeap::from([Reverse((0u64, origin))]);
    while let Some(Reverse((d, v))) = heap.pop() {
        if d > dist[&v] {
            continue;
        }
        for &(w, c) in adjacency.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
            if banned.contains(&DualBond::new(v, w).expect("adjacent")) {
                continue;
            }
            let nd = d + c;
            if dist.get(&w).is_none_or(|&old| nd < old) {
                dist.insert(w, nd);
                heap.push(Reverse((nd, w)));
            }
        }
    }
    dist
}

struct CycleSearch<'a> {
    adjacency: &'a BTreeMap<DualSite, Vec<(DualSite, u64)>>,
    banned: &'a BTreeSet<DualBond>,
    lower: &'a BTreeMap<DualSite, u64>,
    target: DualSite,
    source: &'a SiteSet,
    best: &'a mut u64,
    path: Vec<DualSite>,
}

impl CycleSearch<'_> {
    fn extend(&mut self, weight: u64) {
        let v = *self.path.last().expect("nonempty");
        let Some(&rest) = self.lower.get(&v) else { return };
        if weight.saturating_add(rest) >= *self.best {
            return;
        }
        let mut options: Vec<(u64, DualSite, u64)> = Vec::new();
        for &(w, c) in &self.adjacency[&v] {
            if self.banned.contains(&DualBond::new(v, w).expect("adjacent")) {
                continue;
            }
            if w == self.target {
                if self.path.len() >= 3 {
                    options.push((c, w, c));
                }
                continue;
            }
            if self.path.contains(&w) {
                continue;
            }
            if let Some(&l) = self.lower.get(&w) {
                options.push((c + l, w, c));
            }
        }
        options.sort();
        for (_, w, c) in options {
            if w == self.target {
                let total = weight + c;
                if total < *self.best {
                    self.path.push(w);
                    let cycle = DualCycle { sites: self.path.clone() };
                    self.path.pop();
                    if self.source.iter().all(|&s| cycle.encloses(s)) {
                        *self.best = total;
                    }
                }
                continue;
            }
            self.path.push(w);
            self.extend(weight + c);
            self.path.pop();
        }
    }
}

/// Edge-disjoint open paths from the source to `B_n`.
#[derive(Clone, Debug)]
pub struct DisjointPaths {
    pub count: u64,
    pub paths: Vec<Vec<Site>>,
    pub maxflow: MaxFlowResult,
}

/// Bernoulli bond percolation with unit capacity on open bonds.
pub fn percolation_field(p_open: &Rational, seed: u64) -> Result<CapacityField, CutError> {
    if *p_open < Rational::zero() || *p_open > Rational::one() {
        return Err(CutError::BadProbability);
    }
    Ok(CapacityField::with_scale(DistributionSpec::Bernoulli(*p_open), seed, 1))
}

/// Maximal family of edge-disjoint open paths from `source` to `B_n`.
pub fn menger_disjoint_paths(p_open: &Rational, source: &SiteSet, n: i64, seed: u64) -> Result<DisjointPaths, CutError> {
    let field = percolation_field(p_open, seed)?;
    let maxflow = truncated_maxflow(&field, source, n)?;
    Ok(decompose(maxflow, source))
}

/// Disjoint open paths to infinity, with the box doubling of [`mincut_infinity`].
pub fn disjoint_paths_infinity(
    p_open: &Rational,
    source: &SiteSet,
    seed: u64,
    nmax_factor: i64,
) -> Result<DisjointPaths, CutError> {
    let field = percolation_field(p_open, seed)?;
    let maxflow = mincut_infinity_with(&field, source, nmax_factor)?;
    Ok(decompose(maxflow, source))
}

/// Splits a flow on a unit-capacity field into paths from the source to the
/// boundary, discarding circulations.
pub fn decompose(maxflow: MaxFlowResult, source: &SiteSet) -> DisjointPaths {
    let n = maxflow.flow.box_radius;
    let mut out: BTreeMap<Site, Vec<Site>> = BTreeMap::new();
    for (e, f) in maxflow.flow.iter() {
        let (from, to) = if f > 0 { (e.a(), e.b()) } else { (e.b(), e.a()) };
        for _ in 0..f.unsigned_abs() {
            out.entry(from).or_default().push(to);
        }
    }
    // pop from the back, so reverse to consume in lexicographic order
    for v in out.values_mut() {
        v.reverse();
    }
    let mut paths = Vec::new();
    for &start in source.iter() {
        while out.get(&start).is_some_and(|v| !v.is_empty()) {
            let mut path = vec![start];
            let mut cur = start;
            while cur.l1_norm() < n {
                let next = out.get_mut(&cur).and_then(Vec::pop).expect("flow is conserved off the source");
                if let Some(pos) = path.iter().position(|&s| s == next) {
                    path.truncate(pos + 1);
                } else if source.contains(&next) {
                    path = vec![next];
                } else {
                    path.push(next);
                }
                cur = next;
            }
            paths.push(path);
        }
    }
    let count = maxflow.value;
    DisjointPaths { count, paths, maxflow }
}
