//! First-passage distances on the primal and dual lattices and empirical
//! estimation of the time constant.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{Capacities, CapacityField, DistributionSpec};
use crate::error::FppError;
use crate::geometry::primitive_decomposition;
use crate::lattice::{s_of_dual_bond, BoundingBox, Bond, DualBond, DualSite, Site};
use crate::rational::{to_f64, Rational};
use crate::seed::derive_seed;

/// Longest `n * |v|_1` accepted by [`estimate_mu`].
pub const MAX_ESTIMATION_LENGTH: i64 = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    Primal,
    /// Dual bond `d` carries the capacity of the primal bond `s(d)`.
    Dual,
}

/// A lattice whose bond passage times are capacities of a field.
#[derive(Clone, Debug)]
pub struct PassageLattice<C> {
    pub which: Which,
    pub field: C,
}

impl<C: Capacities> PassageLattice<C> {
    pub fn primal(field: C) -> Self {
        PassageLattice { which: Which::Primal, field }
    }

    pub fn dual(field: C) -> Self {
        PassageLattice { which: Which::Dual, field }
    }

    /// Passage time of the bond between two neighbouring vertices, given as raw
    /// coordinates (a [`Site`] or a [`DualSite`] depending on `which`).
    pub fn weight(&self, p: (i64, i64), q: (i64, i64)) -> u64 {
        match self.which {
            Which::Primal => {
                let e = Bond::new(Site::new(p.0, p.1), Site::new(q.0, q.1)).expect("neighbours");
                self.field.capacity(e)
            }
            Which::Dual => {
                let d = DualBond::new(DualSite::new(p.0, p.1), DualSite::new(q.0, q.1)).expect("neighbours");
                self.field.capacity(s_of_dual_bond(d))
            }
        }
    }

    /// Shortest-path weight from `a` to `b` over vertices of `region`
    /// (coordinates interpreted per `which`).
    pub fn distance(&self, a: (i64, i64), b: (i64, i64), region: BoundingBox) -> Result<u64, FppError> {
        for v in [a, b] {
            if !region.contains(Site::new(v.0, v.1)) {
                return Err(FppError::OutsideBox(v));
            }
        }
        grid_dijkstra(a, b, region, |_| true, |p, q| self.weight(p, q)).ok_or(FppError::Unreachable)
    }

    pub fn site_distance(&self, a: Site, b: Site, region: BoundingBox) -> Result<u64, FppError> {
        debug_assert_eq!(self.which, Which::Primal);
        self.distance((a.x, a.y), (b.x, b.y), region)
    }

    /// Total passage time along consecutive vertices.
    pub fn path_weight(&self, path: &[(i64, i64)]) -> u64 {
        path.windows(2).map(|w| self.weight(w[0], w[1])).sum()
    }

    /// Minimal time to cross `Cyl_z(xhat, r, h)` between the lattice points
    /// closest to its two end centres, using only bonds inside the cylinder.
    pub fn cylinder_crossing_time(
        &self,
        z: (f64, f64),
        xhat: (f64, f64),
        r: f64,
        h: f64,
    ) -> Result<CrossingTime, FppError> {
        let norm = (xhat.0 * xhat.0 + xhat.1 * xhat.1).sqrt();
        if !(r >= 1.0 && h >= 1.0 && (norm - 1.0).abs() < 1e-9) {
            return Err(FppError::BadCylinder);
        }
        // plane coordinates of a vertex
        let offset = if self.which == Which::Dual { 0.5 } else { 0.0 };
        let coords = move |p: (i64, i64)| (p.0 as f64 + offset, p.1 as f64 + offset);
        let inside = |p: (i64, i64)| {
            let (px, py) = coords(p);
            let (dx, dy) = (px - z.0, py - z.1);
            let along = dx * xhat.0 + dy * xhat.1;
            let across = (dx - along * xhat.0).hypot(dy - along * xhat.1);
            across <= r + CYLINDER_SLACK && along >= -CYLINDER_SLACK && along <= h + CYLINDER_SLACK
        };
        let end = (z.0 + h * xhat.0, z.1 + h * xhat.1);
        let (nx, ny) = (-xhat.1, xhat.0);
        let corners = [
            (z.0 + r * nx, z.1 + r * ny),
            (z.0 - r * nx, z.1 - r * ny),
            (end.0 + r * nx, end.1 + r * ny),
            (end.0 - r * nx, end.1 - r * ny),
        ];
        let lo_x = corners.iter().map(|c| c.0).fold(f64::INFINITY, f64::min) - offset;
        let hi_x = corners.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max) - offset;
        let lo_y = corners.iter().map(|c| c.1).fold(f64::INFINITY, f64::min) - offset;
        let hi_y = corners.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max) - offset;
        let region = BoundingBox::new(
            Site::new(lo_x.floor() as i64 - 1, lo_y.floor() as i64 - 1),
            Site::new(hi_x.ceil() as i64 + 1, hi_y.ceil() as i64 + 1),
        );

        let closest = |target: (f64, f64)| {
            let mut best: Option<((i64, i64), f64)> = None;
            for x in region.min.x..=region.max.x {
                for y in region.min.y..=region.max.y {
                    let p = (x, y);
                    if !inside(p) {
                        continue;
                    }
                    let (px, py) = coords(p);
                    let d = (px - target.0).powi(2) + (py - target.1).powi(2);
                    // scan order is lexicographic, so ties keep the smallest point
                    match best {
                        Some((_, bd)) if d >= bd - 1e-12 => {}
                        _ => best = Some((p, d)),
                    }
                }
            }
            best.map(|(p, _)| p)
        };
        let start = closest(z).ok_or(FppError::EmptyCylinder)?;
        let finish = closest(end).ok_or(FppError::EmptyCylinder)?;
        let time = grid_dijkstra(start, finish, region, inside, |p, q| self.weight(p, q))
            .ok_or(FppError::Unreachable)?;
        Ok(CrossingTime { time, start, finish })
    }
}

const CYLINDER_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrossingTime {
    /// Micro-units.
    pub time: u64,
    pub start: (i64, i64),
    pub finish: (i64, i64),
}

/// Dijkstra over the nearest-neighbour grid restricted to `region` and `allowed`.
fn grid_dijkstra(
    source: (i64, i64),
    target: (i64, i64),
    region: BoundingBox,
    allowed: impl Fn((i64, i64)) -> bool,
    weight: impl Fn((i64, i64), (i64, i64)) -> u64,
) -> Option<u64> {
    if source == target {
        return Some(0);
    }
    let (w, h) = (region.width(), region.height());
    let index = |p: (i64, i64)| ((p.0 - region.min.x) * h + (p.1 - region.min.y)) as usize;
    let mut dist = vec![u64::MAX; (w * h) as usize];
    let mut heap = BinaryHeap::new();
    dist[index(source)] = 0;
    heap.push(Reverse((0u64, source)));
    while let Some(Reverse((d, p))) = heap.pop() {
        if p == target {
            return Some(d);
        }
        if d > dist[index(p)] {
            continue;
        }
        for q in [(p.0 + 1, p.1), (p.0, p.1 + 1), (p.0 - 1, p.1), (p.0, p.1 - 1)] {
            if !region.contains(Site::new(q.0, q.1)) || !allowed(q) {
                continue;
            }
            let nd = d + weight(p, q);
            let slot = &mut dist[index(q)];
            if nd < *slot {
                *slot = nd;
                heap.push(Reverse((nd, q)));
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MuOrigin {
    /// Sample mean over independent replicates.
    Sampled,
    /// Exact value of a degenerate law.
    ClosedForm,
}

/// Time constant in one direction, in micro-units per copy of `direction`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuEstimate {
    pub direction: (i64, i64),
    pub n_used: u32,
    pub replicates: u32,
    pub mean: Rational,
    pub stderr: f64,
    pub origin: MuOrigin,
}

fn is_primitive(v: (i64, i64)) -> bool {
    v != (0, 0) && v.0.abs().gcd(&v.1.abs()) == 1
}

/// Search box for `d(0, n v)`: the segment's bounding box grown by half its longest side.
pub fn estimation_box(v: (i64, i64), n: u32) -> BoundingBox {
    let end = Site::new(v.0 * n as i64, v.1 * n as i64);
    let seg = BoundingBox::new(Site::ORIGIN, end);
    let extent = v.0.abs().max(v.1.abs()) * n as i64;
    seg.inflate((extent + 1) / 2)
}

/// Mean and standard error of `d(0, n v) / n` over `reps` independent fields.
pub fn estimate_mu(
    spec: &DistributionSpec,
    v: (i64, i64),
    n: u32,
    reps: u32,
    seed: u64,
    scale: u64,
) -> Result<MuEstimate, FppError> {
    if !is_primitive(v) {
        return Err(FppError::NotPrimitive(v));
    }
    if n < 4 || reps < 2 {
        return Err(FppError::BadSampleSize { n, reps });
    }
    if n as i64 * (v.0.abs() + v.1.abs()) > MAX_ESTIMATION_LENGTH {
        return Err(FppError::DirectionTooLong(v));
    }
    let region = estimation_box(v, n);
    let end = (v.0 * n as i64, v.1 * n as i64);
    let samples: Vec<u64> = (1..=reps as u64)
        .into_par_iter()
        .map(|r| {
            let field = CapacityField::with_scale(spec.clone(), derive_seed(seed, &[r]), scale);
            PassageLattice::primal(field).distance((0, 0), end, region)
        })
        .collect::<Result<_, _>>()?;
    Ok(summarize(v, n, &samples))
}

fn summarize(v: (i64, i64), n: u32, samples: &[u64]) -> MuEstimate {
    let reps = samples.len() as i128;
    let per_copy: Vec<Rational> =
        samples.iter().map(|&d| Rational::new(d as i128, n as i128)).collect();
    let mean = per_copy.iter().sum::<Rational>() / Rational::from_integer(reps);
    let ss: Rational = per_copy.iter().map(|x| (x - mean) * (x - mean)).sum();
    let var_of_mean = ss / Rational::from_integer(reps * (reps - 1));
    let stderr = if var_of_mean.is_zero() { 0.0 } else { to_f64(&var_of_mean).sqrt() };
    MuEstimate {
        direction: v,
        n_used: n,
        replicates: reps as u32,
        mean,
        stderr,
        origin: MuOrigin::Sampled,
    }
}

/// The four rotations of `p` by multiples of 90 degrees, starting with `p`.
fn rotations(p: (i64, i64)) -> [(i64, i64); 4] {
    [p, (-p.0, -p.1), (-p.1, p.0), (p.1, -p.0)]
}

/// Time-constant estimates keyed by primitive direction.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MuTable {
    entries: BTreeMap<(i64, i64), MuEstimate>,
}

impl MuTable {
    pub fn new() -> Self {
        MuTable::default()
    }

    pub fn insert(&mut self, estimate: MuEstimate) {
        self.entries.insert(estimate.direction, estimate);
    }

    pub fn entries(&self) -> impl Iterator<Item = &MuEstimate> + '_ {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact table for the law `Constant(c)`, where the time constant is `c |.|_1`.
    pub fn closed_form_constant(c: &Rational, scale: u64, directions: &[(i64, i64)]) -> Self {
        let mut table = MuTable::new();
        for &d in directions {
            if table.lookup(d).is_some() {
                continue;
            }
            let l1 = Rational::from_integer((d.0.abs() + d.1.abs()) as i128);
            table.insert(MuEstimate {
                direction: d,
                n_used: 0,
                replicates: 0,
                mean: c * l1 * Rational::from_integer(scale as i128),
                stderr: 0.0,
                origin: MuOrigin::ClosedForm,
            });
        }
        table
    }

    /// Table covering `directions` up to rotation; constant laws use the closed form.
    pub fn estimate_for_directions(
        spec: &DistributionSpec,
        directions: &[(i64, i64)],
        n: u32,
        reps: u32,
        seed: u64,
        scale: u64,
    ) -> Result<Self, FppError> {
        if let DistributionSpec::Constant(c) = spec {
            return Ok(MuTable::closed_form_constant(c, scale, directions));
        }
        let mut table = MuTable::new();
        for &d in directions {
            if table.lookup(d).is_some() {
                continue;
            }
            let stream = derive_seed(seed, &[d.0 as u64, d.1 as u64]);
            table.insert(estimate_mu(spec, d, n, reps, stream, scale)?);
        }
        Ok(table)
    }

    /// Entry whose direction is a 90-degree rotation of the primitive `p`.
    pub fn lookup(&self, p: (i64, i64)) -> Option<&MuEstimate> {
        rotations(p).iter().find_map(|r| self.entries.get(r))
    }

    /// `mu(w)` for an integer vector, in micro-units.
    pub fn mu_eval(&self, w: (i64, i64)) -> Result<Rational, FppError> {
        if w == (0, 0) {
            return Ok(Rational::zero());
        }
        let g = w.0.abs().gcd(&w.1.abs());
        let p = (w.0 / g, w.1 / g);
        let entry = self.lookup(p).ok_or(FppError::MissingDirection(p))?;
        Ok(entry.mean * Rational::from_integer(g as i128))
    }

    /// `mu(w)` for a rational vector, in micro-units.
    pub fn mu_eval_vector(&self, dx: &Rational, dy: &Rational) -> Result<Rational, FppError> {
        let (p, t) = primitive_decomposition(dx, dy);
        if p == (0, 0) {
            return Ok(Rational::zero());
        }
        let entry = self.lookup(p).ok_or(FppError::MissingDirection(p))?;
        Ok(entry.mean * t)
    }

    fn normalized(&self) -> impl Iterator<Item = Rational> + '_ {
        self.entries.values().map(|e| {
            let l1 = (e.direction.0.abs() + e.direction.1.abs()) as i128;
            e.mean / Rational::from_integer(l1)
        })
    }

    /// Smallest tabulated value on the l1 unit sphere.
    pub fn mu_min(&self) -> Option<Rational> {
        self.normalized().min()
    }

    pub fn mu_max(&self) -> Option<Rational> {
        self.normalized().max()
    }

    /// `direction_x, direction_y, n, reps, mean_micro, stderr_micro` with a header row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["direction_x", "direction_y", "n", "reps", "mean_micro", "stderr_micro"])
            .expect("in-memory write");
        for e in self.entries.values() {
            w.write_record([
                e.direction.0.to_string(),
                e.direction.1.to_string(),
                e.n_used.to_string(),
                e.replicates.to_string(),
                format_micro(&e.mean),
                e.stderr.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

/// Integer micro-units print verbatim, fractional ones as decimals.
pub fn format_micro(r: &Rational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        r.to_f64().map(|f| f.to_string()).unwrap_or_else(|| to_f64(r).to_string())
    }
}

/// `mu(v) / |v|_1` of an estimate, in capacity units.
pub fn normalized_mean_units(e: &MuEstimate, scale: u64) -> f64 {
    let l1 = (e.direction.0.abs() + e.direction.1.abs()) as f64;
    to_f64(&e.mean) / l1 / scale as f64
}
