//! The primal square lattice, its dual shifted by (1/2, 1/2), the bond
//! involution between them, and discretization of scaled polygons.
//!
//! A dual site `(i, j)` stands for the plane point `(i + 1/2, j + 1/2)`, so all
//! coordinates stay integral.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::LatticeError;
use crate::geometry::ConvexPolygon;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Site {
    pub x: i64,
    pub y: i64,
}

impl Site {
    pub const ORIGIN: Site = Site { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Site { x, y }
    }

    pub fn l1_norm(self) -> i64 {
        self.x.abs() + self.y.abs()
    }

    pub fn l1_dist(self, other: Site) -> i64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    pub fn translate(self, dx: i64, dy: i64) -> Site {
        Site::new(self.x + dx, self.y + dy)
    }
}

/// Represents the plane point `(i + 1/2, j + 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DualSite {
    pub i: i64,
    pub j: i64,
}

impl DualSite {
    pub const fn new(i: i64, j: i64) -> Self {
        DualSite { i, j }
    }

    /// Coordinates of the represented point.
    pub fn point(self) -> (f64, f64) {
        (self.i as f64 + 0.5, self.j as f64 + 0.5)
    }

    /// Twice the represented coordinates, which are always odd integers.
    pub fn doubled(self) -> (i64, i64) {
        (2 * self.i + 1, 2 * self.j + 1)
    }
}

/// Unoriented nearest-neighbour bond, endpoints in lexicographic order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bond {
    a: Site,
    b: Site,
}

impl Bond {
    pub fn new(p: Site, q: Site) -> Result<Self, LatticeError> {
        if p.l1_dist(q) != 1 {
            return Err(LatticeError::NotAdjacent(p, q));
        }
        Ok(if p < q { Bond { a: p, b: q } } else { Bond { a: q, b: p } })
    }

    /// Bond from `s` to `s + e1`.
    pub fn horizontal(s: Site) -> Self {
        Bond { a: s, b: s.translate(1, 0) }
    }

    /// Bond from `s` to `s + e2`.
    pub fn vertical(s: Site) -> Self {
        Bond { a: s, b: s.translate(0, 1) }
    }

    pub fn a(self) -> Site {
        self.a
    }

    pub fn b(self) -> Site {
        self.b
    }

    pub fn is_horizontal(self) -> bool {
        self.a.y == self.b.y
    }

    pub fn contains(self, s: Site) -> bool {
        self.a == s || self.b == s
    }

    /// The endpoint that is not `s`.
    pub fn other(self, s: Site) -> Site {
        if self.a == s {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DualBond {
    a: DualSite,
    b: DualSite,
}

impl DualBond {
    pub fn new(p: DualSite, q: DualSite) -> Result<Self, LatticeError> {
        if (p.i - q.i).abs() + (p.j - q.j).abs() != 1 {
            return Err(LatticeError::DualNotAdjacent(p, q));
        }
        Ok(if p < q { DualBond { a: p, b: q } } else { DualBond { a: q, b: p } })
    }

    pub fn a(self) -> DualSite {
        self.a
    }

    pub fn b(self) -> DualSite {
        self.b
    }

    pub fn is_vertical(self) -> bool {
        self.a.i == self.b.i
    }

    pub fn other(self, s: DualSite) -> DualSite {
        if self.a == s {
            self.b
        } else {
            self.a
        }
    }
}

/// The four nearest neighbours in the order E, N, W, S.
pub fn neighbors(s: Site) -> [Site; 4] {
    [s.translate(1, 0), s.translate(0, 1), s.translate(-1, 0), s.translate(0, -1)]
}

pub fn dual_neighbors(d: DualSite) -> [DualSite; 4] {
    [
        DualSite::new(d.i + 1, d.j),
        DualSite::new(d.i, d.j + 1),
        DualSite::new(d.i - 1, d.j),
        DualSite::new(d.i, d.j - 1),
    ]
}

/// The dual bond crossing `e`: together with the endpoints of `e` its endpoints
/// span a unit square.
pub fn s_of_bond(e: Bond) -> DualBond {
    let Site { x, y } = e.a;
    if e.is_horizontal() {
        // crossing segment x + 1/2, y - 1/2 .. y + 1/2
        DualBond { a: DualSite::new(x, y - 1), b: DualSite::new(x, y) }
    } else {
        DualBond { a: DualSite::new(x - 1, y), b: DualSite::new(x, y) }
    }
}

pub fn s_of_dual_bond(d: DualBond) -> Bond {
    let DualSite { i, j } = d.a;
    if d.is_vertical() {
        Bond::horizontal(Site::new(i, j + 1))
    } else {
        Bond::vertical(Site::new(i + 1, j))
    }
}

/// The dual site `x` with `z - x` in `[-1/2, 1/2)^2`.
pub fn int_of_point(z: (f64, f64)) -> DualSite {
    DualSite::new(z.0.floor() as i64, z.1.floor() as i64)
}

/// Exact variant of [`int_of_point`] for rational coordinates.
pub fn int_of_rational_point(x: &Rational, y: &Rational) -> DualSite {
    DualSite::new(x.floor().to_integer() as i64, y.floor().to_integer() as i64)
}

/// Axis-aligned rectangle of sites, bounds inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Site,
    pub max: Site,
}

impl BoundingBox {
    pub fn new(min: Site, max: Site) -> Self {
        BoundingBox {
            min: Site::new(min.x.min(max.x), min.y.min(max.y)),
            max: Site::new(min.x.max(max.x), min.y.max(max.y)),
        }
    }

    /// Square `[-r, r]^2` centred at `c`.
    pub fn around(c: Site, r: i64) -> Self {
        BoundingBox::new(c.translate(-r, -r), c.translate(r, r))
    }

    pub fn contains(&self, s: Site) -> bool {
        (self.min.x..=self.max.x).contains(&s.x) && (self.min.y..=self.max.y).contains(&s.y)
    }

    pub fn width(&self) -> i64 {
        self.max.x - self.min.x + 1
    }

    pub fn height(&self) -> i64 {
        self.max.y - self.min.y + 1
    }

    pub fn inflate(&self, by: i64) -> Self {
        BoundingBox::new(self.min.translate(-by, -by), self.max.translate(by, by))
    }

    pub fn union(&self, other: &BoundingBox) -> Self {
        BoundingBox::new(
            Site::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            Site::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        )
    }
}

/// A finite, nonempty set of sites.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteSet {
    members: BTreeSet<Site>,
    bbox: BoundingBox,
}

impl SiteSet {
    pub fn new<I: IntoIterator<Item = Site>>(sites: I) -> Result<Self, LatticeError> {
        let members: BTreeSet<Site> = sites.into_iter().collect();
        let first = *members.iter().next().ok_or(LatticeError::EmptyRegion)?;
        let bbox = members
            .iter()
            .fold(BoundingBox::new(first, first), |b, s| b.union(&BoundingBox::new(*s, *s)));
        Ok(SiteSet { members, bbox })
    }

    pub fn singleton(s: Site) -> Self {
        SiteSet { members: BTreeSet::from([s]), bbox: BoundingBox::new(s, s) }
    }

    /// The block `{-k..k}^2`.
    pub fn block(k: i64) -> Self {
        let k = k.abs();
        let sites = (-k..=k).flat_map(|x| (-k..=k).map(move |y| Site::new(x, y)));
        SiteSet::new(sites).expect("block is nonempty")
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, s: &Site) -> bool {
        self.members.contains(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Site> + '_ {
        self.members.iter()
    }

    pub fn bounding_box(&self) -> BoundingBox {
        self.bbox
    }

    /// Largest l1 norm of a member.
    pub fn l1_radius(&self) -> i64 {
        self.members.iter().map(|s| s.l1_norm()).max().unwrap_or(0)
    }

    pub fn first(&self) -> Site {
        *self.members.iter().next().expect("site sets are nonempty")
    }

    pub fn translate(&self, dx: i64, dy: i64) -> Self {
        SiteSet::new(self.members.iter().map(|s| s.translate(dx, dy))).expect("nonempty")
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.members.is_subset(&other.members)
    }

    /// True when the members form one nearest-neighbour connected component.
    pub fn is_connected(&self) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.first()];
        seen.insert(self.first());
        while let Some(s) = stack.pop() {
            for n in neighbors(s) {
                if self.members.contains(&n) && seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        seen.len() == self.members.len()
    }
}

/// All integer points inside or on the boundary of `n * polygon`.
pub fn sites_in_scaled_polygon(polygon: &ConvexPolygon, n: u32) -> Result<SiteSet, LatticeError> {
    let scaled = polygon.scale(&Rational::from_integer(n as i128)).map_err(|_| LatticeError::EmptyRegion)?;
    let (lo_x, lo_y, hi_x, hi_y) = scaled.bounds();
    let (x0, x1) = (lo_x.ceil().to_integer() as i64, hi_x.floor().to_integer() as i64);
    let (y0, y1) = (lo_y.ceil().to_integer() as i64, hi_y.floor().to_integer() as i64);
    let mut sites = Vec::new();
    for x in x0..=x1 {
        for y in y0..=y1 {
            if scaled.contains_integer_point(x, y) {
                sites.push(Site::new(x, y));
            }
        }
    }
    SiteSet::new(sites)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexPolygon, Point};
    use proptest::prelude::*;

    fn square(r: i128) -> ConvexPolygon {
        ConvexPolygon::from_integer_points(&[(-r, -r), (r, -r), (r, r), (-r, r)]).unwrap()
    }

    #[test]
    fn neighbors_in_fixed_order() {
        let n = neighbors(Site::new(0, 0));
        assert_eq!(n, [Site::new(1, 0), Site::new(0, 1), Site::new(-1, 0), Site::new(0, -1)]);
        let n = neighbors(Site::new(2, -3));
        assert_eq!(n, [Site::new(3, -3), Site::new(2, -2), Site::new(1, -3), Site::new(2, -4)]);
        for m in neighbors(Site::ORIGIN) {
            assert!(neighbors(m).contains(&Site::ORIGIN));
        }
    }

    #[test]
    fn bond_rejects_non_neighbours() {
        assert!(Bond::new(Site::new(0, 0), Site::new(1, 1)).is_err());
        assert!(Bond::new(Site::new(0, 0), Site::new(0, 0)).is_err());
        let e = Bond::new(Site::new(1, 0), Site::new(0, 0)).unwrap();
        assert_eq!(e.a(), Site::new(0, 0));
    }

    #[test]
    fn involution_on_examples() {
        let e = Bond::new(Site::new(0, 0), Site::new(1, 0)).unwrap();
        let d = s_of_bond(e);
        assert_eq!(d.a().point(), (0.5, -0.5));
        assert_eq!(d.b().point(), (0.5, 0.5));
        assert_eq!(s_of_dual_bond(d), e);

        let e = Bond::new(Site::new(0, 0), Site::new(0, 1)).unwrap();
        let d = s_of_bond(e);
        assert_eq!(d.a().point(), (-0.5, 0.5));
        assert_eq!(d.b().point(), (0.5, 0.5));
        assert_eq!(s_of_dual_bond(d), e);
    }

    #[test]
    fn int_of_point_half_open() {
        assert_eq!(int_of_point((0.5, 0.5)).point(), (0.5, 0.5));
        assert_eq!(int_of_point((0.0, 0.0)).point(), (0.5, 0.5));
        assert_eq!(int_of_point((3.2, -1.9)).point(), (3.5, -1.5));
        // upper edge of the half-open box rounds up
        assert_eq!(int_of_point((1.0, -1.0)).point(), (1.5, -0.5));
        assert_eq!(
            int_of_rational_point(&Rational::new(-1, 2), &Rational::new(7, 2)),
            DualSite::new(-1, 3)
        );
    }

    #[test]
    fn scaled_square_counts() {
        let p = square(1);
        assert_eq!(sites_in_scaled_polygon(&p, 1).unwrap().len(), 9);
        assert_eq!(sites_in_scaled_polygon(&p, 3).unwrap(), SiteSet::block(3));
        for n in 1..12u32 {
            let k = 2 * n as usize + 1;
            assert_eq!(sites_in_scaled_polygon(&p, n).unwrap().len(), k * k);
        }
    }

    #[test]
    fn scaled_triangle_matches_brute_force() {
        let tri = ConvexPolygon::from_integer_points(&[(0, 0), (1, 0), (0, 1)]).unwrap();
        let got: Vec<Site> = sites_in_scaled_polygon(&tri, 2).unwrap().iter().copied().collect();
        // brute force over the bounding box: x, y >= 0 and x + y <= 2
        let mut want = Vec::new();
        for x in -1..=3 {
            for y in -1..=3 {
                if x >= 0 && y >= 0 && x + y <= 2 {
                    want.push(Site::new(x, y));
                }
            }
        }
        want.sort();
        assert_eq!(got, want);
        assert_eq!(got.len(), 6);
    }

    #[test]
    fn empty_region_is_an_error() {
        let tiny = ConvexPolygon::new(vec![
            Point::new(Rational::new(1, 10), Rational::new(1, 10)),
            Point::new(Rational::new(2, 10), Rational::new(1, 10)),
            Point::new(Rational::new(1, 10), Rational::new(2, 10)),
        ])
        .unwrap();
        assert_eq!(sites_in_scaled_polygon(&tiny, 1), Err(LatticeError::EmptyRegion));
    }

    #[test]
    fn discretization_is_connected_and_monotone() {
        let tri = ConvexPolygon::from_integer_points(&[(-2, -1), (3, -1), (0, 2)]).unwrap();
        let mut prev = sites_in_scaled_polygon(&tri, 1).unwrap();
        for n in 2..8 {
            let cur = sites_in_scaled_polygon(&tri, n).unwrap();
            assert!(cur.is_connected());
            assert!(prev.is_subset(&cur));
            prev = cur;
        }
    }

    proptest! {
        #[test]
        fn s_is_an_involution(x in -1000i64..1000, y in -1000i64..1000, horizontal in any::<bool>()) {
            let s = Site::new(x, y);
            let e = if horizontal { Bond::horizontal(s) } else { Bond::vertical(s) };
            let d = s_of_bond(e);
            prop_assert_eq!(s_of_dual_bond(d), e);
            // a, i, b, j span a unit square: diagonals of length sqrt 2 in doubled coordinates
            let (pa, pb) = ((2 * e.a().x, 2 * e.a().y), (2 * e.b().x, 2 * e.b().y));
            let (qa, qb) = (d.a().doubled(), d.b().doubled());
            let sq = |p: (i64, i64), q: (i64, i64)| (p.0 - q.0).pow(2) + (p.1 - q.1).pow(2);
            prop_assert_eq!(sq(pa, pb), 4);
            prop_assert_eq!(sq(qa, qb), 4);
            for p in [pa, pb] {
                for q in [qa, qb] {
                    prop_assert_eq!(sq(p, q), 2);
                }
            }
        }

        #[test]
        fn dual_s_is_an_involution(i in -1000i64..1000, j in -1000i64..1000, vertical in any::<bool>()) {
            let a = DualSite::new(i, j);
            let b = if vertical { DualSite::new(i, j + 1) } else { DualSite::new(i + 1, j) };
            let d = DualBond::new(a, b).unwrap();
            prop_assert_eq!(s_of_bond(s_of_dual_bond(d)), d);
        }

        #[test]
        fn int_of_point_lands_in_half_open_box(x in -1.0e6f64..1.0e6, y in -1.0e6f64..1.0e6) {
            let (cx, cy) = int_of_point((x, y)).point();
            prop_assert!(x - cx >= -0.5 && x - cx < 0.5);
            prop_assert!(y - cy >= -0.5 && y - cy < 0.5);
        }
    }
}
