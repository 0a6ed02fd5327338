//! Convex polygons with exact rational vertices and the boundary functional
//! `I(P) = sum_i mu(s_i - s_{i+1})`, the mu-length of the polygon.

use std::fmt;
use std::path::Path;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{FppError, GeometryError, ParseError};
use crate::fpp::MuTable;
use crate::rational::{format_rational, parse_rational, to_f64, Rational};

/// Denominator used when rounding trigonometric vertices.
pub const VERTEX_DENOMINATOR: i128 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }

    pub fn from_integers(x: i128, y: i128) -> Self {
        Point::new(Rational::from_integer(x), Rational::from_integer(y))
    }

    fn sub(&self, o: &Point) -> (Rational, Rational) {
        (self.x - o.x, self.y - o.y)
    }
}

/// `(b - a) x (c - a)`; positive for a left turn.
fn orient(a: &Point, b: &Point, c: &Point) -> Rational {
    let (ux, uy) = b.sub(a);
    let (vx, vy) = c.sub(a);
    ux * vy - uy * vx
}

/// Counterclockwise, strictly convex polygon; the closing side runs from the
/// last vertex back to the first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        let k = vertices.len();
        if k < 3 {
            return Err(GeometryError::TooFewVertices(k));
        }
        // every other vertex strictly left of every side: convex position,
        // counterclockwise, no collinear triples, winding number one
        for i in 0..k {
            let (a, b) = (&vertices[i], &vertices[(i + 1) % k]);
            for (j, c) in vertices.iter().enumerate() {
                if j != i && j != (i + 1) % k && orient(a, b, c) <= Rational::zero() {
                    return Err(GeometryError::NotStrictlyConvex((i + 1) % k));
                }
            }
        }
        Ok(ConvexPolygon { vertices })
    }

    pub fn from_integer_points(points: &[(i128, i128)]) -> Result<Self, GeometryError> {
        ConvexPolygon::new(points.iter().map(|&(x, y)| Point::from_integers(x, y)).collect())
    }

    /// The square with vertices `(+-r, +-r)`.
    pub fn square(r: Rational) -> Result<Self, GeometryError> {
        if r <= Rational::zero() {
            return Err(GeometryError::NonPositiveScale);
        }
        let m = -r;
        ConvexPolygon::new(vec![
            Point::new(m, m),
            Point::new(r, m),
            Point::new(r, r),
            Point::new(m, r),
        ])
    }

    /// Convex hull of the given points with collinear points removed.
    pub fn hull(points: &[Point]) -> Result<Self, GeometryError> {
        let mut pts: Vec<Point> = points.to_vec();
        pts.sort_by_key(|p| (p.x, p.y));
        pts.dedup();
        if pts.len() < 3 {
            return Err(GeometryError::TooFewVertices(pts.len()));
        }
        let mut lower: Vec<Point> = Vec::new();
        for p in &pts {
            while lower.len() >= 2 && orient(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= Rational::zero() {
                lower.pop();
            }
            lower.push(p.clone());
        }
        let mut upper: Vec<Point> = Vec::new();
        for p in pts.iter().rev() {
            while upper.len() >= 2 && orient(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= Rational::zero() {
                upper.pop();
            }
            upper.push(p.clone());
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        ConvexPolygon::new(lower)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Side vectors `s_i - s_{i+1}`.
    pub fn side_vectors(&self) -> Vec<(Rational, Rational)> {
        let k = self.vertices.len();
        (0..k).map(|i| self.vertices[i].sub(&self.vertices[(i + 1) % k])).collect()
    }

    /// Primitive integer directions of all sides.
    pub fn side_directions(&self) -> Vec<(i64, i64)> {
        self.side_vectors().iter().map(|(dx, dy)| primitive_decomposition(dx, dy).0).collect()
    }

    pub fn scale(&self, lambda: &Rational) -> Result<Self, GeometryError> {
        if *lambda <= Rational::zero() {
            return Err(GeometryError::NonPositiveScale);
        }
        Ok(ConvexPolygon {
            vertices: self.vertices.iter().map(|p| Point::new(p.x * lambda, p.y * lambda)).collect(),
        })
    }

    /// Rotation by 90 degrees counterclockwise about the origin.
    pub fn rotate_quarter(&self) -> Self {
        ConvexPolygon { vertices: self.vertices.iter().map(|p| Point::new(-p.y, p.x)).collect() }
    }

    /// `(min x, min y, max x, max y)`.
    pub fn bounds(&self) -> (Rational, Rational, Rational, Rational) {
        let v = &self.vertices;
        let min_x = v.iter().map(|p| p.x).min().expect("nonempty");
        let min_y = v.iter().map(|p| p.y).min().expect("nonempty");
        let max_x = v.iter().map(|p| p.x).max().expect("nonempty");
        let max_y = v.iter().map(|p| p.y).max().expect("nonempty");
        (min_x, min_y, max_x, max_y)
    }

    /// Each side as an integer half-plane `a x + b y + c >= 0` holding on the polygon.
    pub fn integer_half_planes(&self) -> Vec<(i128, i128, i128)> {
        let k = self.vertices.len();
        (0..k)
            .map(|i| {
                let (p, q) = (&self.vertices[i], &self.vertices[(i + 1) % k]);
                let a = -(q.y - p.y);
                let b = q.x - p.x;
                let c = (q.y - p.y) * p.x - (q.x - p.x) * p.y;
                let l = a.denom().lcm(b.denom()).lcm(c.denom());
                let scale = Rational::from_integer(l);
                ((a * scale).to_integer(), (b * scale).to_integer(), (c * scale).to_integer())
            })
            .collect()
    }

    /// Closed containment of an integer point.
    pub fn contains_integer_point(&self, x: i64, y: i64) -> bool {
        let (x, y) = (x as i128, y as i128);
        self.integer_half_planes().iter().all(|&(a, b, c)| a * x + b * y + c >= 0)
    }

    pub fn contains(&self, p: &Point) -> bool {
        let k = self.vertices.len();
        (0..k).all(|i| orient(&self.vertices[i], &self.vertices[(i + 1) % k], p) >= Rational::zero())
    }

    /// Exact test that the origin lies strictly inside.
    pub fn contains_origin_interior(&self) -> bool {
        let o = Point::from_integers(0, 0);
        let k = self.vertices.len();
        (0..k).all(|i| orient(&self.vertices[i], &self.vertices[(i + 1) % k], &o) > Rational::zero())
    }

    /// Vertex average.
    pub fn centroid(&self) -> Point {
        let k = Rational::from_integer(self.vertices.len() as i128);
        let sx: Rational = self.vertices.iter().map(|p| p.x).sum();
        let sy: Rational = self.vertices.iter().map(|p| p.y).sum();
        Point::new(sx / k, sy / k)
    }

    /// Contraction of every vertex toward the vertex average by factor `t` in (0, 1].
    pub fn contract(&self, t: &Rational) -> Result<Self, GeometryError> {
        if *t <= Rational::zero() || *t > Rational::from_integer(1) {
            return Err(GeometryError::NonPositiveScale);
        }
        let c = self.centroid();
        ConvexPolygon::new(
            self.vertices
                .iter()
                .map(|p| Point::new(c.x + (p.x - c.x) * t, c.y + (p.y - c.y) * t))
                .collect(),
        )
    }

    /// Parses `square:r`, `ngon:k:r` or `@path`.
    pub fn parse_spec(spec: &str) -> Result<Self, ParseError> {
        let bad = || ParseError::Polygon(spec.to_string());
        if let Some(path) = spec.strip_prefix('@') {
            return ConvexPolygon::read_file(Path::new(path));
        }
        let parts: Vec<&str> = spec.split(':').collect();
        match parts.as_slice() {
            ["square", r] => {
                let r = parse_rational(r).map_err(|_| bad())?;
                ConvexPolygon::square(r).map_err(|_| bad())
            }
            ["ngon", k, r] => {
                let k: u32 = k.parse().map_err(|_| bad())?;
                let r = parse_rational(r).map_err(|_| bad())?;
                regular_polygon(k, &r).map_err(|_| bad())
            }
            _ => Err(bad()),
        }
    }

    /// One `x y` pair per line, rationals as `n/d` or decimals; `#` starts a comment.
    pub fn parse_file_contents(text: &str) -> Result<Self, ParseError> {
        let mut points = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [x, y] = fields.as_slice() else {
                return Err(ParseError::Polygon(line.to_string()));
            };
            points.push(Point::new(parse_rational(x)?, parse_rational(y)?));
        }
        ConvexPolygon::new(points).map_err(|e| ParseError::Polygon(e.to_string()))
    }

    pub fn read_file(path: &Path) -> Result<Self, ParseError> {
        let text = std::fs::read_to_string(path).map_err(|e| ParseError::PolygonFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        ConvexPolygon::parse_file_contents(&text)
    }

    pub fn to_file_contents(&self) -> String {
        let mut out = String::new();
        for p in &self.vertices {
            out.push_str(&format!("{} {}\n", format_rational(&p.x), format_rational(&p.y)));
        }
        out
    }
}

impl fmt::Display for ConvexPolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .vertices
            .iter()
            .map(|p| format!("({}, {})", format_rational(&p.x), format_rational(&p.y)))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Writes a rational vector as `t * p` with `p` a primitive integer vector and `t > 0`.
pub fn primitive_decomposition(dx: &Rational, dy: &Rational) -> ((i64, i64), Rational) {
    let l = dx.denom().lcm(dy.denom());
    let scale = Rational::from_integer(l);
    let (ix, iy) = ((dx * scale).to_integer(), (dy * scale).to_integer());
    let g = ix.abs().gcd(&iy.abs());
    if g == 0 {
        return ((0, 0), Rational::zero());
    }
    ((Integer::div_floor(&ix, &g) as i64, Integer::div_floor(&iy, &g) as i64), Rational::new(g, l))
}

/// Regular `k`-gon of circumradius `r` with vertices rounded to multiples of 2^-16.
pub fn regular_polygon(k: u32, r: &Rational) -> Result<ConvexPolygon, GeometryError> {
    if k < 3 || *r <= Rational::zero() {
        return Err(GeometryError::BadRegularPolygon);
    }
    let radius = to_f64(r);
    let den = VERTEX_DENOMINATOR as f64;
    let points: Vec<Point> = (0..k)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
            let x = (radius * theta.cos() * den).round() as i128;
            let y = (radius * theta.sin() * den).round() as i128;
            Point::new(Rational::new(x, VERTEX_DENOMINATOR), Rational::new(y, VERTEX_DENOMINATOR))
        })
        .collect();
    let hull = ConvexPolygon::hull(&points)?;
    if !hull.contains_origin_interior() {
        return Err(GeometryError::BadRegularPolygon);
    }
    Ok(hull)
}

/// The boundary functional of a polygon under a time-constant table.
#[derive(Clone, Debug)]
pub struct IValue<'a> {
    /// Micro-units.
    pub value: Rational,
    pub mu_table_used: &'a MuTable,
    pub polygon: &'a ConvexPolygon,
}

impl IValue<'_> {
    pub fn as_f64(&self) -> f64 {
        to_f64(&self.value)
    }
}

/// `sum_i mu(s_i - s_{i+1})` over the sides of `polygon`.
pub fn i_functional<'a>(polygon: &'a ConvexPolygon, table: &'a MuTable) -> Result<IValue<'a>, FppError> {
    let mut value = Rational::zero();
    for (dx, dy) in polygon.side_vectors() {
        value += table.mu_eval_vector(&dx, &dy)?;
    }
    debug_assert!(!value.is_negative());
    Ok(IValue { value, mu_table_used: table, polygon })
}
