//! Billiard regions: exact analytic descriptions, containment, areas and the
//! inscribed boundary polylines the mesher consumes.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(self, other: Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn midpoint(self, other: Self) -> Self {
        Self::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn lerp(self, other: Self, t: f64) -> Self {
        Self::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }

    pub(crate) fn coord(self) -> robust::Coord<f64> {
        robust::Coord { x: self.x, y: self.y }
    }
}

/// Twice the signed area of (a, b, c), evaluated with an exact predicate.
pub(crate) fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    robust::orient2d(a.coord(), b.coord(), c.coord())
}

/// Signed polygon area (positive for counterclockwise loops).
pub fn shoelace_area(loop_: &[Point2]) -> f64 {
    let n = loop_.len();
    let mut acc = 0.0;
    for i in 0..n {
        let p = loop_[i];
        let q = loop_[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    0.5 * acc
}

/// Default inner/outer radius ratio of a regular `{points/2}` star polygon.
/// For five points this is the golden-ratio pentagram, 1/phi^2.
pub fn regular_star_ratio(points: usize) -> f64 {
    let p = points as f64;
    (TAU / p).cos() / (PI / p).cos()
}

/// User-facing description of a billiard domain.
#[derive(Clone, Debug, PartialEq)]
pub enum RegionSpec {
    Circle { radius: f64 },
    RegularPolygon { sides: usize, circumradius: f64 },
    Polygon { vertices: Vec<Point2> },
    Triangle { vertices: [Point2; 3] },
    EquilateralTriangle { side: f64 },
    /// Axis-aligned rectangle `[0, width] x [0, height]`.
    Rectangle { width: f64, height: f64 },
    Stadium { cap_radius: f64, half_length: f64 },
    StarPolygon { points: usize, outer_radius: f64, inner_radius: f64 },
    /// Disk with the sector `|theta| < cut_angle / 2` removed.
    SectorCutDisk { radius: f64, cut_angle: f64 },
}

impl RegionSpec {
    pub fn default_stadium() -> Self {
        Self::Stadium { cap_radius: 1.0, half_length: 1.0 }
    }

    pub fn default_star() -> Self {
        Self::StarPolygon { points: 5, outer_radius: 1.0, inner_radius: regular_star_ratio(5) }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Circle { .. } => "circle",
            Self::RegularPolygon { .. } => "ngon",
            Self::Polygon { .. } => "polygon",
            Self::Triangle { .. } => "triangle",
            Self::EquilateralTriangle { .. } => "triangle equilateral",
            Self::Rectangle { .. } => "rect",
            Self::Stadium { .. } => "stadium",
            Self::StarPolygon { .. } => "star",
            Self::SectorCutDisk { .. } => "pacman",
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Segment intersection including touching and collinear overlap.
fn segments_touch(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// `p` is known collinear with `a b`; test whether it lies within the segment.
fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Validates a vertex loop as a simple polygon and returns it counterclockwise.
fn simple_ccw(mut vertices: Vec<Point2>) -> Result<Vec<Point2>> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::InvalidSpec(format!("polygon needs at least 3 vertices, got {n}")));
    }
    if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidSpec(format!("non-finite vertex {p:?}")));
    }
    for i in 0..n {
        if vertices[i] == vertices[(i + 1) % n] {
            return Err(Error::InvalidSpec(format!("repeated vertex at index {i}")));
        }
    }
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        for j in i + 1..n {
            let (c, d) = (vertices[j], vertices[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Consecutive edges may only share their common endpoint.
                let (shared, other_a, other_c) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                if orient(other_a, shared, other_c) == 0.0
                    && (other_a.x - shared.x) * (other_c.x - shared.x)
                        + (other_a.y - shared.y) * (other_c.y - shared.y)
                        > 0.0
                {
                    return Err(Error::InvalidSpec(format!("edges {i} and {j} fold back")));
                }
            } else if segments_touch(a, b, c, d) {
                return Err(Error::InvalidSpec(format!(
                    "polygon is not simple: edges {i} and {j} intersect"
                )));
            }
        }
    }
    let area = shoelace_area(&vertices);
    if area == 0.0 {
        return Err(Error::InvalidSpec("polygon has zero area".into()));
    }
    if area < 0.0 {
        vertices.reverse();
    }
    Ok(vertices)
}

/// A validated billiard domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    spec: RegionSpec,
    shape: Shape,
}

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    Disk { radius: f64 },
    Stadium { r: f64, a: f64 },
    Sector { radius: f64, cut: f64 },
    /// Counterclockwise straight-edged loop.
    Poly(Vec<Point2>),
}

/// Builds and validates a region from its spec.
pub fn build_region(spec: RegionSpec) -> Result<Region> {
    Region::new(spec)
}

impl Region {
    pub fn new(spec: RegionSpec) -> Result<Self> {
        let shape = match &spec {
            RegionSpec::Circle { radius } => {
                positive("radius", *radius)?;
                Shape::Disk { radius: *radius }
            }
            RegionSpec::RegularPolygon { sides, circumradius } => {
                positive("circumradius", *circumradius)?;
                if *sides < 3 {
                    return Err(Error::InvalidSpec(format!("polygon needs >= 3 sides, got {sides}")));
                }
                let n = *sides as f64;
                let verts = (0..*sides)
                    .map(|k| Point2::polar(*circumradius, PI / 2.0 + TAU * k as f64 / n))
                    .collect();
                Shape::Poly(verts)
            }
            RegionSpec::Polygon { vertices } => Shape::Poly(simple_ccw(vertices.clone())?),
            RegionSpec::Triangle { vertices } => {
                if orient(vertices[0], vertices[1], vertices[2]) == 0.0 {
                    return Err(Error::InvalidSpec("degenerate triangle".into()));
                }
                Shape::Poly(simple_ccw(vertices.to_vec())?)
            }
            RegionSpec::EquilateralTriangle { side } => {
                positive("side", *side)?;
                let a = *side;
                let h = a / (2.0 * 3f64.sqrt());
                Shape::Poly(vec![
                    Point2::new(-a / 2.0, -h),
                    Point2::new(a / 2.0, -h),
                    Point2::new(0.0, a / 3f64.sqrt()),
                ])
            }
            RegionSpec::Rectangle { width, height } => {
                positive("width", *width)?;
                positive("height", *height)?;
                Shape::Poly(vec![
                    Point2::new(0.0, 0.0),
                    Point2::new(*width, 0.0),
                    Point2::new(*width, *height),
                    Point2::new(0.0, *height),
                ])
            }
            RegionSpec::Stadium { cap_radius, half_length } => {
                positive("cap_radius", *cap_radius)?;
                positive("half_length", *half_length)?;
                Shape::Stadium { r: *cap_radius, a: *half_length }
            }
            RegionSpec::StarPolygon { points, outer_radius, inner_radius } => {
                positive("outer_radius", *outer_radius)?;
                positive("inner_radius", *inner_radius)?;
                if *points < 3 {
                    return Err(Error::InvalidSpec(format!("star needs >= 3 points, got {points}")));
                }
                if inner_radius >= outer_radius {
                    return Err(Error::InvalidSpec("star inner_radius must be < outer_radius".into()));
                }
                let p = *points as f64;
                let verts = (0..*points)
                    .flat_map(|k| {
                        let base = PI / 2.0 + TAU * k as f64 / p;
                        [
                            Point2::polar(*outer_radius, base),
                            Point2::polar(*inner_radius, base + PI / p),
                        ]
                    })
                    .collect();
                Shape::Poly(verts)
            }
            RegionSpec::SectorCutDisk { radius, cut_angle } => {
                positive("radius", *radius)?;
                if !(cut_angle.is_finite() && *cut_angle > 0.0 && *cut_angle < TAU) {
                    return Err(Error::InvalidSpec(format!(
                        "cut angle must lie in (0, 2pi), got {cut_angle}"
                    )));
                }
                Shape::Sector { radius: *radius, cut: *cut_angle }
            }
        };
        Ok(Self { spec, shape })
    }

    pub fn spec(&self) -> &RegionSpec {
        &self.spec
    }

    /// True iff `p` lies strictly inside; boundary points are outside.
    pub fn contains(&self, p: Point2) -> bool {
        if !p.is_finite() {
            return false;
        }
        match &self.shape {
            Shape::Disk { radius } => p.x * p.x + p.y * p.y < radius * radius,
            Shape::Stadium { r, a } => {
                let ax = p.x.abs();
                if p.y.abs() >= *r {
                    return false;
                }
                if ax <= *a {
                    return true;
                }
                let dx = ax - a;
                dx * dx + p.y * p.y < r * r
            }
            Shape::Sector { radius, cut } => {
                let rho2 = p.x * p.x + p.y * p.y;
                if rho2 == 0.0 || rho2 >= radius * radius {
                    return false;
                }
                p.y.atan2(p.x).abs() > cut / 2.0
            }
            Shape::Poly(verts) => point_in_polygon(verts, p),
        }
    }

    /// Exact area of the analytic region.
    pub fn area(&self) -> f64 {
        match (&self.spec, &self.shape) {
            (RegionSpec::RegularPolygon { sides, circumradius }, _) => {
                let n = *sides as f64;
                0.5 * n * circumradius * circumradius * (TAU / n).sin()
            }
            (RegionSpec::EquilateralTriangle { side }, _) => 3f64.sqrt() / 4.0 * side * side,
            (RegionSpec::Rectangle { width, height }, _) => width * height,
            (_, Shape::Disk { radius }) => PI * radius * radius,
            (_, Shape::Stadium { r, a }) => 4.0 * a * r + PI * r * r,
            (_, Shape::Sector { radius, cut }) => 0.5 * (TAU - cut) * radius * radius,
            (_, Shape::Poly(v)) => shoelace_area(v),
        }
    }

    /// Axis-aligned bounding box `(xmin, xmax, ymin, ymax)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        match &self.shape {
            Shape::Disk { radius } => (-radius, *radius, -radius, *radius),
            Shape::Stadium { r, a } => (-a - r, a + r, -r, *r),
            Shape::Sector { radius, cut } => {
                let start = cut / 2.0;
                let end = TAU - cut / 2.0;
                let mut pts = vec![Point2::new(0.0, 0.0), Point2::polar(*radius, start), Point2::polar(*radius, end)];
                for k in 1..4 {
                    let t = k as f64 * PI / 2.0;
                    if t > start && t < end {
                        pts.push(Point2::polar(*radius, t));
                    }
                }
                bbox(&pts)
            }
            Shape::Poly(v) => bbox(v),
        }
    }

    /// True for regions bounded only by straight edges.
    pub fn is_polygonal(&self) -> bool {
        matches!(self.shape, Shape::Poly(_))
    }

    /// Inscribed polygonal approximation of the boundary.
    pub fn boundary_polyline(&self, chord_tolerance: f64) -> BoundaryPolyline {
        let tol = chord_tolerance;
        let mut verts = Vec::new();
        let mut max_sagitta: f64 = 0.0;
        let mut arc = |verts: &mut Vec<Point2>, center: Point2, radius: f64, start: f64, sweep: f64| {
            let n = arc_segments(radius, sweep, tol);
            let step = sweep / n as f64;
            max_sagitta = max_sagitta.max(radius * (1.0 - (step / 2.0).cos()));
            // The arc's end point is emitted by the next piece.
            for k in 0..n {
                let t = start + step * k as f64;
                verts.push(Point2::new(center.x + radius * t.cos(), center.y + radius * t.sin()));
            }
        };
        match &self.shape {
            Shape::Disk { radius } => arc(&mut verts, Point2::default(), *radius, 0.0, TAU),
            Shape::Stadium { r, a } => {
                verts.push(Point2::new(-a, -r));
                verts.push(Point2::new(*a, -r));
                let mut right = Vec::new();
                arc(&mut right, Point2::new(*a, 0.0), *r, -PI / 2.0, PI);
                verts.extend(right.into_iter().skip(1));
                verts.push(Point2::new(*a, *r));
                verts.push(Point2::new(-a, *r));
                let mut left = Vec::new();
                arc(&mut left, Point2::new(-a, 0.0), *r, PI / 2.0, PI);
                verts.extend(left.into_iter().skip(1));
            }
            Shape::Sector { radius, cut } => {
                verts.push(Point2::new(0.0, 0.0));
                arc(&mut verts, Point2::default(), *radius, cut / 2.0, TAU - cut);
                verts.push(Point2::polar(*radius, TAU - cut / 2.0));
            }
            Shape::Poly(v) => verts.extend_from_slice(v),
        }
        BoundaryPolyline { vertices: verts, chord_tolerance: tol, max_sagitta }
    }

    /// Residual of the exact boundary equation at `p` (zero on the boundary).
    pub fn boundary_residual(&self, p: Point2) -> f64 {
        match &self.shape {
            Shape::Disk { radius } => (p.norm() - radius).abs(),
            Shape::Stadium { r, a } => {
                let ax = p.x.abs();
                if ax <= *a {
                    (p.y.abs() - r).abs()
                } else {
                    (Point2::new(ax - a, p.y).norm() - r).abs()
                }
            }
            Shape::Sector { radius, cut } => {
                let on_arc = (p.norm() - radius).abs();
                let mut best = on_arc;
                for edge_angle in [cut / 2.0, -cut / 2.0] {
                    let d = Point2::polar(1.0, edge_angle);
                    let t = (p.x * d.x + p.y * d.y).clamp(0.0, *radius);
                    best = best.min(p.dist(Point2::new(t * d.x, t * d.y)));
                }
                best
            }
            Shape::Poly(v) => {
                let n = v.len();
                (0..n)
                    .map(|i| point_segment_distance(p, v[i], v[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

fn bbox(pts: &[Point2]) -> (f64, f64, f64, f64) {
    pts.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(x0, x1, y0, y1), p| (x0.min(p.x), x1.max(p.x), y0.min(p.y), y1.max(p.y)),
    )
}

/// Number of chords for an arc: the sagitta bound, floored at eight chords per
/// full turn.
fn arc_segments(radius: f64, sweep: f64, tol: f64) -> usize {
    let floor = (8.0 * sweep / TAU - 1e-9).ceil().max(1.0) as usize;
    let ratio = tol / radius;
    if ratio >= 1.0 {
        return floor;
    }
    let max_step = 2.0 * (1.0 - ratio).acos();
    let n = (sweep / max_step - 1e-9).ceil().max(1.0) as usize;
    n.max(floor)
}

pub(crate) fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0) };
    p.dist(Point2::new(a.x + t * dx, a.y + t * dy))
}

/// Strict point-in-polygon test; points on an edge are reported outside.
pub(crate) fn point_in_polygon(verts: &[Point2], p: Point2) -> bool {
    let n = verts.len();
    let mut inside = false;
    for i in 0..n {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        if orient(a, b, p) == 0.0 && on_segment(a, b, p) {
            return false;
        }
        if (a.y > p.y) != (b.y > p.y) {
            // Crossing test made exact by orientation sign.
            let o = orient(a, b, p);
            if (b.y > a.y && o > 0.0) || (b.y < a.y && o < 0.0) {
                inside = !inside;
            }
        }
    }
    inside
}

/// Closed inscribed boundary loop, counterclockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPolyline {
    pub vertices: Vec<Point2>,
    pub chord_tolerance: f64,
    /// Largest chord sagitta against the true curve; 0 for straight-edged regions.
    pub max_sagitta: f64,
}

impl BoundaryPolyline {
    pub fn area(&self) -> f64 {
        shoelace_area(&self.vertices)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, p: Point2) -> bool {
        point_in_polygon(&self.vertices, p)
    }
}

// --- Region-spec grammar -------------------------------------------------

fn parse_number(key: &str, raw: &str) -> Result<f64> {
    let (num, scale) = if let Some(s) = raw.strip_suffix("deg") {
        (s, PI / 180.0)
    } else if let Some(s) = raw.strip_suffix("rad") {
        (s, 1.0)
    } else {
        (raw, 1.0)
    };
    num.trim()
        .parse::<f64>()
        .map(|v| v * scale)
        .map_err(|_| Error::Parse(format!("bad value `{raw}` for `{key}`")))
}

fn parse_points(text: &str) -> Result<Vec<Point2>> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::Parse(format!("expected `(x,y)` at `{rest}`")))?;
        let close = open.find(')').ok_or_else(|| Error::Parse("unclosed `(`".into()))?;
        let inner = &open[..close];
        let mut parts = inner.split(',');
        let (Some(x), Some(y), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse(format!("bad point `({inner})`")));
        };
        out.push(Point2::new(parse_number("x", x.trim())?, parse_number("y", y.trim())?));
        rest = open[close + 1..].trim_start();
    }
    Ok(out)
}

struct KeyValues<'a> {
    pairs: Vec<(&'a str, &'a str)>,
    flags: Vec<&'a str>,
}

impl<'a> KeyValues<'a> {
    fn parse(tokens: &[&'a str]) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut flags = Vec::new();
        for t in tokens {
            match t.split_once('=') {
                Some((k, v)) => pairs.push((k, v)),
                None => flags.push(*t),
            }
        }
        Ok(Self { pairs, flags })
    }

    fn get(&self, keys: &[&str]) -> Result<Option<f64>> {
        for (k, v) in &self.pairs {
            if keys.contains(k) {
                return parse_number(k, v).map(Some);
            }
        }
        Ok(None)
    }

    fn require(&self, keys: &[&str]) -> Result<f64> {
        self.get(keys)?.ok_or_else(|| Error::Parse(format!("missing `{}=`", keys[0])))
    }

    fn count(&self, keys: &[&str]) -> Result<Option<usize>> {
        match self.get(keys)? {
            None => Ok(None),
            Some(v) if v >= 0.0 && v.fract() == 0.0 => Ok(Some(v as usize)),
            Some(v) => Err(Error::Parse(format!("`{}` must be a whole number, got {v}", keys[0]))),
        }
    }

    fn check_known(&self, known: &[&str]) -> Result<()> {
        if let Some((k, _)) = self.pairs.iter().find(|(k, _)| !known.contains(k)) {
            return Err(Error::Parse(format!("unknown key `{k}`")));
        }
        Ok(())
    }
}

impl FromStr for RegionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
        let head = head.to_ascii_lowercase();
        if head == "polygon" {
            return Ok(Self::Polygon { vertices: parse_points(rest)? });
        }
        if head == "triangle" && rest.trim_start().starts_with('(') {
            let pts = parse_points(rest)?;
            let verts: [Point2; 3] = pts
                .try_into()
                .map_err(|v: Vec<Point2>| Error::Parse(format!("triangle needs 3 points, got {}", v.len())))?;
            return Ok(Self::Triangle { vertices: verts });
        }
        let tokens: Vec<&str> = rest.split_whitespace().collect();
        let kv = KeyValues::parse(&tokens)?;
        let spec = match head.as_str() {
            "circle" | "disk" => {
                kv.check_known(&["r", "radius"])?;
                Self::Circle { radius: kv.get(&["r", "radius"])?.unwrap_or(1.0) }
            }
            "ngon" => {
                kv.check_known(&["sides", "n", "r", "radius"])?;
                Self::RegularPolygon {
                    sides: kv.count(&["sides", "n"])?.ok_or_else(|| Error::Parse("missing `sides=`".into()))?,
                    circumradius: kv.get(&["r", "radius"])?.unwrap_or(1.0),
                }
            }
            "triangle" => {
                if !kv.flags.contains(&"equilateral") {
                    return Err(Error::Parse("expected `triangle equilateral side=..` or three points".into()));
                }
                kv.check_known(&["side", "a"])?;
                Self::EquilateralTriangle { side: kv.get(&["side", "a"])?.unwrap_or(1.0) }
            }
            "rect" | "rectangle" => {
                kv.check_known(&["w", "h", "width", "height"])?;
                Self::Rectangle { width: kv.require(&["w", "width"])?, height: kv.require(&["h", "height"])? }
            }
            "square" => {
                kv.check_known(&["side", "a"])?;
                let side = kv.get(&["side", "a"])?.unwrap_or(1.0);
                Self::Rectangle { width: side, height: side }
            }
            "stadium" => {
                kv.check_known(&["r", "a"])?;
                Self::Stadium {
                    cap_radius: kv.get(&["r"])?.unwrap_or(1.0),
                    half_length: kv.get(&["a"])?.unwrap_or(1.0),
                }
            }
            "star" => {
                kv.check_known(&["points", "router", "rinner"])?;
                let points = kv.count(&["points"])?.unwrap_or(5);
                let outer = kv.get(&["router"])?.unwrap_or(1.0);
                let inner = match kv.get(&["rinner"])? {
                    Some(v) => v,
                    None if points >= 5 => outer * regular_star_ratio(points),
                    None => return Err(Error::Parse("`rinner=` is required for stars with < 5 points".into())),
                };
                Self::StarPolygon { points, outer_radius: outer, inner_radius: inner }
            }
            "pacman" | "sector" => {
                kv.check_known(&["r", "cut"])?;
                Self::SectorCutDisk {
                    radius: kv.get(&["r"])?.unwrap_or(1.0),
                    cut_angle: kv.get(&["cut"])?.unwrap_or(PI / 3.0),
                }
            }
            other => return Err(Error::Parse(format!("unknown region kind `{other}`"))),
        };
        if head != "triangle" {
            if let Some(f) = kv.flags.first() {
                return Err(Error::Parse(format!("unexpected token `{f}`")));
            }
        }
        Ok(spec)
    }
}

impl fmt::Display for RegionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts = |f: &mut fmt::Formatter<'_>, v: &[Point2]| {
            v.iter().try_for_each(|p| write!(f, " ({},{})", p.x, p.y))
        };
        match self {
            Self::Circle { radius } => write!(f, "circle r={radius}"),
            Self::RegularPolygon { sides, circumradius } => write!(f, "ngon sides={sides} r={circumradius}"),
            Self::Polygon { vertices } => {
                write!(f, "polygon")?;
                pts(f, vertices)
            }
            Self::Triangle { vertices } => {
                write!(f, "triangle")?;
                pts(f, vertices)
            }
            Self::EquilateralTriangle { side } => write!(f, "triangle equilateral side={side}"),
            Self::Rectangle { width, height } => write!(f, "rect w={width} h={height}"),
            Self::Stadium { cap_radius, half_length } => write!(f, "stadium r={cap_radius} a={half_length}"),
            Self::StarPolygon { points, outer_radius, inner_radius } => {
                write!(f, "star points={points} router={outer_radius} rinner={inner_radius}")
            }
            Self::SectorCutDisk { radius, cut_angle } => write!(f, "pacman r={radius} cut={cut_angle}rad"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn region(s: &str) -> Region {
        Region::new(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn analytic_areas() {
        assert_relative_eq!(region("circle r=1").area(), PI);
        assert_relative_eq!(region("ngon sides=6 r=1").area(), 2.598_076_211_353_316, epsilon = 1e-12);
        assert_relative_eq!(region("stadium r=1 a=1").area(), 4.0 + PI);
        assert_relative_eq!(region("pacman r=1 cut=60deg").area(), PI * 5.0 / 6.0, epsilon = 1e-14);
        let star = region("star points=5 router=1 rinner=0.381966");
        assert_relative_eq!(star.area(), star.boundary_polyline(1.0).area());
    }

    #[test]
    fn bow_tie_is_rejected() {
        let err = "polygon (0,0) (1,0) (0,1) (1,1)".parse::<RegionSpec>().map(Region::new).unwrap();
        assert!(matches!(err, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn invalid_specs() {
        for bad in [
            RegionSpec::Circle { radius: 0.0 },
            RegionSpec::RegularPolygon { sides: 2, circumradius: 1.0 },
            RegionSpec::Triangle { vertices: [Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), Point2::new(2.0, 2.0)] },
            RegionSpec::StarPolygon { points: 5, outer_radius: 1.0, inner_radius: 1.5 },
            RegionSpec::SectorCutDisk { radius: 1.0, cut_angle: TAU },
        ] {
            assert!(matches!(Region::new(bad), Err(Error::InvalidSpec(_))));
        }
    }

    #[test]
    fn clockwise_polygon_is_reoriented() {
        let r = region("polygon (0,0) (0,1) (1,1) (1,0)");
        assert_relative_eq!(r.boundary_polyline(0.1).area(), 1.0);
    }

    #[test]
    fn containment() {
        let disk = region("circle r=1");
        assert!(disk.contains(Point2::new(0.0, 0.0)));
        assert!(!disk.contains(Point2::new(1.0, 0.0)));
        let tri = region("triangle equilateral side=1");
        assert!(tri.contains(Point2::new(0.0, 0.0)));
        assert!(!tri.contains(Point2::new(3.0, 3.0)));
        assert!(!tri.contains(Point2::new(0.0, -0.5 / 3f64.sqrt())));
        let pac = region("pacman r=1 cut=60deg");
        assert!(!pac.contains(Point2::new(0.5, 0.0)));
        assert!(pac.contains(Point2::new(-0.5, 0.0)));
        assert!(!pac.contains(Point2::new(0.0, 0.0)));
        let st = region("stadium r=1 a=1");
        assert!(st.contains(Point2::new(1.9, 0.0)));
        assert!(!st.contains(Point2::new(1.9, 0.9)));
        assert!(!st.contains(Point2::new(0.0, 1.0)));
    }

    #[test]
    fn polyline_counts() {
        assert_eq!(region("circle r=1").boundary_polyline(10.0).len(), 8);
        for tol in [1.0, 1e-3, 1e-9] {
            assert_eq!(region("square side=1").boundary_polyline(tol).len(), 4);
        }
        let st = region("stadium r=1 a=1").boundary_polyline(1e-3);
        // Two straight edges of length 2 between the caps.
        let v = &st.vertices;
        let long = (0..v.len()).filter(|&i| (v[i].dist(v[(i + 1) % v.len()]) - 2.0).abs() < 1e-14).count();
        assert_eq!(long, 2);
        assert!(st.max_sagitta <= 1e-3);
    }

    #[test]
    fn polyline_is_inscribed() {
        for s in ["circle r=1.5", "stadium r=1 a=1", "pacman r=1 cut=60deg", "star", "ngon sides=7 r=2"] {
            let r = region(s);
            for tol in [0.1, 1e-3] {
                for p in r.boundary_polyline(tol).vertices {
                    assert!(r.boundary_residual(p) < 1e-12, "{s}: {p:?}");
                }
            }
        }
    }

    #[test]
    fn grammar_round_trip() {
        for s in [
            "circle r=1",
            "stadium r=1 a=1",
            "star points=5 router=1 rinner=0.381966",
            "ngon sides=5 r=1",
            "triangle equilateral side=1",
            "pacman r=1 cut=60deg",
            "polygon (0,0) (2,0) (1, 1.5)",
            "triangle (0,0) (1,0) (0,1)",
            "rect w=2 h=1",
        ] {
            let spec: RegionSpec = s.parse().unwrap();
            let again: RegionSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again, "{s}");
        }
        let pac: RegionSpec = "pacman r=1 cut=1.25rad".parse().unwrap();
        assert_eq!(pac, RegionSpec::SectorCutDisk { radius: 1.0, cut_angle: 1.25 });
        assert!("blob r=1".parse::<RegionSpec>().is_err());
        assert!("circle q=1".parse::<RegionSpec>().is_err());
    }

    #[test]
    fn default_star_is_golden_pentagram() {
        let RegionSpec::StarPolygon { inner_radius, .. } = RegionSpec::default_star() else { unreachable!() };
        assert_relative_eq!(inner_radius, 0.381_966_011_250_105_1, epsilon = 1e-15);
    }
}
