//! Constrained Delaunay triangulation of a simple polygon with Ruppert-style
//! quality and area refinement.
//!
//! Vertices are inserted with Bowyer-Watson cavities that never cross a
//! constrained segment (except the one being split). Segments are kept free of
//! encroachment, so every boundary subsegment stays an edge of the mesh and the
//! inside/outside labels propagate through insertions unchanged.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::geometry::{orient, Point2};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Tri {
    v: [u32; 3],
    /// `n[i]` is the neighbour across the edge opposite `v[i]`.
    n: [u32; 3],
    alive: bool,
    inside: bool,
}

/// Output of the refinement: interior triangles only, super-triangle removed.
pub(crate) struct Triangulation {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    pub angle_floor: f64,
}

pub(crate) struct Refiner {
    pts: Vec<Point2>,
    tris: Vec<Tri>,
    segments: HashSet<(u32, u32)>,
    /// For each vertex, an alive triangle incident to it.
    vert_tri: Vec<u32>,
    /// Acute input corners: vertex id -> interior angle (radians).
    corner_angle: Vec<f64>,
    /// For boundary vertices created by splitting, the input corners at the ends
    /// of the original edge they lie on.
    edge_corners: Vec<(u32, u32)>,
    max_area: f64,
    min_angle: f64,
    angle_floor: f64,
    walk_state: u32,
    vertex_limit: usize,
}

enum Insert {
    Done(Vec<u32>),
    Encroaches(Vec<(u32, u32)>),
}

fn key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn incircle(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    robust::incircle(a.coord(), b.coord(), c.coord(), d.coord())
}

fn circumcenter(a: Point2, b: Point2, c: Point2) -> Point2 {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    Point2::new(a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d)
}

/// Smallest interior angle of a triangle, radians.
pub(crate) fn min_angle(a: Point2, b: Point2, c: Point2) -> f64 {
    let la = b.dist(c);
    let lb = a.dist(c);
    let lc = a.dist(b);
    let angle = |opp: f64, s1: f64, s2: f64| ((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2)).clamp(-1.0, 1.0).acos();
    angle(la, lb, lc).min(angle(lb, la, lc)).min(angle(lc, la, lb))
}

impl Refiner {
    /// Triangulates the counterclockwise loop `boundary` and refines until every
    /// interior triangle has area <= `max_area` and smallest angle >= `min_angle`
    /// (relaxed near acute input corners).
    pub fn run(boundary: &[Point2], max_area: f64, min_angle_deg: f64) -> Result<Triangulation> {
        let nb = boundary.len();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in boundary {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
        let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        let big = 20.0 * span;
        let mut pts = vec![
            Point2::new(cx - big, cy - big),
            Point2::new(cx + big, cy - big),
            Point2::new(cx, cy + big),
        ];
        pts.extend_from_slice(boundary);

        let min_angle = min_angle_deg.to_radians();
        let mut corner_angle = vec![std::f64::consts::PI; pts.len()];
        let mut angle_floor = min_angle;
        for i in 0..nb {
            let prev = boundary[(i + nb - 1) % nb];
            let cur = boundary[i];
            let next = boundary[(i + 1) % nb];
            let a1 = (prev.y - cur.y).atan2(prev.x - cur.x);
            let a2 = (next.y - cur.y).atan2(next.x - cur.x);
            // Interior angle of a CCW loop measured from the outgoing edge to the
            // incoming one.
            let mut ang = a1 - a2;
            while ang <= 0.0 {
                ang += std::f64::consts::TAU;
            }
            corner_angle[i + 3] = ang;
            if ang / 2.0 < angle_floor {
                angle_floor = ang / 2.0;
            }
        }
        if angle_floor < min_angle {
            log::info!(
                "relaxing minimum angle near sharp corners from {:.2} to {:.2} degrees",
                min_angle.to_degrees(),
                angle_floor.to_degrees()
            );
        }

        let area_estimate = crate::geometry::shoelace_area(boundary).abs();
        let vertex_limit = 20 * (area_estimate / max_area).ceil() as usize + 200 * nb + 10_000;

        let mut r = Refiner {
            edge_corners: (0..pts.len() as u32).map(|i| (i, i)).collect(),
            pts,
            tris: vec![Tri { v: [0, 1, 2], n: [NONE; 3], alive: true, inside: false }],
            segments: HashSet::new(),
            vert_tri: vec![0, 0, 0],
            corner_angle,
            max_area,
            min_angle,
            angle_floor,
            walk_state: 0x9e37_79b9,
            vertex_limit,
        };
        r.vert_tri.resize(r.pts.len(), NONE);

        for i in 0..nb {
            let v = (i + 3) as u32;
            let start = r.locate(r.pts[v as usize], r.last_alive())?;
            match r.insert_vertex(v, start, None, false)? {
                Insert::Done(_) => {}
                Insert::Encroaches(_) => unreachable!(),
            }
        }

        // Recover boundary segments by midpoint splitting.
        let mut pending: VecDeque<(u32, u32)> =
            (0..nb).map(|i| ((i + 3) as u32, ((i + 1) % nb + 3) as u32)).collect();
        let mut recovered = Vec::new();
        while let Some((a, b)) = pending.pop_front() {
            if r.find_edge(a, b).is_some() {
                r.segments.insert(key(a, b));
                recovered.push((a, b));
                continue;
            }
            let m = r.split_point(a, b);
            let v = r.push_vertex(m, r.corners_of(a, b));
            let start = r.locate(m, r.vert_tri[a as usize])?;
            match r.insert_vertex(v, start, None, false)? {
                Insert::Done(_) => {}
                Insert::Encroaches(_) => unreachable!(),
            }
            pending.push_front((v, b));
            pending.push_front((a, v));
        }

        r.classify();
        r.refine()?;
        Ok(r.finish())
    }

    fn last_alive(&self) -> u32 {
        (0..self.tris.len() as u32).rev().find(|&t| self.tris[t as usize].alive).unwrap()
    }

    fn push_vertex(&mut self, p: Point2, corners: (u32, u32)) -> u32 {
        self.pts.push(p);
        self.vert_tri.push(NONE);
        self.corner_angle.push(std::f64::consts::PI);
        self.edge_corners.push(corners);
        (self.pts.len() - 1) as u32
    }

    /// Input corners bounding the original edge that contains subsegment `a b`.
    fn corners_of(&self, a: u32, b: u32) -> (u32, u32) {
        let ca = self.edge_corners[a as usize];
        let cb = self.edge_corners[b as usize];
        let ends = |c: (u32, u32)| if c.0 == c.1 { vec![c.0] } else { vec![c.0, c.1] };
        let mut set: Vec<u32> = ends(ca);
        set.extend(ends(cb));
        set.sort_unstable();
        set.dedup();
        match set.len() {
            1 => (set[0], set[0]),
            _ => (set[0], set[set.len() - 1]),
        }
    }

    fn is_acute_corner(&self, v: u32) -> bool {
        self.corner_angle[v as usize] < std::f64::consts::FRAC_PI_3 + 1e-9
    }

    /// Split point of a segment: midpoint, or a concentric-shell point when one
    /// end is an acute input corner.
    fn split_point(&self, a: u32, b: u32) -> Point2 {
        let pa = self.pts[a as usize];
        let pb = self.pts[b as usize];
        let len = pa.dist(pb);
        let shell = |from: Point2, to: Point2| {
            let target = len / 2.0;
            let d = 2f64.powi(target.log2().round() as i32);
            let d = if d > 0.7 * len || d < 0.3 * len { target } else { d };
            from.lerp(to, d / len)
        };
        match (self.is_acute_corner(a), self.is_acute_corner(b)) {
            (true, false) => shell(pa, pb),
            (false, true) => shell(pb, pa),
            _ => pa.midpoint(pb),
        }
    }

    fn next_rand(&mut self) -> u32 {
        self.walk_state ^= self.walk_state << 13;
        self.walk_state ^= self.walk_state >> 17;
        self.walk_state ^= self.walk_state << 5;
        self.walk_state
    }

    /// Visibility walk to the triangle containing `p` (possibly on its edge).
    fn locate(&mut self, p: Point2, start: u32) -> Result<u32> {
        let mut t = start;
        let mut steps = 0usize;
        'walk: loop {
            steps += 1;
            if steps > 10 * self.tris.len() + 1000 {
                return Err(Error::MeshFailure("point location did not terminate".into()));
            }
            let tri = self.tris[t as usize];
            let off = (self.next_rand() % 3) as usize;
            for k in 0..3 {
                let i = (k + off) % 3;
                let a = self.pts[tri.v[(i + 1) % 3] as usize];
                let b = self.pts[tri.v[(i + 2) % 3] as usize];
                if orient(a, b, p) < 0.0 {
                    let nb = tri.n[i];
                    if nb == NONE {
                        return Err(Error::MeshFailure(format!("point {p:?} outside triangulation")));
                    }
                    t = nb;
                    continue 'walk;
                }
            }
            return Ok(t);
        }
    }

    /// Walk from triangle `t` towards `p` without crossing segments. Returns the
    /// containing triangle, or the first segment blocking the way.
    fn walk_constrained(&mut self, p: Point2, start: u32) -> std::result::Result<u32, (u32, u32)> {
        let mut t = start;
        let mut steps = 0usize;
        'walk: loop {
            steps += 1;
            if steps > 10 * self.tris.len() + 1000 {
                // Fall back to treating the nearest boundary as blocking.
                let tri = self.tris[t as usize];
                return Err(key(tri.v[0], tri.v[1]));
            }
            let tri = self.tris[t as usize];
            let off = (self.next_rand() % 3) as usize;
            for k in 0..3 {
                let i = (k + off) % 3;
                let va = tri.v[(i + 1) % 3];
                let vb = tri.v[(i + 2) % 3];
                if orient(self.pts[va as usize], self.pts[vb as usize], p) < 0.0 {
                    if self.segments.contains(&key(va, vb)) {
                        return Err(key(va, vb));
                    }
                    let nb = tri.n[i];
                    if nb == NONE {
                        return Err(key(va, vb));
                    }
                    t = nb;
                    continue 'walk;
                }
            }
            return Ok(t);
        }
    }

    fn edge_index(tri: &Tri, a: u32, b: u32) -> Option<usize> {
        (0..3).find(|&i| {
            let x = tri.v[(i + 1) % 3];
            let y = tri.v[(i + 2) % 3];
            (x == a && y == b) || (x == b && y == a)
        })
    }

    /// Finds a triangle with edge `a b` by rotating around `a`.
    fn find_edge(&self, a: u32, b: u32) -> Option<(u32, usize)> {
        let start = self.vert_tri[a as usize];
        if start == NONE {
            return None;
        }
        // Rotate in both directions; the fan may be open only at the hull, which
        // the super-triangle keeps away from real vertices.
        let mut t = start;
        for _ in 0..self.tris.len() {
            let tri = &self.tris[t as usize];
            if let Some(i) = Self::edge_index(tri, a, b) {
                return Some((t, i));
            }
            let ia = tri.v.iter().position(|&v| v == a)?;
            // Edge (a, v[ia+1]) is opposite v[ia+2]; step across it.
            let nb = tri.n[(ia + 2) % 3];
            if nb == NONE || nb == start {
                break;
            }
            t = nb;
        }
        None
    }

    /// Bowyer-Watson insertion of existing vertex `v` starting from a triangle
    /// containing it. `allow` is a segment the cavity may cross (being split).
    /// With `check_encroach`, insertion is refused if `v` lies inside the
    /// diametral circle of a segment on the cavity boundary.
    fn insert_vertex(&mut self, v: u32, start: u32, allow: Option<(u32, u32)>, check_encroach: bool) -> Result<Insert> {
        let p = self.pts[v as usize];
        let mut cavity = vec![start];
        let mut in_cavity = HashSet::new();
        in_cavity.insert(start);
        let mut boundary: Vec<(u32, u32, u32, u32)> = Vec::new(); // (a, b, outer neighbour, cavity tri)
        let mut blocked: Vec<(u32, u32)> = Vec::new();
        let mut forbidden = HashSet::new();
        let mut idx = 0;
        while idx < cavity.len() {
            let t = cavity[idx];
            idx += 1;
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let a = tri.v[(i + 1) % 3];
                let b = tri.v[(i + 2) % 3];
                let nb = tri.n[i];
                let seg = key(a, b);
                let constrained = self.segments.contains(&seg) && allow != Some(seg);
                if nb != NONE && in_cavity.contains(&nb) {
                    if constrained {
                        return Err(Error::MeshFailure("insertion cavity wraps around a segment".into()));
                    }
                    continue;
                }
                if constrained && nb != NONE {
                    forbidden.insert(nb);
                }
                let grow = !constrained && nb != NONE && !forbidden.contains(&nb) && {
                    let o = self.tris[nb as usize];
                    incircle(
                        self.pts[o.v[0] as usize],
                        self.pts[o.v[1] as usize],
                        self.pts[o.v[2] as usize],
                        p,
                    ) > 0.0
                };
                if grow {
                    in_cavity.insert(nb);
                    cavity.push(nb);
                } else {
                    if constrained {
                        blocked.push(seg);
                    }
                    boundary.push((a, b, nb, t));
                }
            }
        }
        // A neighbour may have been added after its shared edge was recorded as
        // boundary; drop those.
        boundary.retain(|&(_, _, nb, _)| nb == NONE || !in_cavity.contains(&nb));

        if check_encroach {
            let enc: Vec<(u32, u32)> = blocked
                .iter()
                .copied()
                .filter(|&(a, b)| self.encroaches(p, a, b))
                .collect();
            if !enc.is_empty() {
                return Ok(Insert::Encroaches(enc));
            }
        }
        for &(a, b, _, _) in &boundary {
            if orient(self.pts[a as usize], self.pts[b as usize], p) <= 0.0 {
                return Err(Error::MeshFailure(format!("degenerate insertion at {p:?}")));
            }
        }

        for &t in &cavity {
            self.tris[t as usize].alive = false;
        }
        let first_new = self.tris.len() as u32;
        for &(a, b, nb, old) in &boundary {
            let inside = self.tris[old as usize].inside;
            let id = self.tris.len() as u32;
            self.tris.push(Tri { v: [a, b, v], n: [NONE, NONE, nb], alive: true, inside });
            if nb != NONE {
                let o = &mut self.tris[nb as usize];
                for k in 0..3 {
                    if o.n[k] == old {
                        o.n[k] = id;
                    }
                }
            }
            self.vert_tri[a as usize] = id;
            self.vert_tri[b as usize] = id;
        }
        self.vert_tri[v as usize] = first_new;
        // Link the fan around v: triangle (a, b, v) has edge (b, v) opposite a,
        // shared with the new triangle starting at b.
        let new: Vec<u32> = (first_new..self.tris.len() as u32).collect();
        for &t in &new {
            let [a, b, _] = self.tris[t as usize].v;
            let by_first = new.iter().copied().find(|&s| self.tris[s as usize].v[0] == b);
            let by_second = new.iter().copied().find(|&s| self.tris[s as usize].v[1] == a);
            let (Some(f), Some(s)) = (by_first, by_second) else {
                return Err(Error::MeshFailure("cavity is not star-shaped".into()));
            };
            self.tris[t as usize].n[0] = f;
            self.tris[t as usize].n[1] = s;
        }
        Ok(Insert::Done(new))
    }

    fn encroaches(&self, p: Point2, a: u32, b: u32) -> bool {
        let pa = self.pts[a as usize];
        let pb = self.pts[b as usize];
        (pa.x - p.x) * (pb.x - p.x) + (pa.y - p.y) * (pb.y - p.y) < 0.0
    }

    /// Marks triangles reachable from the super-triangle without crossing a
    /// segment as outside.
    fn classify(&mut self) {
        for t in &mut self.tris {
            t.inside = true;
        }
        let mut stack: Vec<u32> = (0..self.tris.len() as u32)
            .filter(|&t| {
                let tri = &self.tris[t as usize];
                tri.alive && tri.v.iter().any(|&v| v < 3)
            })
            .collect();
        for &t in &stack {
            self.tris[t as usize].inside = false;
        }
        while let Some(t) = stack.pop() {
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let nb = tri.n[i];
                if nb == NONE || !self.tris[nb as usize].inside {
                    continue;
                }
                let seg = key(tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]);
                if self.segments.contains(&seg) {
                    continue;
                }
                self.tris[nb as usize].inside = false;
                stack.push(nb);
            }
        }
    }

    fn tri_points(&self, t: u32) -> [Point2; 3] {
        let v = self.tris[t as usize].v;
        [self.pts[v[0] as usize], self.pts[v[1] as usize], self.pts[v[2] as usize]]
    }

    fn is_bad(&self, t: u32) -> bool {
        let tri = &self.tris[t as usize];
        if !tri.alive || !tri.inside {
            return false;
        }
        let [a, b, c] = self.tri_points(t);
        let area = 0.5 * orient(a, b, c);
        if area > self.max_area {
            return true;
        }
        let ang = min_angle(a, b, c);
        if ang >= self.min_angle {
            return false;
        }
        // Near acute corners the achievable angle is bounded by the corner itself.
        if self.near_acute_corner(t) {
            return ang < self.angle_floor * (1.0 - 1e-9) && !self.shortest_edge_spans_corner(t);
        }
        true
    }

    fn near_acute_corner(&self, t: u32) -> bool {
        let tri = &self.tris[t as usize];
        tri.v.iter().any(|&v| {
            self.is_acute_corner(v) || {
                let (c0, c1) = self.edge_corners[v as usize];
                self.is_acute_corner(c0) || self.is_acute_corner(c1)
            }
        })
    }

    /// Skinny triangles whose shortest edge joins two segments meeting at the
    /// same acute corner cannot be improved by splitting.
    fn shortest_edge_spans_corner(&self, t: u32) -> bool {
        let v = self.tris[t as usize].v;
        let p = self.tri_points(t);
        let mut best = 0;
        let mut best_len = f64::INFINITY;
        for i in 0..3 {
            let l = p[(i + 1) % 3].dist(p[(i + 2) % 3]);
            if l < best_len {
                best_len = l;
                best = i;
            }
        }
        let a = v[(best + 1) % 3];
        let b = v[(best + 2) % 3];
        let ca = self.edge_corners[a as usize];
        let cb = self.edge_corners[b as usize];
        [ca.0, ca.1].iter().any(|c| self.is_acute_corner(*c) && (cb.0 == *c || cb.1 == *c))
    }

    fn segment_encroached(&self, a: u32, b: u32) -> bool {
        let Some((t, i)) = self.find_edge(a, b) else {
            return false;
        };
        let tri = &self.tris[t as usize];
        let apex = tri.v[i];
        if apex >= 3 && self.encroaches(self.pts[apex as usize], a, b) {
            return true;
        }
        let nb = tri.n[i];
        if nb != NONE {
            let o = &self.tris[nb as usize];
            if let Some(j) = Self::edge_index(o, a, b) {
                let apex = o.v[j];
                if apex >= 3 && self.encroaches(self.pts[apex as usize], a, b) {
                    return true;
                }
            }
        }
        false
    }

    fn split_segment(&mut self, a: u32, b: u32, bad: &mut VecDeque<u32>, enc: &mut VecDeque<(u32, u32)>) -> Result<bool> {
        if !self.segments.contains(&key(a, b)) {
            return Ok(false);
        }
        let m = self.split_point(a, b);
        let corners = self.corners_of(a, b);
        let v = self.push_vertex(m, corners);
        let (t, _) = self
            .find_edge(a, b)
            .ok_or_else(|| Error::MeshFailure("constrained segment lost from mesh".into()))?;
        match self.insert_vertex(v, t, Some(key(a, b)), false)? {
            Insert::Done(new) => {
                self.segments.remove(&key(a, b));
                self.segments.insert(key(a, v));
                self.segments.insert(key(v, b));
                enc.push_back((a, v));
                enc.push_back((v, b));
                self.queue_new(&new, bad, enc);
                Ok(true)
            }
            Insert::Encroaches(_) => unreachable!(),
        }
    }

    fn queue_new(&self, new: &[u32], bad: &mut VecDeque<u32>, enc: &mut VecDeque<(u32, u32)>) {
        for &t in new {
            let tri = &self.tris[t as usize];
            for i in 0..3 {
                let s = key(tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]);
                if self.segments.contains(&s) {
                    enc.push_back(s);
                }
            }
            if self.is_bad(t) {
                bad.push_back(t);
            }
        }
    }

    fn refine(&mut self) -> Result<()> {
        let mut enc: VecDeque<(u32, u32)> = {
            let mut s: Vec<(u32, u32)> = self.segments.iter().copied().collect();
            s.sort_unstable();
            s.into()
        };
        let mut bad: VecDeque<u32> = (0..self.tris.len() as u32).filter(|&t| self.is_bad(t)).collect();
        loop {
            if self.pts.len() > self.vertex_limit {
                return Err(Error::MeshFailure(format!(
                    "refinement exceeded {} vertices; quality bound likely unreachable",
                    self.vertex_limit
                )));
            }
            if let Some((a, b)) = enc.pop_front() {
                if self.segments.contains(&key(a, b)) && self.segment_encroached(a, b) {
                    self.split_segment(a, b, &mut bad, &mut enc)?;
                }
                continue;
            }
            let Some(t) = bad.pop_front() else { break };
            if !self.is_bad(t) {
                continue;
            }
            let [pa, pb, pc] = self.tri_points(t);
            // Size-only refinement uses the centroid, which always lies inside `t`.
            let c = if min_angle(pa, pb, pc) >= self.min_angle {
                Point2::new((pa.x + pb.x + pc.x) / 3.0, (pa.y + pb.y + pc.y) / 3.0)
            } else {
                circumcenter(pa, pb, pc)
            };
            match self.walk_constrained(c, t) {
                Err((a, b)) => {
                    if !self.split_segment(a, b, &mut bad, &mut enc)? {
                        log::debug!("circumcenter walk blocked by a non-segment edge; dropping triangle");
                        continue;
                    }
                }
                Ok(host) => {
                    let v = self.push_vertex(c, (NONE, NONE));
                    self.edge_corners[v as usize] = (v, v);
                    match self.insert_vertex(v, host, None, true)? {
                        Insert::Done(new) => {
                            self.queue_new(&new, &mut bad, &mut enc);
                            continue;
                        }
                        Insert::Encroaches(segs) => {
                            self.pts.pop();
                            self.vert_tri.pop();
                            self.corner_angle.pop();
                            self.edge_corners.pop();
                            for (a, b) in segs {
                                self.split_segment(a, b, &mut bad, &mut enc)?;
                            }
                        }
                    }
                }
            }
            if self.is_bad(t) {
                bad.push_back(t);
            }
        }
        Ok(())
    }

    fn finish(self) -> Triangulation {
        let mut remap = vec![usize::MAX; self.pts.len()];
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for tri in self.tris.iter().filter(|t| t.alive && t.inside) {
            let mut out = [0usize; 3];
            for (k, &v) in tri.v.iter().enumerate() {
                if remap[v as usize] == usize::MAX {
                    remap[v as usize] = vertices.len();
                    vertices.push(self.pts[v as usize]);
                }
                out[k] = remap[v as usize];
            }
            triangles.push(out);
        }
        let mut boundary = vec![false; vertices.len()];
        for &(a, b) in &self.segments {
            for v in [a, b] {
                if remap[v as usize] != usize::MAX {
                    boundary[remap[v as usize]] = true;
                }
            }
        }
        Triangulation { vertices, triangles, boundary, angle_floor: self.angle_floor }
    }
}
