//! Guarded Laplacian smoothing of interior vertices.

use crate::geometry::{orient, Point2};

use super::triangulation::min_angle;

const SWEEPS: usize = 6;

/// Moves each interior vertex towards the centroid of its neighbours when this
/// keeps every incident triangle positively oriented, no larger than
/// `max_area`, and does not lower the smallest angle of the star.
pub(crate) fn smooth(vertices: &mut [Point2], triangles: &[[usize; 3]], boundary: &[bool], max_area: f64) {
    let n = vertices.len();
    let mut star: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (t, tri) in triangles.iter().enumerate() {
        for &v in tri {
            star[v].push(t);
        }
    }
    let mut ring: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        let r = &mut ring[v];
        for &t in &star[v] {
            r.extend(triangles[t].iter().copied().filter(|&w| w != v));
        }
        r.sort_unstable();
        r.dedup();
    }
    let star_quality = |verts: &[Point2], v: usize, p: Point2| -> Option<f64> {
        let mut worst = f64::INFINITY;
        for &t in &star[v] {
            let [a, b, c] = triangles[t].map(|w| if w == v { p } else { verts[w] });
            let area = 0.5 * orient(a, b, c);
            if !(area > 0.0) || area > max_area {
                return None;
            }
            worst = worst.min(min_angle(a, b, c));
        }
        Some(worst)
    };
    for _ in 0..SWEEPS {
        let mut moved = false;
        for v in 0..n {
            if boundary[v] || ring[v].is_empty() {
                continue;
            }
            let k = ring[v].len() as f64;
            let (sx, sy) = ring[v].iter().fold((0.0, 0.0), |(x, y), &w| (x + vertices[w].x, y + vertices[w].y));
            let target = Point2::new(sx / k, sy / k);
            let Some(before) = star_quality(vertices, v, vertices[v]) else { continue };
            if let Some(after) = star_quality(vertices, v, target) {
                if after > before {
                    vertices[v] = target;
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_fan(centre: Point2) -> (Vec<Point2>, Vec<[usize; 3]>, Vec<bool>) {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
            centre,
        ];
        let t = vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
        (v, t, vec![true, true, true, true, false])
    }

    fn worst(v: &[Point2], t: &[[usize; 3]]) -> f64 {
        t.iter().map(|&[a, b, c]| min_angle(v[a], v[b], v[c])).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn interior_vertex_moves_to_centroid() {
        let (mut v, t, b) = square_fan(Point2::new(0.8, 0.3));
        let before = worst(&v, &t);
        smooth(&mut v, &t, &b, 1.0);
        assert!((v[4].x - 0.5).abs() < 1e-12 && (v[4].y - 0.5).abs() < 1e-12);
        assert!(worst(&v, &t) > before);
        assert_eq!(v[0], Point2::new(0.0, 0.0));
    }

    #[test]
    fn area_bound_blocks_move() {
        // ring centroid is (0.5, 0.6), which would grow the bottom triangle to 0.3
        let mut v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.5, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.5, 0.4),
        ];
        let t = vec![[0, 1, 5], [1, 2, 5], [2, 3, 5], [3, 4, 5], [4, 0, 5]];
        let b = vec![true, true, true, true, true, false];
        smooth(&mut v, &t, &b, 0.28);
        assert_eq!(v[5], Point2::new(0.5, 0.4));
    }
}
