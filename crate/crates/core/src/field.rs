//! Eigenfunction rasters and localization metrics.

use std::fmt;
use std::str::FromStr;

use crate::assembly::AffineMap;
use crate::eigensolve::Spectrum;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::pipeline::Discretization;
use crate::quadrature::QuadratureRule;
use crate::sparse::SparseSymMatrix;

/// Default strip width as a fraction of the bounding-box extent.
pub const DEFAULT_STRIP_WIDTH: f64 = 0.1;
/// Default raster resolution per axis.
pub const DEFAULT_RESOLUTION: usize = 512;
/// Allowed deviation of `x^T M x` from 1 for metric inputs.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Sampled field on a regular grid including the bounding-box edges.
/// Row `j = 0` is at `ymin`; values are stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldGrid {
    pub nx: usize,
    pub ny: usize,
    pub bbox: (f64, f64, f64, f64),
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
    /// Points inside the region that fell in the gap between the boundary and
    /// the meshed polygon; they are masked out.
    pub unlocated: usize,
}

impl FieldGrid {
    pub fn point(&self, i: usize, j: usize) -> Point2 {
        sample_point(self.bbox, self.nx, self.ny, i, j)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// Riemann sum of `psi^2` over masked samples.
    pub fn mass(&self) -> f64 {
        let (x0, x1, y0, y1) = self.bbox;
        let cell = (x1 - x0) / (self.nx - 1) as f64 * (y1 - y0) / (self.ny - 1) as f64;
        self.values.iter().zip(&self.mask).filter(|(_, m)| **m).map(|(v, _)| v * v).sum::<f64>() * cell
    }
}

fn sample_point(bbox: (f64, f64, f64, f64), nx: usize, ny: usize, i: usize, j: usize) -> Point2 {
    let (x0, x1, y0, y1) = bbox;
    Point2::new(
        x0 + (x1 - x0) * i as f64 / (nx - 1) as f64,
        y0 + (y1 - y0) * j as f64 / (ny - 1) as f64,
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub bbox: (f64, f64, f64, f64),
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, bbox: (f64, f64, f64, f64)) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidParams(format!("grid must be at least 2x2, got {nx}x{ny}")));
        }
        let (x0, x1, y0, y1) = bbox;
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::InvalidParams("empty grid bounding box".into()));
        }
        Ok(Self { nx, ny, bbox })
    }

    /// Grid over the region's bounding box.
    pub fn covering(disc: &Discretization, nx: usize, ny: usize) -> Result<Self> {
        Self::new(nx, ny, disc.region.bounding_box())
    }
}

/// Uniform bucket grid over mesh triangles.
#[derive(Clone, Debug)]
pub struct PointLocator {
    bbox: (f64, f64, f64, f64),
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
    maps: Vec<Option<AffineMap>>,
}

const LOCATE_TOL: f64 = 1e-12;

impl PointLocator {
    pub fn new(disc: &Discretization) -> Self {
        let mesh = &disc.mesh;
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &mesh.vertices {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        let nt = mesh.triangles.len().max(1);
        let side = ((nt as f64).sqrt().ceil() as usize).max(1);
        let (nx, ny) = (side, side);
        let mut buckets = vec![Vec::new(); nx * ny];
        let cell = |v: f64, lo: f64, hi: f64, n: usize| -> usize {
            if hi <= lo {
                return 0;
            }
            (((v - lo) / (hi - lo) * n as f64).floor().max(0.0) as usize).min(n - 1)
        };
        let mut maps = Vec::with_capacity(mesh.triangles.len());
        for t in 0..mesh.triangles.len() {
            let tri = mesh.triangle(t);
            maps.push(AffineMap::new(&tri).ok());
            let (a, b) = tri.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.x), b.max(p.x)));
            let (c, d) = tri.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.y), b.max(p.y)));
            for j in cell(c, y0, y1, ny)..=cell(d, y0, y1, ny) {
                for i in cell(a, x0, x1, nx)..=cell(b, x0, x1, nx) {
                    buckets[j * nx + i].push(t);
                }
            }
        }
        Self { bbox: (x0, x1, y0, y1), nx, ny, buckets, maps }
    }

    /// Containing triangle and reference coordinates of `p`.
    pub fn locate(&self, p: Point2) -> Option<(usize, f64, f64)> {
        let (x0, x1, y0, y1) = self.bbox;
        let slack = 1e-12 * (x1 - x0).max(y1 - y0);
        if p.x < x0 - slack || p.x > x1 + slack || p.y < y0 - slack || p.y > y1 + slack {
            return None;
        }
        let i = (((p.x - x0) / (x1 - x0) * self.nx as f64).floor().max(0.0) as usize).min(self.nx - 1);
        let j = (((p.y - y0) / (y1 - y0) * self.ny as f64).floor().max(0.0) as usize).min(self.ny - 1);
        for &t in &self.buckets[j * self.nx + i] {
            let Some(map) = &self.maps[t] else { continue };
            let (xi, eta) = map.inverse(p);
            if xi >= -LOCATE_TOL && eta >= -LOCATE_TOL && xi + eta <= 1.0 + LOCATE_TOL {
                return Some((t, xi, eta));
            }
        }
        None
    }
}

fn eval_in(disc: &Discretization, full: &[f64], t: usize, xi: f64, eta: f64) -> f64 {
    let phi = disc.basis.values(xi, eta);
    disc.dofs.cell_nodes(t).iter().zip(phi).map(|(&node, v)| full[node] * v).sum()
}

fn check_len(disc: &Discretization, coeffs: &[f64]) -> Result<()> {
    if coeffs.len() != disc.n_dof() {
        return Err(Error::DimensionMismatch { expected: disc.n_dof(), found: coeffs.len() });
    }
    Ok(())
}

/// Samples `psi = sum u_i phi_i` on the grid; points outside the mesh are 0
/// and masked out.
pub fn evaluate_eigenfunction(disc: &Discretization, coeffs: &[f64], grid: &GridSpec) -> Result<FieldGrid> {
    check_len(disc, coeffs)?;
    let locator = PointLocator::new(disc);
    evaluate_with(disc, &locator, coeffs, grid)
}

pub fn evaluate_with(
    disc: &Discretization,
    locator: &PointLocator,
    coeffs: &[f64],
    grid: &GridSpec,
) -> Result<FieldGrid> {
    check_len(disc, coeffs)?;
    let full = disc.dofs.expand(coeffs);
    let (nx, ny) = (grid.nx, grid.ny);
    let mut values = vec![0.0; nx * ny];
    let mut mask = vec![false; nx * ny];
    let mut missed = vec![0usize; ny];
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(ny);
    let rows_per = ny.div_ceil(threads);
    std::thread::scope(|s| {
        let chunks = values
            .chunks_mut(rows_per * nx)
            .zip(mask.chunks_mut(rows_per * nx))
            .zip(missed.chunks_mut(rows_per))
            .enumerate();
        for (c, ((vals, msk), miss)) in chunks {
            let full = &full;
            s.spawn(move || {
                for (r, miss_r) in miss.iter_mut().enumerate() {
                    let j = c * rows_per + r;
                    for i in 0..nx {
                        let p = sample_point(grid.bbox, nx, ny, i, j);
                        match locator.locate(p) {
                            Some((t, xi, eta)) => {
                                vals[r * nx + i] = eval_in(disc, full, t, xi, eta);
                                msk[r * nx + i] = true;
                            }
                            None => {
                                if disc.region.contains(p) {
                                    *miss_r += 1;
                                }
                            }
                        }
                    }
                }
            });
        }
    });
    let unlocated = missed.iter().sum();
    if unlocated > 0 {
        log::debug!("{unlocated} grid points inside the region lie outside the mesh");
    }
    Ok(FieldGrid { nx, ny, bbox: grid.bbox, values, mask, unlocated })
}

/// Sign convention: the entry of largest magnitude is made positive.
pub fn fix_sign(coeffs: &mut [f64]) {
    let big = coeffs.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
    if big < 0.0 {
        coeffs.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Scales `coeffs` so that `c^T M c = 1`.
pub fn normalize_l2(mass: &SparseSymMatrix, coeffs: &[f64]) -> Result<Vec<f64>> {
    if coeffs.len() != mass.dim() {
        return Err(Error::DimensionMismatch { expected: mass.dim(), found: coeffs.len() });
    }
    let n2 = mass.bilinear(coeffs, coeffs);
    if !(n2 > 0.0) {
        return Err(Error::ZeroVector);
    }
    let s = 1.0 / n2.sqrt();
    let mut out: Vec<f64> = coeffs.iter().map(|v| v * s).collect();
    fix_sign(&mut out);
    Ok(out)
}

fn check_normalized(disc: &Discretization, coeffs: &[f64]) -> Result<()> {
    check_len(disc, coeffs)?;
    let n2 = disc.mass.bilinear(coeffs, coeffs);
    if (n2 - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(n2));
    }
    Ok(())
}

fn density_rule(disc: &Discretization) -> QuadratureRule {
    if disc.basis.order() == 1 {
        QuadratureRule::degree4()
    } else {
        QuadratureRule::collapsed_gauss(5)
    }
}

/// `Area * integral rho^2` for the averaged density `rho = mean |psi_i|^2`.
fn density_ipr(disc: &Discretization, fulls: &[Vec<f64>]) -> f64 {
    let q = density_rule(disc);
    let c = fulls.len() as f64;
    let mut acc = 0.0;
    for t in 0..disc.mesh.triangles.len() {
        let Ok(map) = AffineMap::new(&disc.mesh.triangle(t)) else { continue };
        let jac = 2.0 * map.area();
        for (pt, w) in q.points.iter().zip(&q.weights) {
            let rho: f64 = fulls.iter().map(|f| eval_in(disc, f, t, pt[0], pt[1]).powi(2)).sum::<f64>() / c;
            acc += w * jac * rho * rho;
        }
    }
    disc.area() * acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StripAxis {
    /// Strip parallel to the y axis, centred on the vertical midline.
    Vertical,
    /// Strip parallel to the x axis, centred on the horizontal midline.
    Horizontal,
}

/// Clips a convex polygon to `lo <= coord <= hi` along one axis.
fn clip(poly: &[Point2], vertical: bool, lo: f64, hi: f64) -> Vec<Point2> {
    let coord = |p: &Point2| if vertical { p.x } else { p.y };
    let mut cur = poly.to_vec();
    for (bound, keep_above) in [(lo, true), (hi, false)] {
        let inside = |p: &Point2| if keep_above { coord(p) >= bound } else { coord(p) <= bound };
        let mut next = Vec::with_capacity(cur.len() + 2);
        for i in 0..cur.len() {
            let a = cur[i];
            let b = cur[(i + 1) % cur.len()];
            let (ia, ib) = (inside(&a), inside(&b));
            if ia {
                next.push(a);
            }
            if ia != ib {
                let t = (bound - coord(&a)) / (coord(&b) - coord(&a));
                next.push(a.lerp(b, t));
            }
        }
        cur = next;
        if cur.is_empty() {
            break;
        }
    }
    cur
}

fn density_strip(disc: &Discretization, fulls: &[Vec<f64>], axis: StripAxis, width: f64) -> f64 {
    let (x0, x1, y0, y1) = disc.region.bounding_box();
    let vertical = axis == StripAxis::Vertical;
    let (lo, hi) = if vertical { (x0, x1) } else { (y0, y1) };
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * width * (hi - lo);
    let (slo, shi) = (mid - half, mid + half);
    let q = QuadratureRule::degree4();
    let c = fulls.len() as f64;
    let mut acc = 0.0;
    for t in 0..disc.mesh.triangles.len() {
        let tri = disc.mesh.triangle(t);
        let Ok(map) = AffineMap::new(&tri) else { continue };
        let poly = clip(&tri, vertical, slo, shi);
        for k in 1..poly.len().saturating_sub(1) {
            let sub = [poly[0], poly[k], poly[k + 1]];
            let Ok(sub_map) = AffineMap::new(&sub) else { continue };
            let jac = 2.0 * sub_map.area();
            for (pt, w) in q.points.iter().zip(&q.weights) {
                let (xi, eta) = map.inverse(sub_map.forward(pt[0], pt[1]));
                let rho: f64 = fulls.iter().map(|f| eval_in(disc, f, t, xi, eta).powi(2)).sum::<f64>() / c;
                acc += w * jac * rho;
            }
        }
    }
    acc
}

fn check_width(width: f64) -> Result<()> {
    if !(width > 0.0 && width <= 1.0) {
        return Err(Error::InvalidParams(format!("strip width fraction must lie in (0, 1], got {width}")));
    }
    Ok(())
}

/// Inverse participation ratio `Area * integral |psi|^4` of a normalized state.
pub fn ipr(disc: &Discretization, coeffs: &[f64]) -> Result<f64> {
    check_normalized(disc, coeffs)?;
    Ok(density_ipr(disc, &[disc.dofs.expand(coeffs)]))
}

/// Probability in the central strip of relative width `width` along `axis`.
pub fn strip_mass(disc: &Discretization, coeffs: &[f64], axis: StripAxis, width: f64) -> Result<f64> {
    check_width(width)?;
    check_normalized(disc, coeffs)?;
    Ok(density_strip(disc, &[disc.dofs.expand(coeffs)], axis, width))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Ipr,
    VStrip,
    HStrip,
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ipr" => Ok(Metric::Ipr),
            "vstrip" => Ok(Metric::VStrip),
            "hstrip" => Ok(Metric::HStrip),
            _ => Err(Error::Parse(format!("unknown metric `{s}` (expected ipr, vstrip or hstrip)"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Ipr => "ipr",
            Metric::VStrip => "vstrip",
            Metric::HStrip => "hstrip",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScarReport {
    /// 1-based state index.
    pub n: usize,
    pub k: f64,
    pub ipr: f64,
    pub vstrip_mass: f64,
    pub hstrip_mass: f64,
}

impl ScarReport {
    pub fn metric(&self, m: Metric) -> f64 {
        match m {
            Metric::Ipr => self.ipr,
            Metric::VStrip => self.vstrip_mass,
            Metric::HStrip => self.hstrip_mass,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScarConfig {
    pub metric: Metric,
    pub strip_width: f64,
    /// Relative k spacing below which states are treated as one eigenspace.
    pub cluster_tol: f64,
}

impl Default for ScarConfig {
    fn default() -> Self {
        Self { metric: Metric::VStrip, strip_width: DEFAULT_STRIP_WIDTH, cluster_tol: 1e-4 }
    }
}

/// Scores states `first..=last` (1-based) and sorts them by descending metric.
/// States within `cluster_tol` of each other in k share the metrics of their
/// cluster-averaged density.
pub fn rank_scar_candidates(
    disc: &Discretization,
    spectrum: &Spectrum,
    first: usize,
    last: usize,
    config: &ScarConfig,
) -> Result<Vec<ScarReport>> {
    check_width(config.strip_width)?;
    if first == 0 || last < first || last > spectrum.len() {
        return Err(Error::InvalidParams(format!(
            "state range {first}..={last} outside 1..={}",
            spectrum.len()
        )));
    }
    let states = &spectrum.pairs[first - 1..last];
    let mut reports = Vec::with_capacity(states.len());
    let mut start = 0;
    while start < states.len() {
        let mut end = start + 1;
        while end < states.len() && states[end].k - states[end - 1].k <= config.cluster_tol * states[end].k {
            end += 1;
        }
        let mut fulls = Vec::with_capacity(end - start);
        for s in &states[start..end] {
            check_normalized(disc, &s.coeffs)?;
            fulls.push(disc.dofs.expand(&s.coeffs));
        }
        let ipr = density_ipr(disc, &fulls);
        let v = density_strip(disc, &fulls, StripAxis::Vertical, config.strip_width);
        let h = density_strip(disc, &fulls, StripAxis::Horizontal, config.strip_width);
        for (i, s) in states[start..end].iter().enumerate() {
            reports.push(ScarReport { n: first + start + i, k: s.k, ipr, vstrip_mass: v, hstrip_mass: h });
        }
        start = end;
    }
    reports.sort_by(|a, b| b.metric(config.metric).total_cmp(&a.metric(config.metric)).then(a.n.cmp(&b.n)));
    Ok(reports)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderMode {
    Psi,
    Density,
}

impl FromStr for RenderMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi" => Ok(RenderMode::Psi),
            "density" => Ok(RenderMode::Density),
            _ => Err(Error::Parse(format!("unknown render mode `{s}` (expected psi or density)"))),
        }
    }
}

impl fmt::Display for RenderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RenderMode::Psi => "psi",
            RenderMode::Density => "density",
        })
    }
}

/// Binary PGM (P5). The top image row is `ymax`; masked pixels are 0.
pub fn render_pgm(grid: &FieldGrid, mode: RenderMode) -> Vec<u8> {
    let mut out = format!("P5 {} {} 255\n", grid.nx, grid.ny).into_bytes();
    let inside = || grid.values.iter().zip(&grid.mask).filter(|(_, m)| **m).map(|(v, _)| *v);
    let scale = match mode {
        RenderMode::Density => inside().map(|v| v * v).fold(0.0, f64::max),
        RenderMode::Psi => inside().map(f64::abs).fold(0.0, f64::max),
    };
    for j in (0..grid.ny).rev() {
        for i in 0..grid.nx {
            let idx = j * grid.nx + i;
            let px = if !grid.mask[idx] {
                0
            } else {
                let v = grid.values[idx];
                match mode {
                    RenderMode::Density if scale > 0.0 => (255.0 * v * v / scale).round() as u8,
                    RenderMode::Density => 0,
                    RenderMode::Psi if scale > 0.0 => (128.0 + 127.0 * v / scale).round() as u8,
                    RenderMode::Psi => 128,
                }
            };
            out.push(px);
        }
    }
    out
}

#[cfg(test)]
mod tests;
