//! Exact-vs-FEM comparison, mesh-refinement error and the polygon limit.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::eigensolve::{SolverOpts, Spectrum};
use crate::error::{Error, Result};
use crate::field::ScarReport;
use crate::geometry::{Region, RegionSpec};
use crate::mesh::MeshParams;
use crate::oracle::{circle_spectrum, rectangle_spectrum, triangle_spectrum, ExactLevel};
use crate::pipeline::{run_pipeline, Discretization, StageError};

/// Relative tolerance for merging nearly equal eigenvalues.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationRow {
    pub n: usize,
    pub k_exact: f64,
    pub k_fem: f64,
    pub delta_pct: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefinementRow {
    pub n: usize,
    pub k_h: f64,
    pub k_h2: f64,
    pub epsilon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolygonLimitRow {
    pub sides: usize,
    pub k1: f64,
    pub circle_gap_pct: f64,
}

/// `|k_h - k_h2| / k_h2`.
pub fn refinement_error(k_h: f64, k_h2: f64) -> Result<f64> {
    if !(k_h2 > 0.0) {
        return Err(Error::NonpositiveDenominator(k_h2));
    }
    Ok((k_h - k_h2).abs() / k_h2)
}

pub fn delta_pct(k_exact: f64, k_fem: f64) -> f64 {
    100.0 * (k_fem - k_exact).abs() / k_exact
}

/// Exact levels for the regions with a closed-form spectrum.
pub fn exact_spectrum(region: &Region, count: usize) -> Result<Vec<ExactLevel>> {
    match *region.spec() {
        RegionSpec::Circle { radius } => circle_spectrum(radius, count),
        RegionSpec::EquilateralTriangle { side } => triangle_spectrum(side, count),
        RegionSpec::Rectangle { width, height } => rectangle_spectrum(width, height, count),
        ref other => Err(Error::UnsupportedRegionForOracle(other.kind().to_string())),
    }
}

/// Pairs the n-th exact level with the n-th FEM level.
pub fn validate_against_oracle(exact: &[ExactLevel], fem: &Spectrum) -> Result<Vec<ValidationRow>> {
    if fem.len() < exact.len() {
        return Err(Error::LengthMismatch(format!("{} exact levels but only {} computed", exact.len(), fem.len())));
    }
    Ok(exact
        .iter()
        .zip(&fem.pairs)
        .enumerate()
        .map(|(i, (e, p))| ValidationRow { n: i + 1, k_exact: e.k, k_fem: p.k, delta_pct: delta_pct(e.k, p.k) })
        .collect())
}

/// Rows for 1-based `indices`, pairing levels by sorted position.
pub fn refinement_rows(coarse: &[f64], fine: &[f64], indices: &[usize]) -> Result<Vec<RefinementRow>> {
    let mut rows = Vec::with_capacity(indices.len());
    for &n in indices {
        if n == 0 || n > coarse.len() || n > fine.len() {
            return Err(Error::LengthMismatch(format!(
                "index {n} outside the computed range 1..={}",
                coarse.len().min(fine.len())
            )));
        }
        let (k_h, k_h2) = (coarse[n - 1], fine[n - 1]);
        rows.push(RefinementRow { n, k_h, k_h2, epsilon: refinement_error(k_h, k_h2)? });
    }
    Ok(rows)
}

/// Sorted, deduplicated copy of `indices`, and whether duplicates were dropped.
pub fn dedup_indices(indices: &[usize]) -> (Vec<usize>, bool) {
    let mut v = indices.to_vec();
    v.sort_unstable();
    let before = v.len();
    v.dedup();
    let dropped = v.len() != before;
    (v, dropped)
}

/// Solves on the mesh for `params` and on one with half the cell measure
/// (same chord tolerance), then reports the refinement error per index.
pub fn convergence_study(
    region: &Region,
    params: MeshParams,
    order: u8,
    indices: &[usize],
    opts: &SolverOpts,
) -> std::result::Result<Vec<RefinementRow>, StageError> {
    let (indices, _) = dedup_indices(indices);
    let need = indices.last().copied().unwrap_or(0);
    if need == 0 || indices[0] == 0 {
        return Err(StageError::solve(Error::InvalidParams("indices must be positive".into())));
    }
    let opts = SolverOpts { num_states: need.max(opts.num_states), ..opts.clone() };
    let (coarse, fine) = std::thread::scope(|s| {
        let fine = s.spawn(|| run_pipeline(region, params.halved(), order, &opts));
        let coarse = run_pipeline(region, params, order, &opts);
        (coarse, fine.join().expect("refinement run panicked"))
    });
    let (coarse, fine) = (coarse?, fine?);
    refinement_rows(&coarse.spectrum.wavenumbers(), &fine.spectrum.wavenumbers(), &indices)
        .map_err(StageError::solve)
}

/// Ground-state wavenumber of inscribed regular polygons against the disk.
pub fn polygon_limit_study(
    sides: &[usize],
    circumradius: f64,
    params: MeshParams,
    order: u8,
    opts: &SolverOpts,
) -> std::result::Result<Vec<PolygonLimitRow>, StageError> {
    let k_circle = circle_spectrum(circumradius, 1).map_err(StageError::solve)?[0].k;
    let opts = SolverOpts { num_states: 1, ..opts.clone() };
    let mut rows = Vec::with_capacity(sides.len());
    for &n in sides {
        let region = Region::new(RegionSpec::RegularPolygon { sides: n, circumradius })
            .map_err(StageError::mesh)?;
        let disc = Discretization::build(&region, params, order)?;
        let k1 = disc.solve(&opts)?.pairs[0].k;
        rows.push(PolygonLimitRow { sides: n, k1, circle_gap_pct: 100.0 * (k1 - k_circle) / k_circle });
    }
    Ok(rows)
}

/// Greedy clustering of sorted values; each cluster is reported as its mean
/// and size.
pub fn pair_degenerate(ks: &[f64], cluster_tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    while start < ks.len() {
        let mut end = start + 1;
        while end < ks.len() && (ks[end] - ks[end - 1]).abs() <= cluster_tol * ks[end].abs() {
            end += 1;
        }
        let mean = ks[start..end].iter().sum::<f64>() / (end - start) as f64;
        out.push((mean, end - start));
        start = end;
    }
    out
}

/// Writes via a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "missing file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

fn table<T>(header: &str, rows: &[T], line: impl Fn(&mut String, usize, &T)) -> String {
    let mut s = String::with_capacity(header.len() + 1 + rows.len() * 64);
    s.push_str(header);
    s.push('\n');
    for (i, r) in rows.iter().enumerate() {
        line(&mut s, i, r);
        s.push('\n');
    }
    s
}

/// Rows `n,k,E` with `E = k^2 / 2`.
pub fn eigenvalues_csv(spectrum: &Spectrum) -> String {
    table("n,k,E", &spectrum.pairs, |s, i, p| {
        let _ = write!(s, "{},{},{}", i + 1, p.k, 0.5 * p.lambda);
    })
}

pub fn validation_csv(rows: &[ValidationRow]) -> String {
    table("n,k_exact,k_fem,delta_pct", rows, |s, _, r| {
        let _ = write!(s, "{},{},{},{}", r.n, r.k_exact, r.k_fem, r.delta_pct);
    })
}

pub fn refinement_csv(rows: &[RefinementRow]) -> String {
    table("n,k_h,k_h2,epsilon", rows, |s, _, r| {
        let _ = write!(s, "{},{},{},{:e}", r.n, r.k_h, r.k_h2, r.epsilon);
    })
}

pub fn polygon_limit_csv(rows: &[PolygonLimitRow]) -> String {
    table("sides,k1,circle_gap_pct", rows, |s, _, r| {
        let _ = write!(s, "{},{},{}", r.sides, r.k1, r.circle_gap_pct);
    })
}

pub fn scars_csv(rows: &[ScarReport]) -> String {
    table("n,k,ipr,vstrip,hstrip", rows, |s, _, r| {
        let _ = write!(s, "{},{},{},{},{}", r.n, r.k, r.ipr, r.vstrip_mass, r.hstrip_mass);
    })
}
