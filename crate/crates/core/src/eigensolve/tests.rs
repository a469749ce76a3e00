use super::*;
use crate::assembly::{assemble, ElementBasis};
use crate::geometry::{Region, RegionSpec};
use crate::mesh::{generate_mesh, MeshParams};

fn assembled(spec: RegionSpec, h: f64, order: u8) -> crate::assembly::Assembled {
    let r = Region::new(spec).unwrap();
    let mesh = generate_mesh(&r, MeshParams::new(h)).unwrap();
    assemble(&mesh, &ElementBasis::new(order).unwrap()).unwrap()
}

fn unit_square() -> RegionSpec {
    RegionSpec::Rectangle { width: 1.0, height: 1.0 }
}

#[test]
fn identity_pencil() {
    let i = SparseSymMatrix::identity(7);
    let s = smallest_eigenpairs(&i, &i, &SolverOpts::new(3)).unwrap();
    assert_eq!(s.len(), 3);
    for p in &s.pairs {
        assert!((p.lambda - 1.0).abs() < 1e-14);
    }
}

#[test]
fn diagonal_pencil() {
    let k = SparseSymMatrix::from_diagonal(&[1.0, 4.0, 9.0]);
    let s = smallest_eigenpairs(&k, &SparseSymMatrix::identity(3), &SolverOpts::new(2)).unwrap();
    assert!((s.pairs[0].lambda - 1.0).abs() < 1e-14);
    assert!((s.pairs[1].lambda - 4.0).abs() < 1e-14);
}

#[test]
fn options_are_validated() {
    let i = SparseSymMatrix::identity(4);
    for o in [
        SolverOpts { num_states: 0, ..SolverOpts::default() },
        SolverOpts { rel_residual_tol: 1e-3, ..SolverOpts::new(1) },
        SolverOpts { rel_residual_tol: 0.0, ..SolverOpts::new(1) },
        SolverOpts { shift: -1.0, ..SolverOpts::new(1) },
        SolverOpts::new(5),
    ] {
        assert!(smallest_eigenpairs(&i, &i, &o).is_err());
    }
    let j = SparseSymMatrix::identity(5);
    assert!(matches!(
        smallest_eigenpairs(&i, &j, &SolverOpts::new(1)),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn matches_dense_oracle_on_small_meshes() {
    for (spec, h, order) in [
        (unit_square(), 0.003, 1),
        (RegionSpec::default_stadium(), 0.02, 1),
        (RegionSpec::Circle { radius: 1.0 }, 0.08, 2),
    ] {
        let a = assembled(spec, h, order);
        let n = a.stiffness.dim();
        assert!(n <= 300 && n > 60, "n = {n}");
        let (dense, _) = dense_generalized_eigen(&a.stiffness, &a.mass).unwrap();
        let s = smallest_eigenpairs(&a.stiffness, &a.mass, &SolverOpts::new(8)).unwrap();
        assert!(s.inertia_verified);
        for (p, d) in s.pairs.iter().zip(&dense) {
            assert!((p.lambda - d).abs() <= 1e-9 * d, "{} vs {d}", p.lambda);
        }
        assert!(orthonormality_defect(&a.mass, &s) <= 1e-8);
        for r in residual_report(&a.stiffness, &a.mass, &s).unwrap() {
            assert!(r <= 1e-9);
        }
    }
}

#[test]
fn square_ground_state_is_an_upper_bound() {
    let exact = 2.0 * std::f64::consts::PI.powi(2);
    let mut last = f64::INFINITY;
    for h in [0.02, 0.005, 0.00125] {
        let a = assembled(unit_square(), h, 1);
        let s = smallest_eigenpairs(&a.stiffness, &a.mass, &SolverOpts::new(1)).unwrap();
        let l = s.pairs[0].lambda;
        assert!(l >= exact && l < last, "{l}");
        last = l;
    }
}

#[test]
fn many_states_across_windows() {
    let a = assembled(RegionSpec::default_stadium(), 0.004, 1);
    let opts = SolverOpts::new(120);
    let s = smallest_eigenpairs(&a.stiffness, &a.mass, &opts).unwrap();
    assert_eq!(s.len(), 120);
    assert!(s.pairs.windows(2).all(|w| w[0].lambda <= w[1].lambda));
    let sym = Symbolic::analyze(&a.stiffness);
    let top = s.pairs[119].lambda * (1.0 + 1e-9);
    assert!(count_below(&a.stiffness, &a.mass, &sym, top).unwrap() >= 120);
    let below = count_below(&a.stiffness, &a.mass, &sym, s.pairs[119].lambda * (1.0 - 1e-9)).unwrap();
    assert!(below < 120);
    assert!(orthonormality_defect(&a.mass, &s) <= 1e-8);
    assert!(s.pairs.iter().all(|p| p.converged && p.residual <= 1e-9));
}

#[test]
fn shift_invariance_and_determinism() {
    let a = assembled(RegionSpec::Circle { radius: 1.0 }, 0.01, 2);
    let base = smallest_eigenpairs(&a.stiffness, &a.mass, &SolverOpts::new(12)).unwrap();
    let again = smallest_eigenpairs(&a.stiffness, &a.mass, &SolverOpts::new(12)).unwrap();
    for (x, y) in base.pairs.iter().zip(&again.pairs) {
        assert!((x.lambda - y.lambda).abs() <= 1e-12 * x.lambda);
    }
    let shifted = SolverOpts { shift: base.pairs[0].lambda / 2.0, ..SolverOpts::new(12) };
    let s = smallest_eigenpairs(&a.stiffness, &a.mass, &shifted).unwrap();
    for (x, y) in base.pairs.iter().zip(&s.pairs) {
        assert!((x.lambda - y.lambda).abs() <= 1e-9 * x.lambda);
    }
}

#[test]
fn iterative_fallback_agrees() {
    let a = assembled(RegionSpec::default_stadium(), 0.01, 1);
    let opts = SolverOpts::new(6);
    let s = smallest_eigenpairs(&a.stiffness, &a.mass, &opts).unwrap();
    let f = smallest_eigenpairs_iterative(&a.stiffness, &a.mass, &opts).unwrap();
    for (x, y) in s.pairs.iter().zip(&f.pairs) {
        assert!((x.lambda - y.lambda).abs() <= 1e-8 * x.lambda);
    }
}

#[test]
fn residual_report_detects_perturbation() {
    // K = [[2, 1], [1, 2]], M = I: eigenpairs (1, [1, -1]/sqrt2), (3, [1, 1]/sqrt2).
    let k = SparseSymMatrix::from_triplets(2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)]);
    let m = SparseSymMatrix::identity(2);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let exact = Spectrum {
        pairs: vec![EigenPair { lambda: 1.0, k: 1.0, coeffs: vec![r, -r], residual: 0.0, converged: true }],
        ..Spectrum::default()
    };
    assert!(residual_report(&k, &m, &exact).unwrap()[0] <= 1e-14);
    let mut bent = exact.clone();
    bent.pairs[0].coeffs = vec![r + 1e-3 * r, -r + 1e-3 * r];
    let res = residual_report(&k, &m, &bent).unwrap()[0];
    assert!(res > 1e-5 && res < 1e-1, "{res}");
}

#[test]
fn energies_are_half_k_squared() {
    let s = Spectrum {
        pairs: vec![EigenPair { lambda: 2.4048f64.powi(2), k: 2.4048, coeffs: vec![], residual: 0.0, converged: true }],
        ..Spectrum::default()
    };
    assert!((energies(&s)[0] - 2.891_531_52).abs() < 1e-8);
}
