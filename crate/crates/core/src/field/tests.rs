use super::*;
use crate::eigensolve::SolverOpts;
use crate::geometry::{Region, RegionSpec};
use crate::mesh::MeshParams;
use crate::pipeline::run_pipeline;

fn unit_square(h: f64, states: usize) -> crate::pipeline::Solution {
    let r = Region::new(RegionSpec::Rectangle { width: 1.0, height: 1.0 }).unwrap();
    run_pipeline(&r, MeshParams::new(h), 2, &SolverOpts::new(states)).unwrap()
}

#[test]
fn normalization() {
    let s = unit_square(0.1, 1);
    let m = &s.disc.mass;
    let x: Vec<f64> = (0..m.dim()).map(|i| -(1.0 + i as f64)).collect();
    let y = normalize_l2(m, &x).unwrap();
    assert!((m.bilinear(&y, &y) - 1.0).abs() < 1e-12);
    assert!(y.iter().all(|v| *v > 0.0));
    assert!(matches!(normalize_l2(m, &vec![0.0; m.dim()]), Err(Error::ZeroVector)));
    assert!(matches!(ipr(&s.disc, &x), Err(Error::NotNormalized(_))));
}

#[test]
fn square_ground_state_metrics() {
    let s = unit_square(0.005, 1);
    let u = &s.spectrum.pairs[0].coeffs;
    // psi = 2 sin(pi x) sin(pi y)
    let p = ipr(&s.disc, u).unwrap();
    assert!((p - 2.25).abs() < 2e-3, "{p}");
    let exact = 0.1 + (0.1 * std::f64::consts::PI).sin() / std::f64::consts::PI;
    for axis in [StripAxis::Vertical, StripAxis::Horizontal] {
        let m = strip_mass(&s.disc, u, axis, 0.1).unwrap();
        assert!((m - exact).abs() < 1e-3, "{axis:?} {m} vs {exact}");
        let all = strip_mass(&s.disc, u, axis, 1.0).unwrap();
        assert!((all - 1.0).abs() < 1e-10, "{all}");
    }
    assert!(strip_mass(&s.disc, u, StripAxis::Vertical, 0.0).is_err());
    assert!(strip_mass(&s.disc, u, StripAxis::Vertical, 1.5).is_err());
}

#[test]
fn raster_samples_and_pgm() {
    let s = unit_square(0.05, 1);
    let u = &s.spectrum.pairs[0].coeffs;
    let grid = GridSpec::covering(&s.disc, 101, 101).unwrap();
    let f = evaluate_eigenfunction(&s.disc, u, &grid).unwrap();
    assert_eq!(f.unlocated, 0);
    assert!(f.mask.iter().all(|m| *m));
    assert!((f.value(50, 50) - 2.0).abs() < 3e-2, "{}", f.value(50, 50));
    assert!((f.mass() - 1.0).abs() < 2e-2, "{}", f.mass());
    // reflection symmetry x -> 1 - x of the density, in L1
    let (mut diff, mut total) = (0.0, 0.0);
    for j in 0..101 {
        for i in 0..101 {
            diff += (f.value(i, j).powi(2) - f.value(100 - i, j).powi(2)).abs();
            total += f.value(i, j).powi(2);
        }
    }
    assert!(diff < 0.01 * total, "{}", diff / total);

    let img = render_pgm(&f, RenderMode::Psi);
    let header = b"P5 101 101 255\n";
    assert_eq!(&img[..header.len()], header);
    assert_eq!(img.len(), header.len() + 101 * 101);
    assert!(img[header.len()..].iter().all(|&p| p >= 127));
    let dens = render_pgm(&f, RenderMode::Density);
    assert_eq!(dens[header.len() + 50 * 101 + 50], 255);
}

#[test]
fn pgm_extremes_and_orientation() {
    let f = FieldGrid {
        nx: 2,
        ny: 2,
        bbox: (0.0, 1.0, 0.0, 1.0),
        values: vec![0.0, 0.0, 3.0, -3.0],
        mask: vec![true, false, true, true],
        unlocated: 0,
    };
    let d = render_pgm(&f, RenderMode::Density);
    let h = b"P5 2 2 255\n".len();
    // top row first (ymax)
    assert_eq!(&d[h..], &[255, 255, 0, 0]);
    let p = render_pgm(&f, RenderMode::Psi);
    assert_eq!(&p[h..], &[255, 1, 128, 0]);
}

#[test]
fn locator_finds_vertices() {
    let s = unit_square(0.1, 1);
    let loc = PointLocator::new(&s.disc);
    for v in &s.disc.mesh.vertices {
        assert!(loc.locate(*v).is_some());
    }
    assert!(loc.locate(Point2::new(2.0, 0.5)).is_none());
}

#[test]
fn scar_ranking_shares_cluster_metrics() {
    let s = unit_square(0.01, 6);
    let cfg = ScarConfig::default();
    let r = rank_scar_candidates(&s.disc, &s.spectrum, 1, 6, &cfg).unwrap();
    assert_eq!(r.len(), 6);
    for w in r.windows(2) {
        assert!(w[0].vstrip_mass >= w[1].vstrip_mass);
    }
    // states 2 and 3 are the degenerate (1,2)/(2,1) pair
    let a = r.iter().find(|x| x.n == 2).unwrap();
    let b = r.iter().find(|x| x.n == 3).unwrap();
    assert_eq!(a.ipr, b.ipr);
    assert!((a.vstrip_mass - a.hstrip_mass).abs() < 1e-3);
    assert!(a.ipr <= 2.25 + 1e-3);
    assert!(rank_scar_candidates(&s.disc, &s.spectrum, 0, 3, &cfg).is_err());
    assert!(rank_scar_candidates(&s.disc, &s.spectrum, 2, 7, &cfg).is_err());
}

#[test]
fn names_round_trip() {
    for m in [Metric::Ipr, Metric::VStrip, Metric::HStrip] {
        assert_eq!(m.to_string().parse::<Metric>().unwrap(), m);
    }
    for m in [RenderMode::Psi, RenderMode::Density] {
        assert_eq!(m.to_string().parse::<RenderMode>().unwrap(), m);
    }
    assert!("bogus".parse::<Metric>().is_err());
}
