use std::path::Path;
use std::process::{Command, Output};

fn billiard(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_billiard"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn col(rows: &[Vec<String>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn solve_disk() {
    let d = tempfile::tempdir().unwrap();
    let o = billiard(d.path(), &["solve", "--region", "circle r=1", "--h", "1e-3", "--states", "16"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(d.path().join("eigs.csv")).unwrap();
    assert!(text.starts_with("n,k,E\n"));
    let rows = csv(&d.path().join("eigs.csv"));
    assert_eq!(rows.len(), 16);
    let k = col(&rows, 1);
    assert!(k[0] > 2.405 && k[0] < 2.410, "{}", k[0]);
    assert!(k.windows(2).all(|w| w[0] <= w[1]));
    let e = col(&rows, 2);
    assert!((e[0] - 0.5 * k[0] * k[0]).abs() < 1e-12);
    let meta = std::fs::read_to_string(d.path().join("run.meta")).unwrap();
    for key in ["command = solve", "region = circle r=1", "h = 0.001", "chord-tol = ", "order = 2", "states = 16", "tol = "] {
        assert!(meta.contains(key), "missing `{key}` in\n{meta}");
    }
}

#[test]
fn solve_triangle_upper_bound() {
    let d = tempfile::tempdir().unwrap();
    let o = billiard(
        d.path(),
        &["solve", "--region", "triangle equilateral side=1", "--h", "1e-3", "--order", "2", "--states", "1"],
    );
    assert!(o.status.success());
    let k = col(&csv(&d.path().join("eigs.csv")), 1)[0];
    assert!((7.2552..=7.2560).contains(&k), "{k}");
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        &["solve", "--states", "0"][..],
        &["solve", "--region", "blob r=1"],
        &["solve", "--order", "3"],
        &["solve", "--h", "-1"],
        &["polygon-limit", "--sides", "2"],
        &["scars", "--indices", "5-1"],
        &["render", "--resolution", "1x1"],
        &["frobnicate"],
    ] {
        let o = billiard(d.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn validate_regions() {
    let d = tempfile::tempdir().unwrap();
    let o = billiard(d.path(), &["validate", "--region", "star", "--states", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("closed-form"));

    let o = billiard(d.path(), &["validate", "--region", "circle r=1", "--h", "4e-3", "--states", "16"]);
    assert!(o.status.success());
    let rows = csv(&d.path().join("validation.csv"));
    assert_eq!(rows.len(), 16);
    assert!(col(&rows, 3).iter().all(|&v| v > 0.0));

    let o = billiard(d.path(), &["validate", "--region", "square", "--h", "1e-3", "--states", "10"]);
    assert!(o.status.success());
    let rows = csv(&d.path().join("validation.csv"));
    assert!(col(&rows, 3).iter().all(|&v| v > 0.0 && v <= 0.1));
}

#[test]
fn converge_dedups_indices() {
    let d = tempfile::tempdir().unwrap();
    let o = billiard(d.path(), &["converge", "--region", "square", "--h", "0.02", "--indices", "3,1,3"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("duplicate"));
    let text = std::fs::read_to_string(d.path().join("refinement.csv")).unwrap();
    assert!(text.starts_with("n,k_h,k_h2,epsilon\n"));
    let rows = csv(&d.path().join("refinement.csv"));
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["1", "3"]);
    assert!(col(&rows, 3).iter().all(|&e| e > 0.0));
}

#[test]
fn polygon_limit_rows() {
    let d = tempfile::tempdir().unwrap();
    let o = billiard(d.path(), &["polygon-limit", "--sides", "3,6,12", "--h", "0.01"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv(&d.path().join("polygon_limit.csv"));
    assert_eq!(rows.len(), 3);
    let k = col(&rows, 1);
    assert!(k[0] > k[1] && k[1] > k[2]);
    assert!(col(&rows, 2).iter().all(|&g| g > 0.0));
}

#[test]
fn render_images() {
    let d = tempfile::tempdir().unwrap();
    let o = billiard(
        d.path(),
        &["render", "--region", "stadium", "--h", "0.01", "--indices", "1", "--resolution", "256x256", "--mode", "psi"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let img = std::fs::read(d.path().join("state_1.pgm")).unwrap();
    let header = b"P5 256 256 255\n";
    assert_eq!(&img[..header.len()], header);
    assert_eq!(img.len(), header.len() + 256 * 256);
    // ground state has one sign; masked pixels are 0
    assert!(img[header.len()..].iter().all(|&p| p == 0 || p >= 126));

    let o = billiard(d.path(), &["render", "--h", "0.05", "--states", "2", "--indices", "3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn scars_ranking() {
    let d = tempfile::tempdir().unwrap();
    let o = billiard(
        d.path(),
        &["scars", "--h", "0.01", "--indices", "1-20", "--top", "2", "--resolution", "64x32"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(d.path().join("scars.csv")).unwrap();
    assert!(text.starts_with("n,k,ipr,vstrip,hstrip\n"));
    let rows = csv(&d.path().join("scars.csv"));
    assert_eq!(rows.len(), 20);
    let v = col(&rows, 3);
    assert!(v.windows(2).all(|w| w[0] >= w[1]));
    assert!(v.iter().all(|&x| (0.0..=1.0).contains(&x)));
    assert!(col(&rows, 2).iter().all(|&x| x >= 1.0 - 1e-9));
    let pgms = std::fs::read_dir(d.path()).unwrap().filter(|e| {
        e.as_ref().unwrap().path().extension().is_some_and(|x| x == "pgm")
    });
    assert_eq!(pgms.count(), 2);
}

#[test]
fn config_file_and_flag_override() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    std::fs::write(&cfg, "# disk run\nregion = circle r=1\nh = 0.01\nstates = 4\n").unwrap();
    let o = billiard(d.path(), &["solve", "--config", cfg.to_str().unwrap(), "--states", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv(&d.path().join("eigs.csv")).len(), 3);
    let first = std::fs::read(d.path().join("eigs.csv")).unwrap();

    // run.meta replays the same run
    let replay = tempfile::tempdir().unwrap();
    let meta = d.path().join("run.meta");
    let o = billiard(replay.path(), &["solve", "--config", meta.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(replay.path().join("eigs.csv")).unwrap(), first);

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    let o = billiard(d.path(), &["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pipeline_failure_names_stage() {
    let d = tempfile::tempdir().unwrap();
    let o = billiard(d.path(), &["solve", "--region", "circle r=1", "--h", "0.5", "--states", "500"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eigensolve stage failed"));
}
