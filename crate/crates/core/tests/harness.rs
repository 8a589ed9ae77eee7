mod common;

use common::short;
use toolmorph_core::continual::Algorithm;
use toolmorph_core::harness::*;
use toolmorph_core::scenarios::ScenarioId;

fn small(id: ScenarioId) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(id);
    c.runs = 2;
    c.test_size = 10;
    c.algorithms = vec![Algorithm::Ours, Algorithm::BaselineDiffhand];
    c.spec = toml::from_str("n = 10\n[world]\nhorizon = 60\n").unwrap();
    c
}

fn read(p: &std::path::Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn experiment_bookkeeping_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(ScenarioId::Pushing);
    let a = run_experiment(&cfg, &dir.path().join("a")).unwrap();
    let b = run_experiment(&cfg, &dir.path().join("b")).unwrap();
    assert_eq!(a.records.len(), 4);
    assert_eq!(a.summaries.len(), 2);
    assert_eq!(a.summaries, b.summaries);
    assert_eq!(a.warnings, 0);
    for f in [
        "final.csv",
        "report.csv",
        "config.toml",
        "spec.toml",
        "runs/run0_ours.csv",
        "runs/run1_baseline_diffhand.csv",
        "geometry/run0_ours.txt",
        "geometry/run1_ours.svg",
    ] {
        assert_eq!(read(&dir.path().join("a").join(f)), read(&dir.path().join("b").join(f)), "{f}");
    }
    for r in &a.records {
        let rate = r.success_rate.unwrap();
        assert!((0.0..=1.0).contains(&rate));
    }
}

#[test]
fn report_statistics_recompute_from_final_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(ScenarioId::Flipping);
    let report = run_experiment(&cfg, dir.path()).unwrap();
    let text = read(&dir.path().join("final.csv"));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    for s in &report.summaries {
        let mine: Vec<&Vec<String>> = rows.iter().filter(|r| r[col("algorithm")] == s.algorithm.name()).collect();
        let losses: Vec<f64> = mine.iter().map(|r| r[col("test_loss")].parse().unwrap()).collect();
        let n = losses.len() as f64;
        let mean = losses.iter().sum::<f64>() / n;
        let std = (losses.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((mean - s.mean_test_loss).abs() <= 1e-12 * mean.abs().max(1.0));
        assert!((std - s.std_test_loss).abs() <= 1e-12 * std.abs().max(1.0));
        let rates: Vec<f64> = mine.iter().map(|r| r[col("success_rate")].parse().unwrap()).collect();
        let m = rates.iter().sum::<f64>() / n;
        assert!((m - s.mean_success_rate.unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn winding_reports_loss_without_success_rate() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ScenarioId::Winding);
    cfg.runs = 1;
    cfg.test_size = 3;
    cfg.algorithms = vec![Algorithm::BaselineDiffhand];
    let report = run_experiment(&cfg, dir.path()).unwrap();
    assert!(report.records[0].success_rate.is_none());
    assert!(report.summaries[0].mean_success_rate.is_none());
    assert!(report.summaries[0].mean_test_loss.is_finite());
}

#[test]
fn test_set_overlapping_training_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ScenarioId::Pushing);
    cfg.test_seed = 1;
    assert!(run_experiment(&cfg, dir.path()).is_err());
}

#[test]
fn landscape_grid_bookkeeping() {
    let s = short(ScenarioId::Reaching, 50);
    let land = evaluate_landscape(&s, &LandscapeSpec::new([0, 1], 2)).unwrap();
    let mut buf = Vec::new();
    land.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert_eq!(land.failed, 0);
    assert!(evaluate_landscape(&s, &LandscapeSpec::new([1, 1], 4)).is_err());
    assert!(evaluate_landscape(&s, &LandscapeSpec::new([0, 2], 4)).is_err());
    let mut bad = LandscapeSpec::new([0, 1], 4);
    bad.ranges = Some([[0.0, 0.2], [0.1, 0.2]]);
    assert!(evaluate_landscape(&s, &bad).is_err());
}

#[test]
fn reaching_slice_refines_smoothly() {
    let s = short(ScenarioId::Reaching, 200);
    let coarse = evaluate_landscape(&s, &LandscapeSpec::new([0, 1], 11)).unwrap();
    let fine = evaluate_landscape(&s, &LandscapeSpec::new([0, 1], 21)).unwrap();
    assert!(coarse.loss.iter().chain(&fine.loss).all(|l| l.is_finite()));
    let ratio = fine.max_adjacent_difference() / coarse.max_adjacent_difference();
    assert!((0.35..0.65).contains(&ratio), "ratio {ratio}");
}

#[test]
fn geometry_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let s = short(ScenarioId::Flipping, 10);
    let (txt, svg) = export_geometry(&s, &s.spec.theta0, &dir.path().join("base")).unwrap();
    let back = parse_polygon(&read(&txt)).unwrap();
    assert_eq!(back, s.spec.tool.as_ref().unwrap().boundary);
    assert!(read(&svg).starts_with("<svg"));

    let theta: Vec<f64> = s.spec.lower.iter().zip(&s.spec.upper).map(|(l, u)| 0.3 * l + 0.7 * u).collect();
    let (txt, _) = export_geometry(&s, &theta, &dir.path().join("opt")).unwrap();
    let back = parse_polygon(&read(&txt)).unwrap();
    let shape = s.deformed(&theta).unwrap();
    assert_eq!(back.len(), s.tool().unwrap().num_vertices());
    for (a, b) in back.iter().zip(&shape.vertices) {
        assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    }
    let again = export_geometry(&s, &theta, &dir.path().join("opt")).unwrap();
    assert_eq!(read(&again.0), read(&txt));
    assert!(parse_polygon("1 2 3\n").is_err());
    assert!(export_geometry(&s, &vec![1.0; s.dim()], &dir.path().join("bad")).is_err());
}

#[test]
fn rollout_dump_has_tangent_columns() {
    let dir = tempfile::tempdir().unwrap();
    let s = short(ScenarioId::Pushing, 20);
    let path = dir.path().join("r.csv");
    dump_rollout(&s, &s.variation(0, 0), &s.spec.theta0, &path).unwrap();
    let text = read(&path);
    assert!(text.starts_with("step,channel,value,d0,d1,d2,d3,d4,d5,d6\n"));
    assert_eq!(text.lines().count(), 1 + 21 * 6);
}
