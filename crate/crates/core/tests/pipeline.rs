use std::path::{Path, PathBuf};
use std::process::Command;

use crack_imaging::cli::{
    export_map, parse_config, read_csv, render_config, run_pipeline, write_pgm,
};
use crack_imaging::imaging::MapMetadata;
use crack_imaging::{Convention, ImagingGrid, ImagingMap, Point2};
use num_complex::Complex64;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn small_map(magnitude: Vec<f64>, nx: usize, ny: usize) -> ImagingMap {
    ImagingMap {
        grid: ImagingGrid::new(Point2::ORIGIN, 1.0, nx, ny).unwrap(),
        values: magnitude.iter().map(|&m| Complex64::new(m, 0.0)).collect(),
        magnitude,
        metadata: MapMetadata {
            n: 4,
            k: 1,
            omegas: vec![10.0],
            ranks: vec![1],
            convention: Convention::Symmetric,
        },
    }
}

#[test]
fn shipped_scenarios_parse_and_round_trip() {
    for name in [
        "fig1a_three_small.toml",
        "fig1b_long_arc.toml",
        "fig1c_two_close.toml",
    ] {
        let text = std::fs::read_to_string(scenarios().join(name)).unwrap();
        let cfg = parse_config(&text).unwrap();
        assert_eq!(parse_config(&render_config(&cfg)).unwrap(), cfg, "{name}");
        assert_eq!(cfg.k, 10);
        assert_eq!(cfg.snr_db, 20.0);
    }
}

#[test]
fn pgm_of_small_map() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.pgm");
    write_pgm(&small_map(vec![0.0, 1.0, 2.0, 4.0], 2, 2), &path).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "P2\n2 2\n255\n0 63\n127 255\n"
    );
    write_pgm(&small_map(vec![0.0; 4], 2, 2), &path).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "P2\n2 2\n255\n0 0\n0 0\n"
    );
}

#[test]
fn csv_round_trip_and_metadata() {
    let text = std::fs::read_to_string(scenarios().join("fig1a_three_small.toml")).unwrap();
    let mut cfg = parse_config(&text).unwrap();
    cfg.set_grid_resolution(31).unwrap();
    let out = run_pipeline(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = export_map(&out.map, &cfg, &dir.path().join("nested/run"), false).unwrap();
    assert!(paths.pgm.is_none());

    let rows = read_csv(&paths.csv).unwrap();
    assert_eq!(rows.len(), 31);
    for (j, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 31);
        for (i, v) in row.iter().enumerate() {
            assert!((v - out.map.magnitude_at(i, j)).abs() <= 1e-15 * v.abs().max(1.0));
        }
    }

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&paths.metadata).unwrap()).unwrap();
    assert_eq!(meta["N"], 12);
    assert_eq!(meta["K"], 10);
    assert_eq!(meta["seed"], 1);
    assert_eq!(meta["snrDb"], 20.0);
    assert_eq!(meta["convention"], "symmetric");
    assert_eq!(meta["ranks"].as_array().unwrap().len(), 10);
    assert_eq!(meta["omegas"].as_array().unwrap().len(), 10);
    assert_eq!(meta["cracks"].as_array().unwrap().len(), 3);
    assert_eq!(meta["gridSpec"]["nx"], 31);
}

#[test]
fn noiseless_pipeline_matches_direct_computation() {
    let text = std::fs::read_to_string(scenarios().join("fig1a_three_small.toml")).unwrap();
    let mut cfg = parse_config(&text).unwrap();
    cfg.snr_db = f64::INFINITY;
    cfg.set_grid_resolution(21).unwrap();
    let a = run_pipeline(&cfg).unwrap();
    cfg.seed = 999;
    let b = run_pipeline(&cfg).unwrap();
    // Seed is irrelevant without noise.
    assert_eq!(a.map, b.map);

    let dirs = crack_imaging::make_directions(cfg.n).unwrap();
    let freqs = crack_imaging::make_frequencies(cfg.lambda_min, cfg.lambda_max, cfg.k).unwrap();
    let clean: Vec<_> = freqs
        .omegas()
        .iter()
        .map(|&w| crack_imaging::assemble_msr(&a.cloud, w, &dirs, cfg.convention).unwrap())
        .collect();
    let direct = crack_imaging::evaluate_map(&cfg.grid, &clean, &dirs, cfg.tau).unwrap();
    assert_eq!(direct, a.map);
}

#[test]
fn two_close_cracks_scenario_runs() {
    let text = std::fs::read_to_string(scenarios().join("fig1c_two_close.toml")).unwrap();
    let cfg = parse_config(&text).unwrap();
    let out = run_pipeline(&cfg).unwrap();
    assert_eq!(out.map.metadata.n, 36);
    assert!(out.map.metadata.ranks.iter().all(|&r| r >= 2));
    let peak = out.map.grid.point_at(out.map.argmax());
    let near = cfg
        .cracks
        .iter()
        .map(|c| c.distance_to_locus(peak))
        .fold(f64::INFINITY, f64::min);
    assert!(
        near <= 2.0 * cfg.grid.spacing,
        "peak {peak:?} is {near} from the cracks"
    );
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crack-imaging"))
}

#[test]
fn binary_writes_outputs_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("fig1a");
    let status = bin()
        .arg("--config")
        .arg(scenarios().join("fig1a_three_small.toml"))
        .arg("--output")
        .arg(&base)
        .args([
            "--seed",
            "5",
            "--snr",
            "inf",
            "--grid-resolution",
            "21",
            "--pgm",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(meta["seed"], 5);
    assert_eq!(meta["snrDb"], "inf");
    assert_eq!(meta["gridSpec"]["nx"], 21);
    assert!(base.with_extension("pgm").exists());
    assert_eq!(read_csv(&base.with_extension("csv")).unwrap().len(), 21);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "n = 13\nk = 1\nlambda_min = 0.4\nlambda_max = 0.6\n[[cracks]]\nshape = \"point\"\ncenter = { x = 0.0, y = 0.0 }\nrho = 0.05\n").unwrap();
    let out = bin().arg("--config").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("even"));

    let missing = bin()
        .arg("--config")
        .arg(dir.path().join("nope.toml"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(3));

    // Output path under a regular file cannot be created.
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let unwritable = bin()
        .arg("--config")
        .arg(scenarios().join("fig1a_three_small.toml"))
        .arg("--output")
        .arg(blocker.join("out"))
        .args(["--grid-resolution", "5"])
        .output()
        .unwrap();
    assert_eq!(unwritable.status.code(), Some(3));
}
