//! End-to-end command-line tests: every subcommand is exercised through
//! `cli::run` against real files, and the documented CSV schemas are pinned.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use locus::cli::run;

fn locus<I>(args: I) -> i32
where
    I: IntoIterator,
    I::Item: Into<OsString> + Clone,
{
    let mut argv: Vec<OsString> = vec!["locus".into()];
    argv.extend(args.into_iter().map(Into::into));
    run(argv)
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn first_line(path: &Path) -> String {
    read(path).lines().next().unwrap_or_default().to_string()
}

struct Workspace {
    _dir: tempfile::TempDir,
    root: PathBuf,
    data: PathBuf,
    cfg: PathBuf,
}

fn workspace() -> Workspace {
    let dir = tempfile::tempdir().expect("tempdir");
    let root = dir.path().to_path_buf();
    let data = root.join("data");
    let spec = root.join("world.spec");
    fs::write(
        &spec,
        "seed = 10\n\
         extent_x = 50\n\
         extent_y = 50\n\
         room_count_min = 14\n\
         room_count_max = 18\n\
         n_submaps = 6\n\
         cluster_size = 3\n\
         anchor_separation = 12\n\
         jitter = 0.5\n\
         sensor_range = 15\n",
    )
    .expect("write spec");
    let status = locus([
        "synth",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        data.to_str().unwrap(),
    ]);
    assert_eq!(status, 0, "synth failed");
    let cfg = root.join("pipeline.cfg");
    fs::write(&cfg, "border_margin = 7\ndetection_threshold = 0.000001\n").expect("write cfg");
    Workspace { _dir: dir, root, data, cfg }
}

#[test]
fn synth_writes_grids_and_poses() {
    let ws = workspace();
    for i in 0..6 {
        assert!(ws.data.join(format!("{i:04}.grid")).is_file(), "missing {i:04}.grid");
    }
    let poses = read(&ws.data.join("poses.txt"));
    let lines: Vec<&str> = poses.lines().collect();
    assert_eq!(lines.len(), 6);
    for line in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(fields.len(), 4, "pose line `{line}`");
        fields[0].parse::<u64>().expect("id");
        for f in &fields[1..] {
            f.parse::<f64>().expect("pose component");
        }
    }
}

#[test]
fn file_pipeline_sdf_detect_describe_match() {
    let ws = workspace();
    let cfg = ws.cfg.to_str().unwrap().to_string();

    // sdf on both submaps of the first cluster, plus a rendering
    for i in 0..2 {
        let status = locus([
            "sdf",
            ws.data.join(format!("{i:04}.grid")).to_str().unwrap(),
            ws.root.join(format!("{i}.sdf")).to_str().unwrap(),
            "--config",
            &cfg,
            "--pgm",
            ws.root.join(format!("{i}.pgm")).to_str().unwrap(),
        ]);
        assert_eq!(status, 0, "sdf failed for submap {i}");
    }
    let pgm = fs::read(ws.root.join("0.pgm")).expect("pgm");
    assert!(pgm.starts_with(b"P5"), "not a binary PGM");

    // detect
    let kp_csv = ws.root.join("kp0.csv");
    let status = locus([
        "detect",
        ws.root.join("0.sdf").to_str().unwrap(),
        "--config",
        &cfg,
        "--out",
        kp_csv.to_str().unwrap(),
    ]);
    assert_eq!(status, 0, "detect failed");
    assert_eq!(first_line(&kp_csv), "x_m,y_m,class,response,sdf_value");
    let n_keypoints = read(&kp_csv).lines().count() - 1;
    assert!(n_keypoints >= 5, "only {n_keypoints} keypoints detected");

    // describe, from the detect output
    let desc_csv = ws.root.join("desc0.csv");
    let status = locus([
        "describe",
        ws.root.join("0.sdf").to_str().unwrap(),
        kp_csv.to_str().unwrap(),
        "--config",
        &cfg,
        "--out",
        desc_csv.to_str().unwrap(),
    ]);
    assert_eq!(status, 0, "describe failed");
    let header = first_line(&desc_csv);
    assert!(header.starts_with("index,class,dominant_orientation,bin_00,"));
    assert!(header.ends_with(",bin_16,distance_term"), "header `{header}`");

    // match the overlapping pair; the two submaps share a cluster
    let match_csv = ws.root.join("match.csv");
    let pairs_txt = ws.root.join("pairs.txt");
    let status = locus([
        "match",
        ws.root.join("0.sdf").to_str().unwrap(),
        ws.root.join("1.sdf").to_str().unwrap(),
        "--config",
        &cfg,
        "--out",
        match_csv.to_str().unwrap(),
        "--dump-pairs",
        pairs_txt.to_str().unwrap(),
    ]);
    assert_eq!(status, 0, "match failed");
    assert_eq!(
        first_line(&match_csv),
        "accepted,tx,ty,theta,n_inliers,n_correspondences"
    );
    let row = read(&match_csv).lines().nth(1).expect("data row").to_string();
    assert!(
        row.starts_with("true,") || row.starts_with("false,"),
        "row `{row}`"
    );
    if row.starts_with("true,") {
        let n_pairs = read(&pairs_txt).lines().count();
        assert!(n_pairs >= 2, "accepted match dumped {n_pairs} inlier pairs");
    }
}

#[test]
fn eval_curve_schema_and_ablation_consistency() {
    let ws = workspace();
    let cfg = ws.cfg.to_str().unwrap().to_string();
    let curve = ws.root.join("curve.csv");
    let status = locus([
        "eval",
        ws.data.to_str().unwrap(),
        "--config",
        &cfg,
        "--pairs",
        "15",
        "--seed",
        "1",
        "--out",
        curve.to_str().unwrap(),
        "--summary",
        ws.root.join("summary.txt").to_str().unwrap(),
    ]);
    assert_eq!(status, 0, "eval failed");
    assert_eq!(first_line(&curve), "min_inliers,tp,fp,fn,precision,recall");
    let summary = read(&ws.root.join("summary.txt"));
    assert!(summary.contains("recall_at_precision_1.0"), "summary `{summary}`");

    // the unmasked ablation arm must be byte-identical to a plain eval
    let status = locus([
        "ablate",
        ws.data.to_str().unwrap(),
        "--config",
        &cfg,
        "--pairs",
        "15",
        "--seed",
        "1",
        "--d-thresholds",
        "1.0,2.0",
        "--out",
        ws.root.join("abl").to_str().unwrap(),
    ]);
    assert_eq!(status, 0, "ablate failed");
    for d in ["1", "2", "inf"] {
        assert!(ws.root.join(format!("abl_d{d}.csv")).is_file(), "missing abl_d{d}.csv");
    }
    assert_eq!(
        fs::read(ws.root.join("abl_dinf.csv")).unwrap(),
        fs::read(&curve).unwrap(),
        "unmasked ablation differs from plain eval"
    );
}

#[test]
fn exit_codes_and_print_config() {
    // usage errors are exit 1, runtime errors exit 2, --help exits 0
    assert_eq!(locus(["no-such-command"]), 1);
    assert_eq!(locus(["--help"]), 0);
    assert_eq!(locus(["detect", "/nonexistent/input.sdf", "--out", "/tmp/x.csv"]), 2);

    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = dir.path().join("p.cfg");
    fs::write(&cfg, "sigma = 3.5\n").unwrap();
    let out = dir.path().join("resolved.txt");
    // --print-config resolves and echoes the configuration; reuse detect on a
    // missing input so nothing else runs after printing
    let sdf = dir.path().join("missing.sdf");
    let status = locus([
        "detect",
        sdf.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--print-config",
        "--out",
        out.to_str().unwrap(),
    ]);
    // printing happens before the input is opened; the run still fails
    assert_eq!(status, 2);
}

#[test]
fn grid_search_reports_best_setting() {
    let ws = workspace();
    let out = ws.root.join("grid.csv");
    let status = locus([
        "grid-search",
        ws.data.to_str().unwrap(),
        "--config",
        ws.cfg.to_str().unwrap(),
        "--pairs",
        "15",
        "--seed",
        "1",
        "--grid",
        "max_ratio=0.7,0.75",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status, 0, "grid-search failed");
    let text = read(&out);
    assert!(text.contains("max_ratio"), "output `{text}`");
}
