//! Command-line entry point composing all modules into file-to-file steps.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/processing error. All
//! outputs are plain text (CSV, key=value config, PGM) and byte-reproducible
//! from the same inputs and seed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::describe::{describe_keypoint, gradient_field, Descriptor};
use crate::detect::{detect_on_smoothed, smooth, ExtremumClass, Keypoint};
use crate::error::{Error, Result};
use crate::eval::{
    ablation_free_space, evaluate, grid_search, recall_at_precision, sample_pairs, EvalOutput,
    Label, PrCurve,
};
use crate::format::{load_grid, load_sdf, save_grid, save_sdf, write_pgm};
use crate::grid::{binarize, Submap};
use crate::matching::match_submaps;
use crate::pipeline::Features;
use crate::render::{render_keypoints, render_match, render_sdf};
use crate::sdf::{compute_sdf, SdfGrid};
use crate::synth::{generate_benchmark, OverlapPlan, WorldSpec};

#[derive(Parser)]
#[command(name = "locus", version, about = "Free-space place recognition for 2D lidar submaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat key=value parameter file; missing keys take defaults.
    #[arg(long, visible_alias = "params")]
    config: Option<PathBuf>,
    /// Override the RNG seed (falls back to $LOCUS_SEED, then the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Print the fully resolved configuration before running.
    #[arg(long)]
    print_config: bool,
}

impl ConfigArgs {
    fn load(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => Config::from_file(path)?,
            None => Config::default(),
        };
        let env_seed = match std::env::var("LOCUS_SEED") {
            Ok(s) => Some(s.parse::<u64>().map_err(|_| {
                Error::Config(format!("LOCUS_SEED must be an integer, got `{s}`"))
            })?),
            Err(_) => None,
        };
        if let Some(seed) = self.seed.or(env_seed) {
            cfg.rng_seed = seed;
        }
        if self.print_config {
            print!("{cfg}");
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic world and a benchmark set of submaps.
    Synth {
        /// World/benchmark description (flat key=value text).
        #[arg(long)]
        spec: PathBuf,
        /// Output directory for .grid files and the poses manifest.
        #[arg(long)]
        out: PathBuf,
        /// Override the world seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute the signed distance field of an occupancy grid.
    Sdf {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Also write a normalized grayscale PGM of the field.
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Detect keypoints in a signed distance field.
    Detect {
        input: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Describe previously detected keypoints.
    Describe {
        input: PathBuf,
        keypoints: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Match two signed distance fields end to end.
    Match {
        input_a: PathBuf,
        input_b: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        /// Write inlier coordinate pairs (one `xa ya xb yb` line each).
        #[arg(long)]
        dump_pairs: Option<PathBuf>,
    },
    /// Evaluate a dataset of submaps into a precision-recall curve.
    Eval {
        dataset: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Number of submap pairs to sample.
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write a summary with recall at precision 1.0.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Worker threads; the output is identical for any value.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Free-space ablation: one evaluation per masking distance.
    Ablate {
        dataset: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        /// Comma-separated masking distances in meters.
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.0,1.5,2.0")]
        d_thresholds: Vec<f64>,
        /// Output prefix; curves land at <prefix>_d<value>.csv.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Exhaustive parameter search maximizing recall at precision 1.0.
    GridSearch {
        dataset: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        /// Axis of the search grid, e.g. `--grid sigma=1.0,1.5,2.0`; repeatable.
        #[arg(long = "grid", required = true)]
        grid: Vec<String>,
        /// File receiving the winning configuration.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Render an SDF (optionally with keypoints or a match overlay) to PGM.
    Render {
        input: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        /// Overlay markers for keypoints from this CSV.
        #[arg(long)]
        keypoints: Option<PathBuf>,
        /// Match against this second SDF and draw inlier links.
        #[arg(long)]
        pair: Option<PathBuf>,
    },
}

/// Parses argv and runs one subcommand, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes, anything else is usage
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth { spec, out, seed } => cmd_synth(&spec, &out, seed),
        Command::Sdf {
            input,
            output,
            config,
            pgm,
        } => cmd_sdf(&input, &output, &config.load()?, pgm.as_deref()),
        Command::Detect { input, config, out } => cmd_detect(&input, &config.load()?, &out),
        Command::Describe {
            input,
            keypoints,
            config,
            out,
        } => cmd_describe(&input, &keypoints, &config.load()?, &out),
        Command::Match {
            input_a,
            input_b,
            config,
            out,
            dump_pairs,
        } => cmd_match(&input_a, &input_b, &config.load()?, &out, dump_pairs.as_deref()),
        Command::Eval {
            dataset,
            config,
            pairs,
            out,
            summary,
            jobs,
        } => cmd_eval(&dataset, &config.load()?, pairs, &out, summary.as_deref(), jobs),
        Command::Ablate {
            dataset,
            config,
            pairs,
            d_thresholds,
            out,
            summary,
            jobs,
        } => cmd_ablate(
            &dataset,
            &config.load()?,
            pairs,
            &d_thresholds,
            &out,
            summary.as_deref(),
            jobs,
        ),
        Command::GridSearch {
            dataset,
            config,
            pairs,
            grid,
            out,
            jobs,
        } => cmd_grid_search(&dataset, &config.load()?, pairs, &grid, &out, jobs),
        Command::Render {
            input,
            config,
            out,
            keypoints,
            pair,
        } => cmd_render(&input, &config.load()?, &out, keypoints.as_deref(), pair.as_deref()),
    }
}

// ---------------------------------------------------------------- synth

fn parse_world_spec(text: &str) -> Result<(WorldSpec, OverlapPlan, usize)> {
    let mut spec = WorldSpec::default();
    let mut plan = OverlapPlan::default();
    let mut n_submaps = 12usize;
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        let f = || -> Result<f64> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
        };
        let u = || -> Result<u64> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
        };
        match key {
            "seed" => spec.seed = u()?,
            "extent_x" => spec.extent.0 = f()?,
            "extent_y" => spec.extent.1 = f()?,
            "resolution" => spec.resolution = f()?,
            "room_count_min" => spec.room_count.0 = u()? as u32,
            "room_count_max" => spec.room_count.1 = u()? as u32,
            "room_size_min" => spec.room_size.0 = f()?,
            "room_size_max" => spec.room_size.1 = f()?,
            "corridor_width_min" => spec.corridor_width.0 = f()?,
            "corridor_width_max" => spec.corridor_width.1 = f()?,
            "clutter_density" => spec.clutter_density = f()?,
            "n_submaps" => n_submaps = u()? as usize,
            "cluster_size" => plan.cluster_size = u()? as usize,
            "window_x" => plan.window.0 = f()?,
            "window_y" => plan.window.1 = f()?,
            "sensor_range" => plan.sensor_range = f()?,
            "jitter" => plan.jitter = f()?,
            "anchor_separation" => plan.anchor_separation = f()?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
    }
    Ok((spec, plan, n_submaps))
}

fn cmd_synth(spec_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<()> {
    let text = std::fs::read_to_string(spec_path).map_err(|e| Error::io(spec_path, e))?;
    let (mut spec, plan, n_submaps) = parse_world_spec(&text)?;
    if let Some(s) = seed {
        spec.seed = s;
    } else if let Ok(s) = std::env::var("LOCUS_SEED") {
        spec.seed = s
            .parse()
            .map_err(|_| Error::Config(format!("LOCUS_SEED must be an integer, got `{s}`")))?;
    }
    let dataset = generate_benchmark(&spec, n_submaps, &plan)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut manifest = String::new();
    for submap in &dataset.submaps {
        let name = format!("{:04}.grid", submap.id);
        save_grid(submap, &out_dir.join(name))?;
        writeln!(
            manifest,
            "{} {} {} {}",
            submap.id, submap.pose.x, submap.pose.y, submap.pose.theta
        )
        .expect("write to string");
    }
    let manifest_path = out_dir.join("poses.txt");
    std::fs::write(&manifest_path, manifest).map_err(|e| Error::io(&manifest_path, e))?;
    println!("wrote {} submaps to {}", dataset.submaps.len(), out_dir.display());
    Ok(())
}

// ------------------------------------------------------------------ sdf

fn cmd_sdf(input: &Path, output: &Path, cfg: &Config, pgm: Option<&Path>) -> Result<()> {
    let submap = load_grid(input)?;
    let sdf = compute_sdf(&binarize(&submap.grid, cfg.p_occ))?;
    save_sdf(&sdf, output)?;
    if let Some(pgm_path) = pgm {
        let raster = render_sdf(&sdf);
        write_pgm(pgm_path, raster.width, raster.height, &raster.pixels)?;
    }
    Ok(())
}

// --------------------------------------------------------------- detect

fn format_float(v: f64) -> String {
    // shortest round-trip text; keeps CSVs byte-stable across runs
    format!("{v}")
}

fn write_keypoints_csv(path: &Path, keypoints: &[Keypoint]) -> Result<()> {
    let mut text = String::from("x_m,y_m,class,response,sdf_value\n");
    for kp in keypoints {
        writeln!(
            text,
            "{},{},{},{},{}",
            format_float(kp.position.0),
            format_float(kp.position.1),
            kp.class.as_str(),
            format_float(kp.response),
            format_float(kp.sdf_value)
        )
        .expect("write to string");
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_keypoints_csv(path: &Path, sdf: &SdfGrid) -> Result<Vec<Keypoint>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i as u64;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::parse(path, lineno, "expected 5 comma-separated fields"));
        }
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("invalid number `{s}`")))
        };
        let class = ExtremumClass::parse(fields[2].trim())
            .ok_or_else(|| Error::parse(path, lineno, format!("invalid class `{}`", fields[2])))?;
        let position = (num(fields[0])?, num(fields[1])?);
        let local = sdf.origin.inverse().transform(position);
        let cell = (
            (local.0 / sdf.resolution).round().max(0.0) as u32,
            (local.1 / sdf.resolution).round().max(0.0) as u32,
        );
        out.push(Keypoint {
            position,
            cell,
            class,
            response: num(fields[3])?,
            sdf_value: num(fields[4])?,
        });
    }
    Ok(out)
}

fn cmd_detect(input: &Path, cfg: &Config, out: &Path) -> Result<()> {
    let sdf = load_sdf(input)?;
    let params = cfg.detector_params(sdf.resolution);
    let keypoints = crate::detect::detect_keypoints(&sdf, &params)?;
    write_keypoints_csv(out, &keypoints)
}

// ------------------------------------------------------------- describe

fn write_descriptors_csv(path: &Path, descriptors: &[Descriptor]) -> Result<()> {
    let n_bins = descriptors.first().map_or(0, |d| d.histogram.len());
    let mut text = String::from("index,class,dominant_orientation");
    for b in 0..n_bins {
        write!(text, ",bin_{b:02}").expect("write to string");
    }
    text.push_str(",distance_term\n");
    for (i, d) in descriptors.iter().enumerate() {
        write!(
            text,
            "{i},{},{}",
            d.class.as_str(),
            format_float(d.dominant_orientation)
        )
        .expect("write to string");
        for v in &d.histogram {
            write!(text, ",{}", format_float(*v)).expect("write to string");
        }
        writeln!(text, ",{}", format_float(d.distance_term)).expect("write to string");
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Detection + description directly from an SDF (submap grids unavailable).
fn features_from_sdf(sdf: &SdfGrid, cfg: &Config) -> Result<Features> {
    let detector = cfg.detector_params(sdf.resolution);
    let descriptor = cfg.descriptor_params();
    let smoothed = smooth(sdf, detector.sigma);
    let kps = detect_on_smoothed(&smoothed, &sdf.valid, &detector)?;
    let grad = gradient_field(&smoothed);
    let mut out = Features::default();
    for kp in kps {
        match describe_keypoint(&smoothed, &grad, &kp, &descriptor) {
            Ok(d) => {
                out.keypoints.push(kp);
                out.descriptors.push(d);
            }
            Err(Error::ZeroGradient) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn cmd_describe(input: &Path, keypoints: &Path, cfg: &Config, out: &Path) -> Result<()> {
    let sdf = load_sdf(input)?;
    let kps = read_keypoints_csv(keypoints, &sdf)?;
    let smoothed = smooth(&sdf, cfg.sigma);
    let grad = gradient_field(&smoothed);
    let params = cfg.descriptor_params();
    let mut descriptors = Vec::new();
    for kp in &kps {
        match describe_keypoint(&smoothed, &grad, kp, &params) {
            Ok(d) => descriptors.push(d),
            Err(Error::ZeroGradient) => continue,
            Err(e) => return Err(e),
        }
    }
    write_descriptors_csv(out, &descriptors)
}

// ---------------------------------------------------------------- match

fn cmd_match(
    input_a: &Path,
    input_b: &Path,
    cfg: &Config,
    out: &Path,
    dump_pairs: Option<&Path>,
) -> Result<()> {
    let sdf_a = load_sdf(input_a)?;
    let sdf_b = load_sdf(input_b)?;
    let fa = features_from_sdf(&sdf_a, cfg)?.masked(cfg.d_threshold);
    let fb = features_from_sdf(&sdf_b, cfg)?.masked(cfg.d_threshold);
    let result = match_submaps(
        &fa.keypoints,
        &fa.descriptors,
        &fb.keypoints,
        &fb.descriptors,
        &cfg.match_params(),
    );
    let text = format!(
        "accepted,tx,ty,theta,n_inliers,n_correspondences\n{},{},{},{},{},{}\n",
        result.accepted,
        format_float(result.transform.x),
        format_float(result.transform.y),
        format_float(result.transform.theta),
        result.inliers.len(),
        result.total_correspondences
    );
    std::fs::write(out, text).map_err(|e| Error::io(out, e))?;
    if let Some(pairs_path) = dump_pairs {
        let mut text = String::new();
        for m in &result.inliers {
            let a = fa.keypoints[m.index_a].position;
            let b = fb.keypoints[m.index_b].position;
            writeln!(
                text,
                "{} {} {} {}",
                format_float(a.0),
                format_float(a.1),
                format_float(b.0),
                format_float(b.1)
            )
            .expect("write to string");
        }
        std::fs::write(pairs_path, text).map_err(|e| Error::io(pairs_path, e))?;
    }
    Ok(())
}

// ----------------------------------------------------------------- eval

fn load_dataset(dir: &Path) -> Result<Vec<Submap>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "grid"))
        .collect();
    paths.sort();
    let mut submaps = Vec::with_capacity(paths.len());
    for p in paths {
        submaps.push(load_grid(&p)?);
    }
    if submaps.len() < 2 {
        return Err(Error::EmptyDataset);
    }
    Ok(submaps)
}

fn curve_csv(curve: &PrCurve) -> String {
    let mut text = String::from("min_inliers,tp,fp,fn,precision,recall\n");
    for p in &curve.points {
        writeln!(
            text,
            "{},{},{},{},{},{}",
            p.min_inliers,
            p.true_pos,
            p.false_pos,
            p.false_neg,
            format_float(p.precision),
            format_float(p.recall)
        )
        .expect("write to string");
    }
    text
}

fn summary_text(entries: &[(String, &EvalOutput, usize, usize)]) -> Result<String> {
    let mut text = String::from("{\n");
    for (i, (label, output, n_pairs, n_match)) in entries.iter().enumerate() {
        let r = recall_at_precision(&output.curve, 1.0)?;
        let comma = if i + 1 < entries.len() { "," } else { "" };
        writeln!(
            text,
            "  \"{label}\": {{\"recall_at_precision_1.0\": {}, \"pairs\": {n_pairs}, \"match_pairs\": {n_match}, \"avg_keypoints\": {}}}{comma}",
            format_float(r),
            format_float(output.avg_keypoints)
        )
        .expect("write to string");
    }
    text.push_str("}\n");
    Ok(text)
}

fn cmd_eval(
    dataset: &Path,
    cfg: &Config,
    n_pairs: usize,
    out: &Path,
    summary: Option<&Path>,
    jobs: Option<usize>,
) -> Result<()> {
    let submaps = load_dataset(dataset)?;
    let pairs = sample_pairs(&submaps, n_pairs, cfg.rng_seed, cfg.overlap_threshold)?;
    let output = evaluate(&submaps, &pairs, cfg, jobs)?;
    std::fs::write(out, curve_csv(&output.curve)).map_err(|e| Error::io(out, e))?;
    if let Some(summary_path) = summary {
        let n_match = pairs.iter().filter(|p| p.label == Label::Match).count();
        let text = summary_text(&[("eval".to_string(), &output, pairs.len(), n_match)])?;
        std::fs::write(summary_path, text).map_err(|e| Error::io(summary_path, e))?;
    }
    Ok(())
}

fn cmd_ablate(
    dataset: &Path,
    cfg: &Config,
    n_pairs: usize,
    d_thresholds: &[f64],
    out_prefix: &Path,
    summary: Option<&Path>,
    jobs: Option<usize>,
) -> Result<()> {
    let submaps = load_dataset(dataset)?;
    let pairs = sample_pairs(&submaps, n_pairs, cfg.rng_seed, cfg.overlap_threshold)?;
    let runs = ablation_free_space(&submaps, &pairs, cfg, d_thresholds, jobs)?;
    let n_match = pairs.iter().filter(|p| p.label == Label::Match).count();
    let mut entries = Vec::new();
    for (d, output) in &runs {
        let label = if d.is_infinite() {
            "inf".to_string()
        } else {
            format_float(*d)
        };
        let path = out_prefix.with_file_name(format!(
            "{}_d{}.csv",
            out_prefix
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "ablation".into()),
            label
        ));
        std::fs::write(&path, curve_csv(&output.curve)).map_err(|e| Error::io(&path, e))?;
        entries.push((format!("d_threshold={label}"), output, pairs.len(), n_match));
    }
    if let Some(summary_path) = summary {
        let refs: Vec<(String, &EvalOutput, usize, usize)> = entries
            .iter()
            .map(|(l, o, p, m)| (l.clone(), *o, *p, *m))
            .collect();
        std::fs::write(summary_path, summary_text(&refs)?)
            .map_err(|e| Error::io(summary_path, e))?;
    }
    Ok(())
}

fn cmd_grid_search(
    dataset: &Path,
    cfg: &Config,
    n_pairs: usize,
    grid: &[String],
    out: &Path,
    jobs: Option<usize>,
) -> Result<()> {
    let axes: Vec<(String, Vec<String>)> = grid
        .iter()
        .map(|axis| {
            let (key, values) = axis
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=v1,v2,..., got `{axis}`")))?;
            Ok((
                key.trim().to_string(),
                values.split(',').map(|v| v.trim().to_string()).collect(),
            ))
        })
        .collect::<Result<_>>()?;
    let submaps = load_dataset(dataset)?;
    let pairs = sample_pairs(&submaps, n_pairs, cfg.rng_seed, cfg.overlap_threshold)?;
    let (best, score) = grid_search(&submaps, &pairs, cfg, &axes, jobs)?;
    std::fs::write(out, best.to_string()).map_err(|e| Error::io(out, e))?;
    println!("recall_at_precision_1.0 = {}", format_float(score));
    Ok(())
}

// --------------------------------------------------------------- render

fn cmd_render(
    input: &Path,
    cfg: &Config,
    out: &Path,
    keypoints: Option<&Path>,
    pair: Option<&Path>,
) -> Result<()> {
    let sdf = load_sdf(input)?;
    let raster = match (pair, keypoints) {
        (Some(pair_path), _) => {
            let sdf_b = load_sdf(pair_path)?;
            let fa = features_from_sdf(&sdf, cfg)?.masked(cfg.d_threshold);
            let fb = features_from_sdf(&sdf_b, cfg)?.masked(cfg.d_threshold);
            let result = match_submaps(
                &fa.keypoints,
                &fa.descriptors,
                &fb.keypoints,
                &fb.descriptors,
                &cfg.match_params(),
            );
            render_match(&sdf, &fa.keypoints, &sdf_b, &fb.keypoints, &result.inliers)
        }
        (None, Some(kp_path)) => {
            let kps = read_keypoints_csv(kp_path, &sdf)?;
            render_keypoints(&sdf, &kps)
        }
        (None, None) => render_sdf(&sdf),
    };
    write_pgm(out, raster.width, raster.height, &raster.pixels)
}
