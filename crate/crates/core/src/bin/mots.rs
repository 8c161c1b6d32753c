use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use mots_core::error::{MotsError, Result};
use mots_core::io::{self, BoxTable, RunConfig};
use mots_core::metrics::{self, ClassFilter, MotsScores, CLASS_CAR, CLASS_PEDESTRIAN};
use mots_core::pipeline::{cost_ratio, run_sequence, FrameResult};
use mots_core::synth::{noise_preset, perturb, RandomSceneOptions, ReplaySource, Scene, SceneSpec};

#[derive(Parser)]
#[command(name = "mots", version, about = "Multi-object tracking and segmentation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Car,
    Pedestrian,
    All,
}

impl From<ClassArg> for ClassFilter {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Car => ClassFilter::Only(CLASS_CAR),
            ClassArg::Pedestrian => ClassFilter::Only(CLASS_PEDESTRIAN),
            ClassArg::All => ClassFilter::All,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Score predicted instance tracks against ground truth.
    Eval {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        class: ClassArg,
        /// Also write the table as CSV to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generate a synthetic sequence with ground truth and detections.
    Synth {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        frames: u32,
        #[arg(long, default_value_t = 4)]
        objects: usize,
        #[arg(long)]
        out_dir: PathBuf,
        /// Detector degradation: none, low, medium or high.
        #[arg(long, default_value = "none")]
        noise: String,
    },
    /// Run the tracker over recorded detections.
    Track {
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long)]
        config: PathBuf,
        /// Tracking results file; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include wall-clock timings in the summary.
        #[arg(long)]
        timings: bool,
    },
    /// Print the runtime ratio of flow-guided to 3D-convolution fusion.
    Cost {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Eval { gt, pred, class, csv } => eval(&gt, &pred, class.into(), csv.as_deref()),
        Command::Synth {
            seed,
            frames,
            objects,
            out_dir,
            noise,
        } => synth(seed, frames, objects, &out_dir, &noise),
        Command::Track {
            detections,
            gt,
            config,
            out,
            timings,
        } => track(&detections, gt.as_deref(), &config, out, timings),
        Command::Cost { config } => cost(&config),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn eval(gt: &Path, pred: &Path, filter: ClassFilter, csv: Option<&Path>) -> Result<()> {
    let gt = io::parse_file(gt)?;
    let pred = io::parse_file(pred)?;
    let scores = metrics::evaluate(&gt, &pred)?;
    emit(&metrics::text_table(&scores, filter));
    if let Some(path) = csv {
        std::fs::write(path, metrics::csv_table(&scores, filter)).map_err(|e| io_error(path, e))?;
    }
    Ok(())
}

/// Writes to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn io_error(path: &Path, e: std::io::Error) -> MotsError {
    MotsError::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

fn synth(seed: u64, frames: u32, objects: usize, out_dir: &Path, noise: &str) -> Result<()> {
    let model = noise_preset(noise)?;
    let opts = RandomSceneOptions {
        channels: objects.max(RandomSceneOptions::default().channels),
        ..RandomSceneOptions::default()
    };
    let spec = SceneSpec::random(seed, frames, objects, &opts)?;
    let scene = Scene::new(spec.clone())?;
    std::fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;

    let gt: Vec<_> = (0..frames).map(|t| scene.annotations(t)).collect();
    let mut detections = Vec::with_capacity(gt.len());
    let mut boxes = BoxTable::new();
    for frame in &gt {
        let mut objects = Vec::new();
        for (j, d) in perturb(frame, &model, seed)?.into_iter().enumerate() {
            let id = io::encode_object_id(d.class_id, j as u32 + 1)?;
            boxes.insert((frame.frame, id), d.bbox);
            objects.push(metrics::AnnotatedObject {
                object_id: id,
                class_id: d.class_id,
                mask: d.mask,
            });
        }
        detections.push(metrics::FrameAnnotations {
            frame: frame.frame,
            objects,
        });
    }

    io::write_file(out_dir.join("gt.txt"), &gt)?;
    io::write_file(out_dir.join("detections.txt"), &detections)?;
    io::write_boxes_file(out_dir.join("boxes.txt"), &boxes)?;
    let scene_path = out_dir.join("scene.json");
    let scene_json = serde_json::to_string_pretty(&spec).expect("scene specs serialize");
    std::fs::write(&scene_path, scene_json + "\n").map_err(|e| io_error(&scene_path, e))?;

    let config = RunConfig {
        perturbation: mots_core::synth::PerturbationModel {
            embedding_noise: model.embedding_noise,
            flow_noise: model.flow_noise,
            ..Default::default()
        },
        scene: Some("scene.json".into()),
        boxes: Some("boxes.txt".into()),
        output: Some("tracks.txt".into()),
        ..RunConfig::default()
    };
    let cfg_path = out_dir.join("run.cfg");
    std::fs::write(&cfg_path, config.to_config_string()).map_err(|e| io_error(&cfg_path, e))?;
    emit(&format!("wrote {frames} frames, {objects} objects to {}\n", out_dir.display()));
    Ok(())
}

fn track(
    detections: &Path,
    gt: Option<&Path>,
    config: &Path,
    out: Option<PathBuf>,
    timings: bool,
) -> Result<()> {
    let cfg = RunConfig::parse_file(config)?;
    let scene_path = cfg
        .scene
        .as_ref()
        .ok_or_else(|| MotsError::Config("config must name a `scene` file".into()))?;
    let scene_text = std::fs::read_to_string(scene_path).map_err(|e| io_error(scene_path, e))?;
    let spec: SceneSpec = serde_json::from_str(&scene_text).map_err(|e| MotsError::Io {
        path: scene_path.clone(),
        reason: e.to_string(),
    })?;
    let boxes = match &cfg.boxes {
        Some(p) => io::parse_boxes_file(p)?,
        None => BoxTable::new(),
    };
    let dets = io::parse_file(detections)?;
    let gt = gt.map(io::parse_file).transpose()?;
    let has_gt = gt.is_some();
    let mut source = ReplaySource::new(spec, dets, boxes, gt, &cfg.perturbation)?;
    let run = run_sequence(&mut source, cfg.pipeline)?;

    if let Some(path) = out.or(cfg.output.clone()) {
        let frames = run
            .results
            .iter()
            .map(FrameResult::to_file_annotations)
            .collect::<Result<Vec<_>>>()?;
        io::write_file(&path, &frames)?;
    }

    let dropped: usize = run.results.iter().map(|r| r.dropped.len()).sum();
    let mut summary = json!({
        "frames": run.results.len(),
        "objects": run.results.iter().map(|r| r.objects.len()).sum::<usize>(),
        "dropped": dropped,
        "params": cfg.pipeline,
    });
    if has_gt {
        summary["metrics"] = scores_json(run.scores.as_ref());
    }
    if timings {
        summary["timings"] = json!(run.timings);
    }
    emit(&(serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"));
    Ok(())
}

fn scores_json(scores: Option<&MotsScores>) -> serde_json::Value {
    let Some(scores) = scores else {
        return serde_json::Value::Null;
    };
    let mut out = serde_json::Map::new();
    let rows = scores
        .per_class
        .iter()
        .map(|(&c, counts)| (metrics::class_name(c), *counts))
        .chain(std::iter::once(("all".to_string(), scores.combined())));
    for (name, counts) in rows {
        let value = counts
            .summary()
            .map(|s| json!(s))
            .unwrap_or(serde_json::Value::Null);
        out.insert(name, value);
    }
    serde_json::Value::Object(out)
}

fn cost(config: &Path) -> Result<()> {
    let cfg = RunConfig::parse_file(config)?;
    let ratio = cost_ratio(&cfg.cost)?;
    emit(&format!("cost_ratio {ratio}\nexact_ratio {}\n", cfg.cost.exact_ratio()));
    Ok(())
}
