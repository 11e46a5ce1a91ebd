use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ungif::config::{Constraint, DitherChoice, OperatorChoice, OutputFormat, PipelineConfig};
use ungif::gif::{decode_gif, encode_gif, ColorTable, GifDocument, IndexedFrame};
use ungif::{eval, flo, imageio, manifest, model, pipeline, synth};
use ungif_core::{
    dither_floyd_steinberg_indices, estimate_flow, extract_features, quantize_indices,
    DitherFeatures, DitherMode,
};

#[derive(Parser)]
#[command(
    name = "ungif",
    about = "Create GIFs from video frames and restore video from GIFs",
    version
)]
struct Cli {
    /// JSON pipeline config; flags override individual fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct PipelineFlags {
    /// Palette size used when building GIFs.
    #[arg(long)]
    palette_size: Option<usize>,
    /// Dithering / routing choice.
    #[arg(long)]
    dither: Option<DitherChoice>,
    /// Fitted router model (needed for --dither auto).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Dequantization unfold count k.
    #[arg(long)]
    steps: Option<usize>,
    /// Update operator.
    #[arg(long)]
    operator: Option<OperatorChoice>,
    /// Update step size.
    #[arg(long)]
    step_size: Option<f64>,
    #[arg(long)]
    smoothness_weight: Option<f64>,
    #[arg(long)]
    inner_iterations: Option<usize>,
    /// Quantization-constraint handling.
    #[arg(long)]
    constraint: Option<Constraint>,
    /// Early-out threshold on the mean update magnitude.
    #[arg(long)]
    convergence_tol: Option<f64>,
    /// Temporal interpolation factor.
    #[arg(long)]
    factor: Option<usize>,
    /// Flow pyramid depth.
    #[arg(long)]
    levels: Option<usize>,
    /// Flow regularization alpha.
    #[arg(long)]
    alpha: Option<f64>,
    /// Flow iterations per pyramid level.
    #[arg(long)]
    iterations: Option<usize>,
    /// Frame output format.
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Seed for stochastic choices (dataset shuffles).
    #[arg(long)]
    seed: Option<u64>,
}

impl PipelineFlags {
    fn apply(&self, mut cfg: PipelineConfig) -> PipelineConfig {
        if let Some(v) = self.palette_size {
            cfg.palette_size = v;
        }
        if let Some(v) = self.dither {
            cfg.dither = v;
        }
        if self.model.is_some() {
            cfg.model_path = self.model.clone();
        }
        if let Some(v) = self.steps {
            cfg.dequant.steps = v;
        }
        if let Some(v) = self.operator {
            cfg.dequant.operator = v;
        }
        if let Some(v) = self.step_size {
            cfg.dequant.step_size = v;
        }
        if let Some(v) = self.smoothness_weight {
            cfg.dequant.smoothness_weight = v;
        }
        if let Some(v) = self.inner_iterations {
            cfg.dequant.inner_iterations = v;
        }
        if let Some(v) = self.constraint {
            cfg.dequant.constraint = v;
        }
        if let Some(v) = self.convergence_tol {
            cfg.dequant.convergence_tol = v;
        }
        if let Some(v) = self.factor {
            cfg.interp_factor = v;
        }
        if let Some(v) = self.levels {
            cfg.flow.levels = v;
        }
        if let Some(v) = self.alpha {
            cfg.flow.alpha = v;
        }
        if let Some(v) = self.iterations {
            cfg.flow.iterations = v;
        }
        if let Some(v) = self.format {
            cfg.output_format = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Quantize a directory of frames into an animated GIF.
    Encode {
        /// Directory of input frames (*.png, *.ppm).
        #[arg(long)]
        input: PathBuf,
        /// Output GIF path.
        #[arg(long)]
        output: PathBuf,
        /// Frame delay in centiseconds.
        #[arg(long, default_value_t = 4)]
        delay: u16,
        #[command(flatten)]
        flags: PipelineFlags,
    },
    /// Restore continuous-tone frames from a GIF (no interpolation).
    Dequant {
        /// Input GIF.
        #[arg(long)]
        input: PathBuf,
        /// Output frame directory.
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        flags: PipelineFlags,
    },
    /// Full restoration: dequantize, estimate flow, interpolate.
    Interp {
        /// Input GIF.
        #[arg(long)]
        input: PathBuf,
        /// Output frame directory.
        #[arg(long)]
        output: PathBuf,
        /// Also dump per-pair bidirectional flow as .flo files.
        #[arg(long)]
        dump_flow: Option<PathBuf>,
        #[command(flatten)]
        flags: PipelineFlags,
    },
    /// Route frames as dithered / non-dithered, or fit the router.
    /// `--model` names the model to apply (with --input) or write (--fit).
    Classify {
        /// A GIF or a single frame image to classify.
        #[arg(long, required_unless_present = "fit")]
        input: Option<PathBuf>,
        /// Fit the router from a synthesized dataset root.
        #[arg(long, conflicts_with = "input")]
        fit: Option<PathBuf>,
        #[command(flatten)]
        flags: PipelineFlags,
    },
    /// Build the paired dataset: ground truth plus dithered and non-dithered
    /// GIF versions of every clip.
    Synth {
        /// Root directory holding one subdirectory of frames per clip.
        #[arg(long)]
        input: PathBuf,
        /// Dataset output root.
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        flags: PipelineFlags,
    },
    /// Temporal sweep: subsample, rebuild GIFs, restore, score.
    Eval {
        /// Dataset root produced by `synth`.
        #[arg(long)]
        dataset: PathBuf,
        /// Report output directory.
        #[arg(long)]
        output: PathBuf,
        /// Comma-separated sampling factors.
        #[arg(long, default_value = "1,2,4,8", value_delimiter = ',')]
        factors: Vec<usize>,
        #[command(flatten)]
        flags: PipelineFlags,
    },
}

/// Failure stage, used to pick the exit code: 2 config, 3 parse, 4 process.
enum Stage {
    Config,
    Parse,
    Process,
}

struct StagedError {
    stage: Stage,
    source: anyhow::Error,
}

type CmdResult = Result<(), StagedError>;

trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T, StagedError>;
}

impl<T, E: Into<anyhow::Error>> StageExt<T> for Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T, StagedError> {
        self.map_err(|e| StagedError { stage, source: e.into() })
    }
}

/// Loads and merges the config; `full` runs the restoration-path checks,
/// synthesis-only commands validate just what they use.
fn load_config(
    cli_config: &Option<PathBuf>,
    flags: &PipelineFlags,
    full: bool,
) -> Result<PipelineConfig, StagedError> {
    let base = match cli_config {
        Some(path) => PipelineConfig::load(path).stage(Stage::Config)?,
        None => PipelineConfig::default(),
    };
    let cfg = flags.apply(base);
    if full {
        cfg.validate().stage(Stage::Config)?;
    } else {
        cfg.validate_synthesis().stage(Stage::Config)?;
    }
    Ok(cfg)
}

fn load_gif(path: &Path) -> Result<GifDocument, StagedError> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .stage(Stage::Parse)?;
    decode_gif(&bytes).with_context(|| format!("decoding {}", path.display())).stage(Stage::Parse)
}

fn cmd_encode(input: &Path, output: &Path, delay: u16, cfg: &PipelineConfig) -> CmdResult {
    let frames = imageio::load_frames(input).stage(Stage::Parse)?;
    let (w, h) = (frames[0].width(), frames[0].height());
    for f in &frames {
        if f.width() != w || f.height() != h {
            return Err(anyhow!("frame dimensions differ within the clip")).stage(Stage::Process);
        }
    }
    let palette = synth::clip_palette(&frames, cfg.palette_size).stage(Stage::Process)?;
    let dithered = matches!(cfg.dither, DitherChoice::On);
    let frames: Vec<IndexedFrame> = frames
        .iter()
        .map(|f| {
            let indices = if dithered {
                dither_floyd_steinberg_indices(f, &palette)
            } else {
                quantize_indices(f, &palette)
            };
            IndexedFrame::new(indices, delay)
        })
        .collect();
    let doc = GifDocument::new(w as u16, h as u16, ColorTable::from_palette(&palette), frames, 0)
        .stage(Stage::Process)?;
    let bytes = encode_gif(&doc).stage(Stage::Process)?;
    if let Some(parent) = output.parent() {
        std::fs::create_dir_all(parent).stage(Stage::Process)?;
    }
    std::fs::write(output, &bytes).stage(Stage::Process)?;
    println!(
        "encoded {} frames ({}x{}, {} colors, dither {}) -> {}",
        doc.frames.len(),
        w,
        h,
        palette.len(),
        if dithered { "on" } else { "off" },
        output.display()
    );
    Ok(())
}

fn load_router(cfg: &PipelineConfig) -> Result<Option<ungif_core::LinearClassifier>, StagedError> {
    match (&cfg.dither, &cfg.model_path) {
        (DitherChoice::Auto, Some(path)) => Ok(Some(model::load_model(path).stage(Stage::Parse)?)),
        _ => Ok(None),
    }
}

fn cmd_dequant(input: &Path, output: &Path, cfg: &PipelineConfig) -> CmdResult {
    let doc = load_gif(input)?;
    let router = load_router(cfg)?;
    let run_cfg = PipelineConfig { interp_factor: 1, ..cfg.clone() };
    let restored =
        pipeline::restore_video(&doc, &run_cfg, router.as_ref()).stage(Stage::Process)?;
    imageio::save_frames(output, &restored.frames, cfg.output_format).stage(Stage::Process)?;
    println!(
        "dequantized {} frames (mode {:?}) -> {}",
        restored.frames.len(),
        restored.mode,
        output.display()
    );
    Ok(())
}

fn cmd_interp(
    input: &Path,
    output: &Path,
    dump_flow: &Option<PathBuf>,
    cfg: &PipelineConfig,
) -> CmdResult {
    let doc = load_gif(input)?;
    let router = load_router(cfg)?;
    let restored = pipeline::restore_video(&doc, cfg, router.as_ref()).stage(Stage::Process)?;
    imageio::save_frames(output, &restored.frames, cfg.output_format).stage(Stage::Process)?;

    if let Some(flow_dir) = dump_flow {
        let gif_frames = doc.to_images();
        let params = cfg.flow.to_core();
        for i in 0..gif_frames.len().saturating_sub(1) {
            let f01 =
                estimate_flow(&gif_frames[i], &gif_frames[i + 1], &params).stage(Stage::Process)?;
            let f10 =
                estimate_flow(&gif_frames[i + 1], &gif_frames[i], &params).stage(Stage::Process)?;
            flo::write_flo(&flow_dir.join(format!("pair_{i:04}_fwd.flo")), &f01)
                .stage(Stage::Process)?;
            flo::write_flo(&flow_dir.join(format!("pair_{i:04}_bwd.flo")), &f10)
                .stage(Stage::Process)?;
        }
    }
    println!(
        "restored {} -> {} frames (mode {:?}, factor {}) -> {}",
        doc.frames.len(),
        restored.frames.len(),
        restored.mode,
        cfg.interp_factor,
        output.display()
    );
    Ok(())
}

fn dataset_features(dataset: &Path) -> Result<Vec<(DitherFeatures, DitherMode)>, StagedError> {
    let m = manifest::load_manifest(dataset).stage(Stage::Parse)?;
    let mut pairs = Vec::new();
    for clip in &m.clips {
        for (dir, label) in [
            (synth::NODITHER_DIR, DitherMode::NonDithered),
            (synth::DITHER_DIR, DitherMode::Dithered),
        ] {
            let frames =
                imageio::load_frames(&dataset.join(&clip.id).join(dir)).stage(Stage::Parse)?;
            for frame in &frames {
                pairs.push((extract_features(frame).stage(Stage::Process)?, label));
            }
        }
    }
    Ok(pairs)
}

fn cmd_classify_fit(dataset: &Path, model_out: &Path, cfg: &PipelineConfig) -> CmdResult {
    let mut pairs = dataset_features(dataset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    pairs.shuffle(&mut rng);

    // Hold out 20% to report an accuracy, then fit the final model on all.
    let split = pairs.len() * 4 / 5;
    let held_out_accuracy = if split > 0 && split < pairs.len() {
        let probe = ungif_core::fit(&pairs[..split]).stage(Stage::Process)?;
        let hits = pairs[split..].iter().filter(|(f, label)| probe.decide(f) == *label).count();
        Some(hits as f64 / (pairs.len() - split) as f64)
    } else {
        None
    };

    let final_model = ungif_core::fit(&pairs).stage(Stage::Process)?;
    model::save_model(model_out, &final_model).stage(Stage::Process)?;
    match held_out_accuracy {
        Some(acc) => println!(
            "fitted router on {} frames, held-out accuracy {:.3} -> {}",
            pairs.len(),
            acc,
            model_out.display()
        ),
        None => println!("fitted router on {} frames -> {}", pairs.len(), model_out.display()),
    }
    Ok(())
}

fn cmd_classify_apply(input: &Path, model_path: &Path) -> CmdResult {
    let router = model::load_model(model_path).stage(Stage::Parse)?;
    let frames = if input.extension().and_then(|e| e.to_str()) == Some("gif") {
        load_gif(input)?.to_images()
    } else {
        vec![imageio::load_image(input).stage(Stage::Parse)?]
    };
    let mut votes = 0usize;
    for (i, frame) in frames.iter().enumerate() {
        let mode = ungif_core::classify(frame, &router).stage(Stage::Process)?;
        if mode == DitherMode::Dithered {
            votes += 1;
        }
        println!("frame {i}: {}", label(mode));
    }
    let overall =
        if 2 * votes > frames.len() { DitherMode::Dithered } else { DitherMode::NonDithered };
    println!("overall: {}", label(overall));
    Ok(())
}

fn label(mode: DitherMode) -> &'static str {
    match mode {
        DitherMode::Dithered => "dithered",
        DitherMode::NonDithered => "non-dithered",
    }
}

fn cmd_synth(input: &Path, output: &Path, cfg: &PipelineConfig) -> CmdResult {
    let m = synth::synth_pairs(input, output, cfg).stage(Stage::Process)?;
    let frames: usize = m.clips.iter().map(|c| c.frame_count).sum();
    println!(
        "synthesized {} clips ({} frames) at palette size {} -> {}",
        m.clips.len(),
        frames,
        m.palette_size,
        output.display()
    );
    Ok(())
}

fn cmd_eval(dataset: &Path, output: &Path, factors: &[usize], cfg: &PipelineConfig) -> CmdResult {
    let records = eval::eval_sweep(dataset, cfg, factors).stage(Stage::Process)?;
    eval::write_json(&output.join("report.json"), &records).stage(Stage::Process)?;
    eval::write_csv(&output.join("report.csv"), &records).stage(Stage::Process)?;
    for r in &records {
        println!(
            "clip {} factor {}: gif {:.2}/{:.3} restored {:.2}/{:.3}",
            r.clip_id,
            r.factor,
            r.gif_mean.psnr,
            r.gif_mean.ssim,
            r.restored_mean.psnr,
            r.restored_mean.ssim
        );
    }
    println!("wrote {} records -> {}", records.len(), output.display());
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match &cli.command {
        Command::Encode { input, output, delay, flags } => {
            let cfg = load_config(&cli.config, flags, false)?;
            cmd_encode(input, output, *delay, &cfg)
        }
        Command::Dequant { input, output, flags } => {
            let cfg = load_config(&cli.config, flags, true)?;
            cmd_dequant(input, output, &cfg)
        }
        Command::Interp { input, output, dump_flow, flags } => {
            let cfg = load_config(&cli.config, flags, true)?;
            cmd_interp(input, output, dump_flow, &cfg)
        }
        Command::Classify { input, fit, flags } => {
            let model = flags
                .model
                .clone()
                .ok_or_else(|| anyhow!("classify needs --model"))
                .stage(Stage::Config)?;
            match (input, fit) {
                (_, Some(dataset)) => {
                    let cfg = load_config(&cli.config, flags, false)?;
                    cmd_classify_fit(dataset, &model, &cfg)
                }
                (Some(input), None) => cmd_classify_apply(input, &model),
                (None, None) => {
                    Err(anyhow!("classify needs --input or --fit")).stage(Stage::Config)
                }
            }
        }
        Command::Synth { input, output, flags } => {
            let cfg = load_config(&cli.config, flags, false)?;
            cmd_synth(input, output, &cfg)
        }
        Command::Eval { dataset, output, factors, flags } => {
            let cfg = load_config(&cli.config, flags, true)?;
            cmd_eval(dataset, output, factors, &cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {:#}", err.source);
            match err.stage {
                Stage::Config => ExitCode::from(2),
                Stage::Parse => ExitCode::from(3),
                Stage::Process => ExitCode::from(4),
            }
        }
    }
}
