//! `fusionqa`: quality metrics for pan-sharpened imagery.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use fusionqa_core::edge_map::parse_thresholds;
use fusionqa_core::Error;

#[derive(Debug, Parser)]
#[command(
    name = "fusionqa",
    version,
    about = "Spatial and spectral quality metrics for pan-sharpened images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone)]
struct Thresholds(Vec<u8>);

fn thresholds_arg(text: &str) -> Result<Thresholds, String> {
    parse_thresholds(text)
        .map(Thresholds)
        .map_err(|e| e.to_string())
}

fn fused_arg(text: &str) -> Result<(String, PathBuf), String> {
    match text.split_once('=') {
        Some((label, path)) if !label.is_empty() && !path.is_empty() => {
            Ok((label.to_string(), PathBuf::from(path)))
        }
        Some(_) => Err(format!("expected LABEL=PATH, got `{text}`")),
        None => {
            let path = PathBuf::from(text);
            let label = commands::stem_label(&path);
            Ok((label, path))
        }
    }
}

fn region_arg(text: &str) -> Result<commands::RegionArg, String> {
    commands::RegionArg::parse(text)
}

fn shift_arg(text: &str) -> Result<[i32; 3], String> {
    let parts: Vec<i32> = text
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<i32>()
                .map_err(|_| format!("bad shift component `{p}`"))
        })
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| format!("expected three comma-separated shifts, got `{text}`"))
}

#[derive(Debug, Clone)]
struct Gains(Vec<f64>);

fn gains_arg(text: &str) -> Result<Gains, String> {
    text.split(',')
        .map(|p| match p.trim().parse::<f64>() {
            Ok(g) if g.is_finite() && g >= 0.0 => Ok(g),
            _ => Err(format!("bad gain `{p}`")),
        })
        .collect::<Result<_, _>>()
        .map(Gains)
}

#[derive(Debug, Args)]
struct RegionOpts {
    /// Region as `x0,y0,w,h` or `name=x0,y0,w,h`; repeatable.
    #[arg(long = "region", value_parser = region_arg, conflicts_with = "config")]
    regions: Vec<commands::RegionArg>,
    /// JSON region config; without regions or config the built-in b1/b2/b3 set is used.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full report for MS, PAN and fused images.
    Evaluate {
        #[arg(long)]
        pan: PathBuf,
        #[arg(long)]
        ms: PathBuf,
        /// Fused image as `LABEL=PATH`; repeatable.
        #[arg(long, required = true, value_parser = fused_arg)]
        fused: Vec<(String, PathBuf)>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "fusionqa-report")]
        out: PathBuf,
        #[arg(long, value_parser = thresholds_arg, default_value = "20,40,60,80,100")]
        thresholds: Thresholds,
        /// Sobel threshold for the edge-pixel histograms.
        #[arg(long, default_value_t = 20)]
        hist_threshold: u8,
    },
    /// Edge rates per band and threshold.
    Edges {
        image: PathBuf,
        #[arg(long, value_parser = thresholds_arg, default_value = "20,40,60,80,100")]
        thresholds: Thresholds,
        /// Write each edge mask as a PGM (edge = 255) into this directory.
        #[arg(long)]
        mask_out: Option<PathBuf>,
    },
    /// Standard-deviation contrast: edge and homogeneous pixels per threshold,
    /// or regions when `--region`/`--config` is given.
    Csa {
        image: PathBuf,
        #[arg(long, value_parser = thresholds_arg, default_value = "20,40,60,80,100")]
        thresholds: Thresholds,
        #[command(flatten)]
        regions: RegionOpts,
        /// Also report the whole image.
        #[arg(long)]
        whole: bool,
    },
    /// Michelson contrast over regions.
    Mtf {
        image: PathBuf,
        #[command(flatten)]
        regions: RegionOpts,
        #[arg(long)]
        whole: bool,
    },
    /// Region SNR, or whole-image SNR against a reference with `--whole`.
    Snr {
        image: PathBuf,
        #[command(flatten)]
        regions: RegionOpts,
        #[arg(long, requires = "reference")]
        whole: bool,
        /// Reference image (MS); may be on a coarser integer-ratio grid.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Histogram distance to a reference over edge pixels, or the whole image.
    Hist {
        image: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, default_value_t = 20)]
        threshold: u8,
        #[arg(long)]
        whole: bool,
        /// Write the 256-bin histograms as CSV into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes synthetic pan.pgm, ms.ppm and fused_*.ppm fixtures.
    Fixtures {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long, default_value_t = 600)]
        width: usize,
        #[arg(long, default_value_t = 525)]
        height: usize,
        /// High-frequency gains, one fused image each.
        #[arg(long, value_parser = gains_arg, default_value = "0,1")]
        gains: Gains,
        /// Per-band offsets added to every fused image.
        #[arg(long, value_parser = shift_arg, allow_hyphen_values = true, default_value = "0,0,0")]
        shift: [i32; 3],
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("FUSIONQA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("FUSIONQA_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<String, Error> {
    match cli.command {
        Command::Evaluate {
            pan,
            ms,
            fused,
            config,
            out,
            thresholds,
            hist_threshold,
        } => commands::evaluate(pan, ms, fused, config, out, thresholds.0, hist_threshold),
        Command::Edges {
            image,
            thresholds,
            mask_out,
        } => commands::edges(&image, &thresholds.0, mask_out.as_deref()),
        Command::Csa {
            image,
            thresholds,
            regions,
            whole,
        } => commands::csa(
            &image,
            &thresholds.0,
            &regions.regions,
            regions.config.as_deref(),
            whole,
        ),
        Command::Mtf {
            image,
            regions,
            whole,
        } => commands::mtf(&image, &regions.regions, regions.config.as_deref(), whole),
        Command::Snr {
            image,
            regions,
            whole,
            reference,
        } => match (whole, reference) {
            (true, Some(reference)) => commands::snr_whole(&image, &reference),
            _ => commands::snr_regions(&image, &regions.regions, regions.config.as_deref()),
        },
        Command::Hist {
            image,
            reference,
            threshold,
            whole,
            out,
        } => commands::hist(
            &image,
            &reference,
            (!whole).then_some(threshold),
            out.as_deref(),
        ),
        Command::Fixtures {
            out,
            seed,
            width,
            height,
            gains,
            shift,
        } => commands::fixtures(&out, seed, width, height, &gains.0, shift),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("fusionqa: {msg}");
        return ExitCode::from(64);
    }
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fusionqa: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
