use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use omra::args::{parse_pair, parse_scale, parse_variant, variant_name};
use omra::eval::{evaluate, rd_sweep};
use omra::io::{self, Format};
use omra::report::{self, profile_csv, profile_from_reports, profile_from_stream, scale_hist_csv, scale_histogram};
use omra::synth::{synth, MotionKind, SynthSpec};
use omra_core::container;
use omra_core::gop::build_plan;
use omra_core::metrics::bd_rate;
use omra_core::motion::{estimate_flow, EstimatorConfig};
use omra_core::{decode_sequence, EncoderConfig, ScaleFactor, Sequence, Variant};

#[derive(Parser)]
#[command(name = "omra", version, about = "Hierarchical B-frame codec with per-frame motion resolution search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Raw RGB24 file or PNG directory.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "raw_rgb24", value_parser = parse_format)]
    format: Format,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    frames: Option<usize>,
}

#[derive(Args)]
struct Coding {
    #[arg(long, default_value_t = 32)]
    intra_period: u32,
    /// omra, a, b or fixed:S
    #[arg(long, default_value = "omra", value_parser = parse_variant)]
    variant: Variant,
    #[arg(long, default_value = "1,2,4,8", value_delimiter = ',', value_parser = parse_scale)]
    scales: Vec<ScaleFactor>,
}

impl Coding {
    fn config(&self, q_base: f64, variant: Variant) -> EncoderConfig {
        EncoderConfig::new(q_base, variant).with_intra_period(self.intra_period).with_scales(self.scales.clone())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Encode a sequence to a bitstream.
    Encode {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        coding: Coding,
        #[arg(long, default_value_t = 12.0)]
        q_base: f64,
        #[arg(long)]
        out: PathBuf,
        /// Per-frame CSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Decode a bitstream to frames.
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "raw_rgb24", value_parser = parse_format)]
        format: Format,
    },
    /// Encode at several quantisers and write a psnr,bpp CSV.
    RdSweep {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        coding: Coding,
        #[arg(long, default_value = "8,12,18,27", value_delimiter = ',')]
        q_base_list: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// BD-rate of a test curve against an anchor, in percent.
    BdRate {
        #[arg(long)]
        anchor: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Per-frame CSV, from a bitstream or from a timed encode against fixed:1.
    Profile {
        #[arg(long)]
        from_stream: Option<PathBuf>,
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        coding: Coding,
        #[arg(long, default_value_t = 12.0)]
        q_base: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// variant,encode_seconds CSV.
        #[arg(long)]
        timing: Option<PathBuf>,
    },
    /// Chosen-scale frequencies per position within the intra period.
    ScaleHist {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic sequence.
    Synth {
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
        #[arg(long, default_value_t = 97)]
        frames: usize,
        /// Pixels per frame, `vx,vy`.
        #[arg(long, default_value = "3,0", value_parser = parse_pair, allow_hyphen_values = true)]
        velocity: (f64, f64),
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Gaussian noise sigma.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long = "static")]
        still: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "raw_rgb24", value_parser = parse_format)]
        format: Format,
    },
    /// Coding plan as CSV.
    Plan {
        #[arg(long)]
        frames: usize,
        #[arg(long, default_value_t = 32)]
        intra_period: u32,
    },
    /// Dump the estimated flow from frame `cur` to frame `reference`.
    Flow {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        cur: usize,
        #[arg(long = "ref")]
        reference: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

enum Failure {
    Usage(String),
    Run(omra::Error),
}

impl From<omra::Error> for Failure {
    fn from(e: omra::Error) -> Failure {
        Failure::Run(e)
    }
}

impl From<omra_core::Error> for Failure {
    fn from(e: omra_core::Error) -> Failure {
        Failure::Run(e.into())
    }
}

type Outcome = Result<(), Failure>;

impl Input {
    fn load(&self) -> Result<Sequence, Failure> {
        let need = |v: Option<usize>, name: &str| v.ok_or_else(|| Failure::Usage(format!("--{name} is required")));
        let path = self.input.as_ref().ok_or_else(|| Failure::Usage("--input is required".into()))?;
        let (w, h, n) = (need(self.width, "width")?, need(self.height, "height")?, need(self.frames, "frames")?);
        Ok(io::load_sequence(path, self.format, w, h, n)?)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => Ok(io::write_file(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|source| Failure::Run(omra::Error::Io { path: path.into(), source }))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Encode { input, coding, q_base, out, report } => {
            let seq = input.load()?;
            let op = evaluate(&seq, &coding.config(q_base, coding.variant))?;
            io::write_file(&out, &op.output.bitstream)?;
            if let Some(path) = report {
                io::write_file(&path, profile_csv(&profile_from_reports(&op.output.reports)))?;
            }
            eprintln!("{} bytes, {:.4} bpp, {:.3} dB", op.output.bitstream.len(), op.point.bpp, op.point.psnr);
        }
        Command::Decode { input, out, format } => {
            let data = io::read_file(&input)?;
            let seq = decode_sequence(&data).map_err(omra::Error::Bitstream)?;
            io::save_sequence(&seq, &out, format)?;
        }
        Command::RdSweep { input, coding, q_base_list, out } => {
            let seq = input.load()?;
            let pts = rd_sweep(&seq, &coding.config(12.0, coding.variant), &q_base_list)?;
            let rd: Vec<_> = pts.iter().map(|p| p.point).collect();
            emit(out.as_deref(), &report::rd_csv(&rd))?;
        }
        Command::BdRate { anchor, test } => {
            let load = |p: &Path| -> Result<_, Failure> {
                let pts = report::parse_rd_csv(&read_text(p)?)?;
                Ok(omra_core::metrics::RdCurve::new(pts)?)
            };
            println!("{:.4}", bd_rate(&load(&anchor)?, &load(&test)?)?);
        }
        Command::Profile { from_stream, input, coding, q_base, out, timing } => match from_stream {
            Some(bs) => {
                let original = match input.input {
                    Some(_) => Some(input.load()?),
                    None => None,
                };
                let rows = profile_from_stream(&io::read_file(&bs)?, original.as_ref())?;
                emit(out.as_deref(), &profile_csv(&rows))?;
            }
            None => {
                let seq = input.load()?;
                let tested = evaluate(&seq, &coding.config(q_base, coding.variant))?;
                let anchor_variant = Variant::FixedS(ScaleFactor::ONE);
                let anchor = evaluate(&seq, &coding.config(q_base, anchor_variant))?;
                let (t, a) = (tested.encode_time.as_secs_f64(), anchor.encode_time.as_secs_f64());
                eprintln!(
                    "encode wall-clock: {} {t:.3} s, {} {a:.3} s, ratio {:.3}",
                    variant_name(coding.variant),
                    variant_name(anchor_variant),
                    t / a
                );
                if let Some(path) = timing {
                    let text = format!(
                        "variant,encode_seconds\n{},{t:.6}\n{},{a:.6}\n",
                        variant_name(coding.variant),
                        variant_name(anchor_variant)
                    );
                    io::write_file(&path, text)?;
                }
                emit(out.as_deref(), &profile_csv(&profile_from_reports(&tested.output.reports)))?;
            }
        },
        Command::ScaleHist { input, out } => {
            let data = io::read_file(&input)?;
            let header = container::BitstreamHeader::parse(&data).map_err(omra::Error::Bitstream)?;
            let rows = profile_from_stream(&data, None)?;
            emit(out.as_deref(), &scale_hist_csv(&scale_histogram(&rows, header.intra_period as usize)))?;
        }
        Command::Synth { width, height, frames, velocity, seed, noise, still, out, format } => {
            if width == 0 || height == 0 || frames == 0 || !(noise >= 0.0) {
                return Err(Failure::Usage("dimensions must be positive and noise non-negative".into()));
            }
            let spec = SynthSpec {
                width,
                height,
                frame_count: frames,
                velocity,
                texture_seed: seed,
                noise_sigma: noise,
                motion: if still { MotionKind::Static } else { MotionKind::PanWrap },
            };
            io::save_sequence(&synth(&spec), &out, format)?;
        }
        Command::Plan { frames, intra_period } => {
            print!("{}", build_plan(frames, intra_period)?.to_csv());
        }
        Command::Flow { input, cur, reference, out } => {
            let seq = input.load()?;
            let get = |i: usize| {
                seq.frames.get(i).ok_or_else(|| Failure::Usage(format!("frame {i} out of range")))
            };
            let flow = estimate_flow(get(cur)?, get(reference)?, &EstimatorConfig::default())?;
            io::write_file(&out, io::encode_flow_dump(&flow)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
