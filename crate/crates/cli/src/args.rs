use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use roofkit::roofline::SpillMode;
use roofkit::TrafficVariant;

/// Roofline design-space exploration for quantized CNN accelerators.
///
/// NETWORK and --hw take a file path or the name of a shipped preset
/// (`roofkit presets` lists them).
#[derive(Debug, Parser)]
#[command(name = "roofkit", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-layer OPS, BOPS, traffic and (with --hw) roofline classification.
    Analyze(AnalyzeArgs),
    /// Full roofline report as a table, CSV, JSON or SVG plot.
    Roofline(RooflineArgs),
    /// How many PEs fit in an area budget.
    Size(SizeArgs),
    /// Least-squares polynomial fit of `x,y` CSV data.
    Fit(FitArgs),
    /// Compare BOPS and compute cost as area predictors on
    /// `n,m,k,b_w,b_a,area` CSV data.
    Compare(CompareArgs),
    /// Memory access timeline of one layer, as run-length CSV.
    Timeline(TimelineArgs),
    /// Clock and bandwidth needed to keep an area budget busy.
    Reverse(ReverseArgs),
    /// List shipped presets, or print one.
    Presets(PresetsArgs),
    /// Serve the JSON API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Shorthand for --format json.
    #[arg(long, conflicts_with_all = ["format", "csv", "svg"])]
    pub json: bool,
    /// Shorthand for --format csv.
    #[arg(long, conflicts_with_all = ["format", "svg"])]
    pub csv: bool,
    /// Shorthand for --format svg.
    #[arg(long, conflicts_with = "format")]
    pub svg: bool,
    /// Write to this file instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

impl OutputArgs {
    pub fn format(&self, default: Format) -> Format {
        match (self.format, self.json, self.csv, self.svg) {
            (Some(f), ..) => f,
            (None, true, ..) => Format::Json,
            (None, _, true, _) => Format::Csv,
            (None, _, _, true) => Format::Svg,
            _ => default,
        }
    }
}

/// Output options for commands whose input flag is `--csv`.
#[derive(Debug, Args)]
pub struct TextOutputArgs {
    #[arg(long)]
    pub json: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

impl TextOutputArgs {
    pub fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            Format::Table
        }
    }
}

/// Overrides for the memory section of the hardware description.
#[derive(Debug, Args, Default)]
pub struct MemArgs {
    /// Memory transfer rate, MT/s.
    #[arg(long)]
    pub mem_rate_mhz: Option<f64>,
    /// Memory bus width, bits.
    #[arg(long)]
    pub bus_width: Option<u32>,
    /// Fraction of peak bandwidth actually available.
    #[arg(long)]
    pub derating: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spill {
    Onchip,
    Spill,
}

impl From<Spill> for SpillMode {
    fn from(s: Spill) -> Self {
        match s {
            Spill::Onchip => SpillMode::Onchip,
            Spill::Spill => SpillMode::Spill,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Traffic {
    SinglePass,
    GroupedOnchip,
    GroupedSpill,
}

impl From<Traffic> for TrafficVariant {
    fn from(t: Traffic) -> Self {
        match t {
            Traffic::SinglePass => TrafficVariant::SinglePass,
            Traffic::GroupedOnchip => TrafficVariant::GroupedOnchip,
            Traffic::GroupedSpill => TrafficVariant::GroupedSpill,
        }
    }
}

/// Parses `ROWSxCOLS` or `ROWS,COLS`.
pub fn parse_pair(s: &str) -> Result<[u32; 2], String> {
    let (a, b) = s.split_once(['x', 'X', ',']).ok_or_else(|| format!("expected ROWSxCOLS, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("`{t}`: {e}"));
    Ok([parse(a)?, parse(b)?])
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub network: String,
    /// Hardware description (TOML or JSON) or preset name.
    #[arg(long)]
    pub hw: Option<String>,
    /// Quantize weights and activations (and a fixed datapath) to this width.
    #[arg(long)]
    pub bits: Option<u32>,
    #[arg(long, value_enum, default_value = "single-pass")]
    pub traffic: Traffic,
    /// Channel grouping for the grouped traffic models, `IN,OUT`. Defaults
    /// to the PE array of --hw.
    #[arg(long, value_parser = parse_pair)]
    pub group: Option<[u32; 2]>,
    /// Partial-sum grouping for the roofline points, `ROWSxCOLS`.
    #[arg(long, value_parser = parse_pair)]
    pub array: Option<[u32; 2]>,
    #[arg(long, value_enum, default_value = "onchip")]
    pub spill: Spill,
    #[command(flatten)]
    pub mem: MemArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RooflineArgs {
    pub network: String,
    #[arg(long)]
    pub hw: String,
    #[arg(long)]
    pub bits: Option<u32>,
    #[arg(long, value_parser = parse_pair)]
    pub array: Option<[u32; 2]>,
    #[arg(long, value_enum, default_value = "onchip")]
    pub spill: Spill,
    /// Relative distance to the compute ceiling reported as borderline.
    #[arg(long)]
    pub borderline_tol: Option<f64>,
    #[command(flatten)]
    pub mem: MemArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SizeArgs {
    /// Hardware description; the flags below override its fields.
    #[arg(long)]
    pub hw: Option<String>,
    #[arg(long, conflicts_with = "area_um2")]
    pub area_mm2: Option<f64>,
    #[arg(long)]
    pub area_um2: Option<f64>,
    /// Fixed-point operand width.
    #[arg(long, conflicts_with = "float")]
    pub bits: Option<u32>,
    /// 32-bit floating point datapath.
    #[arg(long)]
    pub float: bool,
    #[arg(long)]
    pub freq_mhz: Option<f64>,
    #[arg(long)]
    pub k: Option<u32>,
    /// Calibration preset name or JSON file.
    #[arg(long)]
    pub calibration: Option<String>,
    #[arg(long, value_parser = parse_pair)]
    pub array: Option<[u32; 2]>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with `x,y` columns; `-` reads stdin.
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    #[command(flatten)]
    pub out: TextOutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// CSV with `n,m,k,b_w,b_a,area` columns; `-` reads stdin.
    #[arg(long)]
    pub csv: PathBuf,
    #[command(flatten)]
    pub out: TextOutputArgs,
}

#[derive(Debug, Args)]
pub struct TimelineArgs {
    pub network: String,
    /// Layer name or zero-based index.
    #[arg(long)]
    pub layer: String,
    #[arg(long)]
    pub bus_bits: u64,
    /// Read one value per input feature each cycle (`false`: one value).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub per_feature: bool,
    #[arg(long, default_value_t = 1)]
    pub batch: u32,
    #[arg(long)]
    pub bits: Option<u32>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReverseArgs {
    pub network: String,
    #[arg(long, conflicts_with = "area_um2", required_unless_present = "area_um2")]
    pub area_mm2: Option<f64>,
    #[arg(long)]
    pub area_um2: Option<f64>,
    /// Sets both --b-w and --b-a.
    #[arg(long, required_unless_present_all = ["b_w", "b_a"])]
    pub bits: Option<u32>,
    #[arg(long, conflicts_with = "bits", requires = "b_a")]
    pub b_w: Option<u32>,
    #[arg(long, conflicts_with = "bits", requires = "b_w")]
    pub b_a: Option<u32>,
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    /// Clock at which the bandwidth requirement is reported.
    #[arg(long)]
    pub freq_mhz: f64,
    #[arg(long, value_enum, default_value = "onchip")]
    pub spill: Spill,
    #[arg(long)]
    pub calibration: Option<String>,
    #[command(flatten)]
    pub mem: MemArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PresetsArgs {
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}
