//! Loading networks, hardware descriptions and calibrations from files or
//! shipped presets.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use roofkit::netmodel::parse_network;
use roofkit::scenario::HardwareSpec;
use roofkit::{presets, CalibrationProfile, Network};

fn read(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).context("cannot read stdin")?;
        return Ok(text);
    }
    fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))
}

/// Reads a file, or `-` for stdin.
pub fn read_file(path: &Path) -> Result<String> {
    read(path)
}

fn is_file(arg: &str) -> bool {
    arg == "-" || Path::new(arg).is_file()
}

fn missing(kind: &str, arg: &str) -> anyhow::Error {
    anyhow::anyhow!("{kind} file `{arg}` not found and no preset has that name")
}

pub fn load_network(arg: &str) -> Result<Network> {
    if is_file(arg) {
        let text = read(Path::new(arg))?;
        return parse_network(&text).with_context(|| format!("in `{arg}`"));
    }
    match presets::network(arg) {
        Err(roofkit::Error::UnknownPreset(_)) => Err(missing("network", arg)),
        other => Ok(other?),
    }
}

/// A hardware description and the directory relative calibration paths are
/// resolved against.
#[derive(Debug, Clone)]
pub struct Hardware {
    pub spec: HardwareSpec,
    pub base: Option<PathBuf>,
}

pub fn load_hardware(arg: &str) -> Result<Hardware> {
    if is_file(arg) {
        let text = read(Path::new(arg))?;
        let spec = HardwareSpec::parse(&text).with_context(|| format!("in `{arg}`"))?;
        let base = Path::new(arg).parent().map(Path::to_path_buf);
        return Ok(Hardware { spec, base });
    }
    match presets::hardware(arg) {
        Err(roofkit::Error::UnknownPreset(_)) => Err(missing("hardware", arg)),
        other => Ok(Hardware { spec: other?, base: None }),
    }
}

/// Loads a calibration profile from a JSON file. Shipped presets are
/// resolved by the core before this is consulted.
pub fn calibration_file(name: &str, base: Option<&Path>) -> roofkit::Result<CalibrationProfile> {
    let path = match base {
        Some(dir) if Path::new(name).is_relative() => dir.join(name),
        _ => PathBuf::from(name),
    };
    let text = fs::read_to_string(&path).map_err(|e| roofkit::Error::Validation {
        what: "calibration".into(),
        reason: format!("cannot read `{}`: {e}", path.display()),
    })?;
    CalibrationProfile::from_json(&text)
}

pub fn load_calibration(arg: &str) -> Result<CalibrationProfile> {
    match presets::calibration(arg) {
        Err(roofkit::Error::UnknownPreset(_)) => {}
        other => return Ok(other?),
    }
    if !Path::new(arg).is_file() {
        bail!(missing("calibration", arg));
    }
    Ok(calibration_file(arg, None)?)
}
