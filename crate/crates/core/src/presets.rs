//! Shipped networks, calibration profiles and hardware descriptions,
//! embedded in the binary.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hwmodel::CalibrationProfile;
use crate::netmodel::{parse_network, Network};
use crate::scenario::HardwareSpec;

macro_rules! embed {
    ($dir:literal, $($name:literal => $ext:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../presets/", $dir, "/", $name, $ext)))),*]
    };
}

const NETWORKS: &[(&str, &str)] = embed!("networks",
    "resnet18" => ".json",
    "resnet18_layer2" => ".json",
    "resnet18_layer11" => ".json",
);

const CALIBRATIONS: &[(&str, &str)] = embed!("calibration",
    "tsmc28-paper" => ".json",
    "all-to-all" => ".json",
    "systolic" => ".json",
);

const HARDWARE: &[(&str, &str)] = embed!("hardware",
    "ex1-float32" => ".toml",
    "ex1-fixed32" => ".toml",
    "ex1-16bit" => ".toml",
    "ex1-8bit" => ".toml",
    "ex2-float32" => ".toml",
    "ex2-fixed32" => ".toml",
    "ex2-16bit" => ".toml",
    "ex2-8bit" => ".toml",
    "ex2-4bit" => ".toml",
    "resnet18-16x16" => ".toml",
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetKind {
    Network,
    Calibration,
    Hardware,
}

#[derive(Debug, Clone, Serialize)]
pub struct PresetIndex {
    pub networks: Vec<&'static str>,
    pub calibrations: Vec<&'static str>,
    pub hardware: Vec<&'static str>,
}

pub fn index() -> PresetIndex {
    let names = |t: &[(&'static str, &str)]| t.iter().map(|(n, _)| *n).collect();
    PresetIndex { networks: names(NETWORKS), calibrations: names(CALIBRATIONS), hardware: names(HARDWARE) }
}

/// Accepts a bare preset name or a file name such as `resnet18.json`.
fn stem(name: &str) -> &str {
    let base = name.rsplit(['/', '\\']).next().unwrap_or(name);
    base.strip_suffix(".json").or_else(|| base.strip_suffix(".toml")).unwrap_or(base)
}

fn lookup(table: &'static [(&'static str, &'static str)], name: &str) -> Option<&'static str> {
    let key = stem(name);
    table.iter().find(|(n, _)| *n == key).map(|(_, text)| *text)
}

/// Raw document text of any preset.
pub fn raw(name: &str) -> Option<(PresetKind, &'static str)> {
    lookup(NETWORKS, name)
        .map(|t| (PresetKind::Network, t))
        .or_else(|| lookup(CALIBRATIONS, name).map(|t| (PresetKind::Calibration, t)))
        .or_else(|| lookup(HARDWARE, name).map(|t| (PresetKind::Hardware, t)))
}

pub fn network(name: &str) -> Result<Network> {
    let text = lookup(NETWORKS, name).ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    parse_network(text)
}

pub fn calibration(name: &str) -> Result<CalibrationProfile> {
    let text = lookup(CALIBRATIONS, name).ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    CalibrationProfile::from_json(text)
}

pub fn hardware(name: &str) -> Result<HardwareSpec> {
    let text = lookup(HARDWARE, name).ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    HardwareSpec::from_toml(text)
}
