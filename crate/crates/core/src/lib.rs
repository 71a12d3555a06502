//! Early-stage cost modeling for quantized CNN accelerators.
//!
//! The crate answers the questions an architect asks before any RTL exists:
//! how many bit operations a layer needs ([`netmodel`]), how much silicon a
//! processing engine (PE) costs and how many fit in a budget ([`hwmodel`]),
//! whether a layer is limited by compute or by memory bandwidth on a given
//! accelerator ([`roofline`]), what the memory bus looks like cycle by cycle
//! ([`timeline`]), and how well a metric predicts synthesized area
//! ([`regression`]).
//!
//! [`scenario`] ties these together behind the hardware-description format
//! used by the command line tool and the JSON API, and [`render`] turns
//! reports into CSV and SVG.

pub mod error;
pub mod hwmodel;
pub mod netmodel;
pub mod presets;
pub mod regression;
pub mod render;
pub mod roofline;
pub mod scenario;
pub mod timeline;

pub use error::{Error, Result};
pub use hwmodel::{AcceleratorConfig, AreaEstimator, ArithmeticKind, CalibrationProfile, SizingResult};
pub use netmodel::{Layer, Network, TrafficBreakdown, TrafficModel, TrafficVariant};
pub use regression::FitResult;
pub use roofline::{Classification, MemoryConfig, PointVariant, RooflinePoint, RooflineReport};
pub use timeline::TimelineTrace;
