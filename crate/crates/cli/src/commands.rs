use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use roofkit::hwmodel::size_pe_array;
use roofkit::netmodel::{LayerMetrics, NetworkTotals};
use roofkit::presets;
use roofkit::regression::{compare_metrics, fit, FitResult, MetricComparison, MetricSample};
use roofkit::render::{report_csv, report_svg};
use roofkit::roofline::{reverse_design, ClassifiedPoint, ReverseDesign, ReverseDesignRequest};
use roofkit::scenario::{
    AnalyzeRequest, CalibrationRef, HardwareInput, HardwareSpec, LayerSelector, MemSpec, NetworkInput, Scenario,
};
use roofkit::timeline::{simulate, TimelineOptions};
use roofkit::{
    ArithmeticKind, Classification, PointVariant, RooflineReport, SizingResult, TimelineTrace, TrafficModel,
    TrafficVariant,
};
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::input::{self, Hardware};
use crate::server;
use crate::table::{sig, Table};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(a) => analyze(&a),
        Command::Roofline(a) => roofline(&a),
        Command::Size(a) => size(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Compare(a) => compare(&a),
        Command::Timeline(a) => timeline(&a),
        Command::Reverse(a) => reverse(&a),
        Command::Presets(a) => list_presets(&a),
        Command::Serve(a) => server::serve(&a.host, a.port),
    }
}

fn emit(out: &OutputArgs, text: &str) -> Result<()> {
    write_out(out.output.as_deref(), text)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn unsupported(format: Format, command: &str) -> anyhow::Error {
    anyhow::anyhow!("{command} cannot write {format:?} output")
}

fn apply_mem(mem: &mut MemSpec, args: &MemArgs) {
    if let Some(r) = args.mem_rate_mhz {
        mem.transfer_rate_mhz = r;
    }
    if let Some(w) = args.bus_width {
        mem.bus_width_bits = w;
    }
    if let Some(d) = args.derating {
        mem.derating = d;
    }
}

/// Builds the same request the JSON API receives, with file inputs inlined.
fn scenario(network: &str, hw: &str, bits: Option<u32>, mem: &MemArgs) -> Result<(AnalyzeRequest, Hardware)> {
    let net = input::load_network(network)?;
    let mut hw = input::load_hardware(hw)?;
    apply_mem(&mut hw.spec.mem, mem);
    let mut req = AnalyzeRequest::new(NetworkInput::Inline(net), HardwareInput::Inline(Box::new(hw.spec.clone())));
    req.bits = bits;
    Ok((req, hw))
}

fn resolve(req: &AnalyzeRequest, hw: &Hardware) -> Result<Scenario> {
    let base = hw.base.clone();
    Ok(Scenario::from_request(req, &move |name| input::calibration_file(name, base.as_deref()))?)
}

fn gops(x: f64) -> String {
    sig(x / 1e9, 4)
}

fn class_cell(p: &ClassifiedPoint) -> String {
    let tag = match p.classification {
        Classification::Feasible => "ok",
        Classification::ComputeBound => "compute",
        Classification::MemoryBound => "memory",
        Classification::ComputeAndMemoryBound => "both",
    };
    if p.borderline {
        format!("{tag}*")
    } else {
        tag.to_string()
    }
}

// ---- analyze ----

#[derive(Debug, Serialize)]
struct AnalyzeOutput {
    network: String,
    traffic_model: TrafficModel,
    totals: Totals,
    layers: Vec<AnalyzedLayer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    roofline: Option<RooflineSummary>,
}

#[derive(Debug, Serialize)]
struct Totals {
    ops: u64,
    bops: u64,
    compute_cost: u64,
    traffic_bits: u64,
    ops_per_bit: f64,
}

#[derive(Debug, Serialize)]
struct AnalyzedLayer {
    #[serde(flatten)]
    metrics: LayerMetrics,
    b_w: u32,
    b_a: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    raw: Option<ClassifiedPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    partial_sum: Option<ClassifiedPoint>,
}

#[derive(Debug, Serialize)]
struct RooflineSummary {
    frequency: f64,
    compute_ceiling: f64,
    bandwidth: f64,
    ridge_point: f64,
    array: (u32, u32),
    sizing: SizingResult,
}

fn analyze(a: &AnalyzeArgs) -> Result<()> {
    let (network, report) = match &a.hw {
        Some(hw) => {
            let (mut req, hw) = scenario(&a.network, hw, a.bits, &a.mem)?;
            req.array = a.array;
            req.spill = a.spill.into();
            let sc = resolve(&req, &hw)?;
            let report = sc.report()?;
            (sc.network, Some(report))
        }
        None => {
            let net = input::load_network(&a.network)?;
            let net = match a.bits {
                Some(b) => net.with_bits(b, b)?,
                None => net,
            };
            (net, None)
        }
    };

    let variant: TrafficVariant = a.traffic.into();
    let model = if variant == TrafficVariant::SinglePass {
        TrafficModel::single_pass()
    } else {
        let [gi, go] = match (a.group, &report) {
            (Some(g), _) => g,
            (None, Some(r)) => [r.array.0, r.array.1],
            (None, None) => bail!("--traffic {variant} needs --group IN,OUT or --hw"),
        };
        TrafficModel::grouped(variant, gi, go)?
    };

    let totals: NetworkTotals = network.totals(&model);
    let mut layers = Vec::with_capacity(totals.layers.len());
    for (i, (metrics, layer)) in totals.layers.iter().zip(&network.layers).enumerate() {
        let (raw, partial_sum) = match &report {
            Some(r) => (Some(r.points[2 * i].clone()), Some(r.points[2 * i + 1].clone())),
            None => (None, None),
        };
        layers.push(AnalyzedLayer { metrics: metrics.clone(), b_w: layer.b_w, b_a: layer.b_a, raw, partial_sum });
    }
    let out = AnalyzeOutput {
        network: network.name.clone(),
        traffic_model: model,
        totals: Totals {
            ops: totals.ops,
            bops: totals.bops,
            compute_cost: totals.compute_cost,
            traffic_bits: totals.traffic.total_bits(),
            ops_per_bit: totals.ops_per_bit,
        },
        layers,
        roofline: report.map(|r| RooflineSummary {
            frequency: r.frequency,
            compute_ceiling: r.compute_ceiling,
            bandwidth: r.bandwidth,
            ridge_point: r.ridge_point,
            array: r.array,
            sizing: r.sizing,
        }),
    };

    let text = match a.out.format(Format::Table) {
        Format::Json => json(&out)?,
        Format::Table => analyze_table(&out),
        Format::Csv => analyze_csv(&out),
        f => return Err(unsupported(f, "analyze")),
    };
    emit(&a.out, &text)
}

fn analyze_table(out: &AnalyzeOutput) -> String {
    let with_hw = out.roofline.is_some();
    let mut header = vec!["layer", "bits", "MOPS", "MBOPS", "traffic Mbit", "OPS/bit"];
    if with_hw {
        header.extend(["req GOPS/s", "raw", "psum OPS/bit", "psum GOPS/s", "psum"]);
    }
    let mut t = Table::new(header);
    for l in &out.layers {
        let mut row = vec![
            l.metrics.name.clone(),
            format!("{}/{}", l.b_w, l.b_a),
            format!("{:.2}", l.metrics.ops as f64 / 1e6),
            format!("{:.2}", l.metrics.bops as f64 / 1e6),
            format!("{:.3}", l.metrics.traffic.total_bits() as f64 / 1e6),
            format!("{:.2}", l.metrics.ops_per_bit),
        ];
        if let (Some(raw), Some(ps)) = (&l.raw, &l.partial_sum) {
            row.extend([
                gops(raw.point.required_ops),
                class_cell(raw),
                format!("{:.2}", ps.point.ops_per_bit),
                gops(ps.point.required_ops),
                class_cell(ps),
            ]);
        }
        t.row(row);
    }
    let mut s = format!("{} ({} layers, traffic {})\n\n", out.network, out.layers.len(), out.traffic_model.variant);
    s.push_str(&t.render());
    s.push_str(&format!(
        "\ntotal: {:.2} MOPS, {:.2} MBOPS, {:.3} Mbit, {:.2} OPS/bit\n",
        out.totals.ops as f64 / 1e6,
        out.totals.bops as f64 / 1e6,
        out.totals.traffic_bits as f64 / 1e6,
        out.totals.ops_per_bit
    ));
    if let Some(r) = &out.roofline {
        s.push_str(&roofline_footer(r.frequency, r.compute_ceiling, r.bandwidth, r.ridge_point, r.array));
    }
    s
}

fn roofline_footer(freq: f64, ceiling: f64, bw: f64, ridge: f64, array: (u32, u32)) -> String {
    format!(
        "{:.0} MHz, {}x{} array: compute ceiling {} GOPS/s, bandwidth {} Gbit/s, ridge {:.2} OPS/bit\n\
         classes: ok = feasible, compute / memory / both = bound, * = within tolerance of the compute ceiling\n",
        freq / 1e6,
        array.0,
        array.1,
        gops(ceiling),
        sig(bw / 1e9, 4),
        ridge
    )
}

fn analyze_csv(out: &AnalyzeOutput) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "layer", "b_w", "b_a", "ops", "bops", "compute_cost", "weight_bits", "input_bits", "output_bits", "spill_bits",
        "traffic_bits", "ops_per_bit",
    ];
    if out.roofline.is_some() {
        header.extend([
            "required_ops",
            "classification",
            "borderline",
            "psum_ops_per_bit",
            "psum_required_ops",
            "psum_classification",
            "psum_borderline",
        ]);
    }
    let _ = w.write_record(&header);
    for l in &out.layers {
        let m = &l.metrics;
        let mut rec = vec![
            m.name.clone(),
            l.b_w.to_string(),
            l.b_a.to_string(),
            m.ops.to_string(),
            m.bops.to_string(),
            m.compute_cost.to_string(),
            m.traffic.weight_bits().to_string(),
            m.traffic.input_bits().to_string(),
            m.traffic.output_bits().to_string(),
            m.traffic.spill_bits().to_string(),
            m.traffic.total_bits().to_string(),
            m.ops_per_bit.to_string(),
        ];
        if let (Some(raw), Some(ps)) = (&l.raw, &l.partial_sum) {
            rec.extend([
                raw.point.required_ops.to_string(),
                raw.classification.to_string(),
                raw.borderline.to_string(),
                ps.point.ops_per_bit.to_string(),
                ps.point.required_ops.to_string(),
                ps.classification.to_string(),
                ps.borderline.to_string(),
            ]);
        }
        let _ = w.write_record(&rec);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

// ---- roofline ----

/// The report `roofline --json` prints; identical to `POST /api/analyze`.
pub fn roofline_report(a: &RooflineArgs) -> Result<RooflineReport> {
    let (mut req, hw) = scenario(&a.network, &a.hw, a.bits, &a.mem)?;
    req.array = a.array;
    req.spill = a.spill.into();
    req.borderline_tol = a.borderline_tol;
    Ok(resolve(&req, &hw)?.report()?)
}

fn roofline(a: &RooflineArgs) -> Result<()> {
    let report = roofline_report(a)?;
    let text = match a.out.format(Format::Table) {
        Format::Json => json(&report)?,
        Format::Csv => report_csv(&report),
        Format::Svg => report_svg(&report),
        Format::Table => roofline_table(&report),
    };
    emit(&a.out, &text)
}

fn roofline_table(r: &RooflineReport) -> String {
    let mut t = Table::new(["layer", "OPS/bit", "req GOPS/s", "class", "psum OPS/bit", "psum GOPS/s", "passes", "psum"]);
    let raw = r.points_of(PointVariant::Raw);
    let ps = r.points_of(PointVariant::PartialSum);
    for (raw, ps) in raw.zip(ps) {
        t.row([
            raw.point.layer_name.clone(),
            format!("{:.2}", raw.point.ops_per_bit),
            gops(raw.point.required_ops),
            class_cell(raw),
            format!("{:.2}", ps.point.ops_per_bit),
            gops(ps.point.required_ops),
            ps.point.passes.to_string(),
            class_cell(ps),
        ]);
    }
    let mut s = format!("{} (partial sums {})\n\n", r.network, r.spill);
    s.push_str(&t.render());
    s.push('\n');
    s.push_str(&roofline_footer(r.frequency, r.compute_ceiling, r.bandwidth, r.ridge_point, r.array));
    s
}

// ---- size ----

fn size_spec(a: &SizeArgs) -> Result<Hardware> {
    let mut hw = match &a.hw {
        Some(h) => input::load_hardware(h)?,
        None => {
            let kind = if a.float { ArithmeticKind::Float32 } else { ArithmeticKind::Fixed };
            let spec = HardwareSpec {
                area_mm2: None,
                area_um2: None,
                freq_mhz: a.freq_mhz.unwrap_or(0.0),
                kind,
                b_w: None,
                b_a: None,
                k: 3,
                calibration: None,
                array: None,
                estimator: None,
                mem: MemSpec::default(),
            };
            if a.freq_mhz.is_none() {
                bail!("size needs --freq-mhz (or --hw)");
            }
            if !a.float && a.bits.is_none() {
                bail!("size needs --bits N or --float (or --hw)");
            }
            Hardware { spec, base: None }
        }
    };
    let spec = &mut hw.spec;
    if a.area_mm2.is_some() || a.area_um2.is_some() {
        spec.area_mm2 = a.area_mm2;
        spec.area_um2 = a.area_um2;
    }
    if a.float {
        spec.kind = ArithmeticKind::Float32;
        spec.b_w = None;
        spec.b_a = None;
    }
    if let Some(b) = a.bits {
        spec.kind = ArithmeticKind::Fixed;
        spec.b_w = Some(b);
        spec.b_a = Some(b);
    }
    if let Some(f) = a.freq_mhz {
        spec.freq_mhz = f;
    }
    if let Some(k) = a.k {
        spec.k = k;
    }
    if let Some(c) = &a.calibration {
        spec.calibration = Some(CalibrationRef::Name(c.clone()));
        hw.base = None;
    }
    if a.array.is_some() {
        spec.array = a.array;
    }
    Ok(hw)
}

fn size(a: &SizeArgs) -> Result<()> {
    let hw = size_spec(a)?;
    let base = hw.base.clone();
    let (accel, _) = hw.spec.resolve_with(&move |name| input::calibration_file(name, base.as_deref()))?;
    let sizing = size_pe_array(&accel)?;
    let text = match a.out.format(Format::Table) {
        Format::Json => json(&sizing)?,
        Format::Table => {
            let mut t = Table::new(["quantity", "value"]);
            t.row(["datapath".to_string(), match accel.kind {
                ArithmeticKind::Float32 => "float32".to_string(),
                ArithmeticKind::Fixed => format!("fixed {}x{} bit", accel.b_w, accel.b_a),
            }]);
            t.row(["area budget [um2]".to_string(), format!("{:.0}", accel.area_budget)]);
            t.row(["PE area [um2]".to_string(), format!("{:.2}", sizing.pe_area)]);
            if let Some(mults) = sizing.multiplier_count {
                t.row(["multipliers".to_string(), mults.to_string()]);
            }
            t.row(["PEs".to_string(), sizing.pe_count.to_string()]);
            t.row(["array".to_string(), format!("{}x{}", sizing.array_rows, sizing.array_cols)]);
            t.row(["capacity [GOPS/s]".to_string(), gops(sizing.capacity)]);
            t.row(["PE power [mW]".to_string(), format!("{:.3}", sizing.est_power)]);
            t.render()
        }
        f => return Err(unsupported(f, "size")),
    };
    emit(&a.out, &text)
}

// ---- fit / compare ----

#[derive(Debug, Deserialize)]
struct XY {
    x: f64,
    y: f64,
}

fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = input::read_file(path)?;
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize().enumerate() {
        rows.push(rec.with_context(|| format!("`{}`, data row {}", path.display(), i + 1))?);
    }
    Ok(rows)
}

fn cmd_fit(a: &FitArgs) -> Result<()> {
    let rows: Vec<XY> = read_csv(&a.csv)?;
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.x, r.y)).collect();
    let f = fit(&points, a.degree)?;
    let text = match a.out.format() {
        Format::Json => json(&f)?,
        _ => fit_table(&f, points.len()),
    };
    write_out(a.out.output.as_deref(), &text)
}

fn polynomial(f: &FitResult) -> String {
    let d = f.coefficients.len() - 1;
    let terms: Vec<String> = f
        .coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| match d - i {
            0 => format!("{c:.6}"),
            1 => format!("{c:.6}*x"),
            p => format!("{c:.6}*x^{p}"),
        })
        .collect();
    terms.join(" + ").replace("+ -", "- ")
}

fn fit_table(f: &FitResult, n: usize) -> String {
    format!(
        "y = {}\npoints: {n}\nR^2: {:.9}\nmax relative error: {:.4}\n",
        polynomial(f),
        f.r_squared,
        f.max_rel_error
    )
}

fn compare(a: &CompareArgs) -> Result<()> {
    let samples: Vec<MetricSample> = read_csv(&a.csv)?;
    let c: MetricComparison = compare_metrics(&samples)?;
    let text = match a.out.format() {
        Format::Json => json(&c)?,
        _ => {
            let mut t = Table::new(["metric", "slope", "intercept", "R^2", "max LOO error"]);
            for (name, f, e) in [("bops", &c.bops_fit, c.bops_max_loo_error), ("compute-cost", &c.cc_fit, c.cc_max_loo_error)] {
                t.row([
                    name.to_string(),
                    format!("{:.6}", f.slope()),
                    format!("{:.3}", f.intercept()),
                    format!("{:.6}", f.r_squared),
                    format!("{:.2}%", e * 100.0),
                ]);
            }
            format!("{}samples: {}\nbetter predictor: {}\n", t.render(), samples.len(), c.verdict)
        }
    };
    write_out(a.out.output.as_deref(), &text)
}

// ---- timeline ----

fn timeline(a: &TimelineArgs) -> Result<()> {
    let mut net = input::load_network(&a.network)?;
    if let Some(b) = a.bits {
        net = net.with_bits(b, b)?;
    }
    let selector = match a.layer.parse::<usize>() {
        Ok(i) if net.layer(&a.layer).is_none() => LayerSelector::Index(i),
        _ => LayerSelector::Name(a.layer.clone()),
    };
    let layer = selector.pick(&net)?;
    let trace: TimelineTrace =
        simulate(layer, &TimelineOptions { bus_bits_per_cycle: a.bus_bits, per_feature: a.per_feature, batch: a.batch })?;
    let text = match a.out.format(Format::Csv) {
        Format::Csv => trace.to_csv(),
        Format::Json => json(&trace)?,
        Format::Table => format!(
            "{}: {} cycles ({} prefetch), {} bits, {} stall cycles, bus utilization {:.1}%\n",
            trace.layer_name,
            trace.total_cycles,
            trace.prefetch_end,
            trace.total_bits,
            trace.stall_cycles,
            trace.utilization * 100.0
        ),
        f => return Err(unsupported(f, "timeline")),
    };
    emit(&a.out, &text)
}

// ---- reverse ----

fn reverse(a: &ReverseArgs) -> Result<()> {
    let network = input::load_network(&a.network)?;
    let (b_w, b_a) = match (a.bits, a.b_w, a.b_a) {
        (Some(b), ..) => (b, b),
        (None, Some(w), Some(x)) => (w, x),
        _ => bail!("reverse needs --bits or both --b-w and --b-a"),
    };
    let profile = match &a.calibration {
        Some(c) => input::load_calibration(c)?,
        None => roofkit::CalibrationProfile::tsmc28(),
    };
    let mut mem = MemSpec::default();
    apply_mem(&mut mem, &a.mem);
    let area_budget = match (a.area_mm2, a.area_um2) {
        (Some(mm2), _) => mm2 * 1e6,
        (None, Some(um2)) => um2,
        (None, None) => bail!("reverse needs --area-mm2 or --area-um2"),
    };
    let req = ReverseDesignRequest {
        area_budget,
        b_w,
        b_a,
        k: a.k,
        memory: mem.to_config()?,
        spill: a.spill.into(),
        target_frequency: a.freq_mhz * 1e6,
    };
    let rd: ReverseDesign = reverse_design(&network, &req, &profile)?;
    let text = match a.out.format(Format::Table) {
        Format::Json => json(&rd)?,
        Format::Table => {
            let mut t = Table::new(["layer", "passes", "OPS/bit", "max MHz", "Gbit/s @ target"]);
            for l in &rd.layers {
                t.row([
                    l.name.clone(),
                    l.passes.to_string(),
                    format!("{:.2}", l.ops_per_bit),
                    l.max_frequency.map_or("unbounded".into(), |f| format!("{:.1}", f / 1e6)),
                    format!("{:.2}", l.required_bandwidth / 1e9),
                ]);
            }
            format!(
                "{}\narray {}x{} ({} PEs)\nmax clock: {}{}\nbandwidth needed at {:.0} MHz: {:.2} Gbit/s\n",
                t.render(),
                rd.sizing.array_rows,
                rd.sizing.array_cols,
                rd.sizing.placed_pes(),
                rd.max_frequency.map_or("unbounded".into(), |f| format!("{:.1} MHz", f / 1e6)),
                rd.limiting_layer.as_ref().map_or(String::new(), |l| format!(" (limited by {l})")),
                rd.target_frequency / 1e6,
                rd.required_bandwidth / 1e9
            )
        }
        f => return Err(unsupported(f, "reverse")),
    };
    emit(&a.out, &text)
}

// ---- presets ----

fn list_presets(a: &PresetsArgs) -> Result<()> {
    match &a.name {
        None => {
            let idx = presets::index();
            println!("networks:     {}", idx.networks.join(", "));
            println!("calibrations: {}", idx.calibrations.join(", "));
            println!("hardware:     {}", idx.hardware.join(", "));
        }
        Some(name) => {
            let Some((_, text)) = presets::raw(name) else {
                bail!(roofkit::Error::UnknownPreset(name.clone()));
            };
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
        }
    }
    Ok(())
}
