use std::path::{Path, PathBuf};

use serde::Serialize;
use settle_core::sim::{
    crossing_histogram, eye_diagram, generate_bits, propagate_rc, BitSource, RcLineSpec, Region,
    Waveform,
};

use super::{rc_spec, section, source_kind};
use crate::config::{ExperimentConfig, EyeChannelConfig};
use crate::error::CliError;
use crate::output::{fmt_num, Csv, OutputDir};

#[derive(Debug, Serialize)]
struct RegionSummary {
    start_ui: f64,
    end_ui: f64,
    width_ui: f64,
    centroid_ui: f64,
    count: u64,
}

impl From<&Region> for RegionSummary {
    fn from(r: &Region) -> Self {
        Self {
            start_ui: r.start_ui,
            end_ui: r.end_ui,
            width_ui: r.width_ui(),
            centroid_ui: r.centroid_ui,
            count: r.count,
        }
    }
}

#[derive(Debug, Serialize)]
struct Summary {
    seed: u64,
    total_rc_ui: Option<f64>,
    total_crossings: u64,
    window_ui: f64,
    eye_opening: f64,
    peak_count: u64,
    occupied_bins: usize,
    regions: Vec<RegionSummary>,
    sub_windows_ui: Vec<f64>,
}

enum Channel {
    Rc(RcLineSpec),
    Square(usize),
}

pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let e = section(&cfg.eye, "eye")?;
    let seed = cfg.require_seed()?;
    let kind = source_kind(&e.source)?;
    let channel = match &e.channel {
        EyeChannelConfig::RcLine {
            sections,
            r_per_section_ohm,
            c_per_section_ff,
            ui_ns,
            samples_per_ui,
            substeps,
        } => Channel::Rc(rc_spec(
            *sections,
            *r_per_section_ohm,
            *c_per_section_ff,
            *ui_ns,
            *samples_per_ui,
            *substeps,
        )?),
        EyeChannelConfig::Square { samples_per_ui } => {
            if *samples_per_ui == 0 {
                return Err(CliError::config("samples_per_ui must be positive"));
            }
            Channel::Square(*samples_per_ui)
        }
    };
    if e.bits < e.warmup_ui + 2 {
        return Err(CliError::config(format!(
            "need at least two bits after the {}-bit warm-up, got {} bits",
            e.warmup_ui, e.bits
        )));
    }
    if e.span_ui == 0 || e.max_traces == 0 {
        return Err(CliError::config("span_ui and max_traces must be positive"));
    }
    if !(e.merge_gap_ui >= 0.0) {
        return Err(CliError::config("merge_gap_ui must be non-negative"));
    }
    let bins = (1.0 / e.bin_width_ui).round();
    if !(e.bin_width_ui > 0.0) || (bins * e.bin_width_ui - 1.0).abs() > 1e-9 {
        return Err(CliError::config(format!(
            "bin_width_ui {} must divide one UI",
            e.bin_width_ui
        )));
    }

    let bits = generate_bits(&BitSource { kind, seed }, e.bits)?;
    let (wave, total_rc_ui) = match channel {
        Channel::Rc(spec) => (propagate_rc(&bits, &spec)?, Some(spec.total_rc_ui())),
        Channel::Square(spu) => {
            let levels: Vec<f64> = bits.iter().map(|&b| b as f64).collect();
            (Waveform::square(&levels, spu), None)
        }
    };
    let wave = wave.tail(e.warmup_ui);
    let hist = crossing_histogram(&wave, e.threshold, e.bin_width_ui)?;
    let diagram = eye_diagram(&wave, e.span_ui, e.max_traces);

    let mut header = vec!["time_ui".to_string()];
    header.extend((0..diagram.traces.len()).map(|i| format!("trace_{i}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut eye = Csv::new(&header_refs);
    let len = diagram.traces.first().map_or(0, Vec::len);
    for k in 0..len {
        let mut row = vec![fmt_num(diagram.time_ui(k))];
        row.extend(diagram.traces.iter().map(|t| fmt_num(t[k])));
        eye.row(&row);
    }

    let mut crossings = Csv::new(&["bin_center", "count"]);
    for (k, &c) in hist.counts.iter().enumerate() {
        crossings.numbers(&[hist.bin_center(k), c as f64]);
    }

    let regions = hist.regions(e.merge_gap_ui);
    let summary = Summary {
        seed,
        total_rc_ui,
        total_crossings: hist.total_crossings,
        window_ui: hist.window_ui(),
        eye_opening: hist.eye_opening(),
        peak_count: hist.peak_count(),
        occupied_bins: hist.counts.iter().filter(|&&c| c > 0).count(),
        regions: regions.iter().map(RegionSummary::from).collect(),
        sub_windows_ui: hist.sub_windows(e.merge_gap_ui),
    };

    let mut dir = OutputDir::create(out)?;
    dir.write_csv("eye.csv", &eye)?;
    dir.write_csv("crossings.csv", &crossings)?;
    dir.write_json("summary.json", &summary)?;
    Ok(dir.written().to_vec())
}
