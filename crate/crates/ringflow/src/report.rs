//! Artefact rendering: CSV series and JSON summaries.
//!
//! Everything here is deterministic text.  Floats are written with 17
//! significant digits so a rerun with the same inputs reproduces every
//! artefact byte for byte; no timestamps, hostnames or other ambient
//! state ever enter an output file.  CSV records use CRLF line endings
//! and RFC 4180 quoting.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::bath::{BathModes, BathParams, PRNG_ID};
use crate::config::{Engine, RunConfig, SweepConfig};
use crate::engine::{CompareOutput, FlowOutput, ResolvedRun, SweepRow};
use crate::kernel::RationalSolution;
use crate::model::{ChainParams, FrequencyConvention, SystemSpectrum};
use crate::observables::{FlowSegment, FlowSegments, FlowSeries};
use crate::propagator::AmplitudeState;
use crate::Result;

/// Identity block embedded in every JSON artefact: enough to rerun the
/// exact same computation.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub package: &'static str,
    pub version: &'static str,
    pub prng: &'static str,
    pub seed: u64,
    pub resolved_omega_c: f64,
    pub config: RunConfig,
}

impl Provenance {
    pub fn from_run(run: &ResolvedRun) -> Self {
        Provenance {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            prng: PRNG_ID,
            seed: run.bath.seed,
            resolved_omega_c: run.bath.omega_c,
            config: run.config.clone(),
        }
    }
}

/// 17 significant digits, round-trip exact for f64.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// RFC 4180: quote when the field contains a comma, quote or line break.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\r', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Distance and flow series, one row per sample: `t,D,R,sign`.
pub fn flow_csv(series: &FlowSeries, segments: &FlowSegments) -> String {
    let mut out = String::with_capacity(series.times.len() * 80 + 16);
    out.push_str("t,D,R,sign\r\n");
    for i in 0..series.times.len() {
        out.push_str(&fmt(series.times[i]));
        out.push(',');
        out.push_str(&fmt(series.d[i]));
        out.push(',');
        out.push_str(&fmt(series.r[i]));
        out.push(',');
        out.push_str(&segments.signs[i].to_string());
        out.push_str("\r\n");
    }
    out
}

/// Sweep summary table: `value,status,n_switch,a_mod,positive_fraction`.
/// Failed points keep their row with the metric cells empty.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("value,status,n_switch,a_mod,positive_fraction\r\n");
    for row in rows {
        out.push_str(&fmt(row.value));
        out.push(',');
        out.push_str(&csv_field(&row.status));
        match &row.metrics {
            Some(m) => {
                out.push(',');
                out.push_str(&m.n_switch.to_string());
                out.push(',');
                out.push_str(&fmt(m.a_mod));
                out.push(',');
                out.push_str(&fmt(m.positive_fraction));
            }
            None => out.push_str(",,,"),
        }
        out.push_str("\r\n");
    }
    out
}

/// Norm bookkeeping of a propagated trajectory:
/// `t,norm_defect,ground_pop,ring_pop,bath_pop`.
pub fn evolve_csv(states: &[AmplitudeState]) -> String {
    let mut out = String::from("t,norm_defect,ground_pop,ring_pop,bath_pop\r\n");
    for s in states {
        let ring: f64 = s.c.iter().map(|a| a.norm_sqr()).sum();
        for v in [s.t, s.norm_defect(), s.c0.norm_sqr(), ring, s.bath_population()] {
            out.push_str(&fmt(v));
            out.push(',');
        }
        out.pop();
        out.push_str("\r\n");
    }
    out
}

#[derive(Serialize)]
struct SegmentsDoc<'a> {
    provenance: &'a Provenance,
    n_switch: usize,
    a_mod: f64,
    positive_fraction: f64,
    degenerate: bool,
    segments: &'a [FlowSegment],
}

/// Segmentation summary plus full provenance.
pub fn segments_json(prov: &Provenance, segments: &FlowSegments) -> Result<String> {
    to_json(&SegmentsDoc {
        provenance: prov,
        n_switch: segments.n_switch,
        a_mod: segments.a_mod,
        positive_fraction: segments.positive_fraction,
        degenerate: segments.degenerate,
        segments: &segments.segments,
    })
}

#[derive(Serialize)]
struct PolesDoc<'a> {
    provenance: &'a Provenance,
    first: &'a RationalSolution,
    second: &'a RationalSolution,
}

/// Pole expansions of the two analytic trajectories.
pub fn poles_json(prov: &Provenance, out: &FlowOutput) -> Result<Option<String>> {
    match &out.poles {
        Some((first, second)) => Ok(Some(to_json(&PolesDoc {
            provenance: prov,
            first,
            second,
        })?)),
        None => Ok(None),
    }
}

#[derive(Serialize)]
struct SweepDoc<'a> {
    package: &'static str,
    version: &'static str,
    prng: &'static str,
    config: &'a SweepConfig,
    rows: &'a [SweepRow],
}

pub fn sweep_json(config: &SweepConfig, rows: &[SweepRow]) -> Result<String> {
    to_json(&SweepDoc {
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        prng: PRNG_ID,
        config,
        rows,
    })
}

#[derive(Serialize)]
struct SpectrumDoc<'a> {
    package: &'static str,
    version: &'static str,
    chain: &'a ChainParams,
    convention: FrequencyConvention,
    mean_frequency: f64,
    spectrum: &'a SystemSpectrum,
}

pub fn spectrum_json(chain: &ChainParams, spectrum: &SystemSpectrum) -> Result<String> {
    to_json(&SpectrumDoc {
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        chain,
        convention: spectrum.convention,
        mean_frequency: spectrum.mean_frequency(),
        spectrum,
    })
}

#[derive(Serialize)]
struct BathDoc<'a> {
    package: &'static str,
    version: &'static str,
    prng: &'static str,
    params: &'a BathParams,
    windowed_weight: f64,
    coupling_weight: f64,
    modes: &'a BathModes,
}

pub fn bath_json(params: &BathParams, modes: &BathModes) -> Result<String> {
    to_json(&BathDoc {
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        prng: PRNG_ID,
        params,
        windowed_weight: params.windowed_weight(),
        coupling_weight: modes.coupling_weight(),
        modes,
    })
}

#[derive(Serialize)]
struct CompareDoc<'a> {
    provenance: &'a Provenance,
    engines: [Engine; 2],
    max_abs_distance_diff: f64,
    max_abs_flow_diff: f64,
}

pub fn compare_json(cmp: &CompareOutput) -> Result<String> {
    let prov = Provenance::from_run(&cmp.first.resolved);
    to_json(&CompareDoc {
        provenance: &prov,
        engines: [
            cmp.first.resolved.config.engine,
            cmp.second.resolved.config.engine,
        ],
        max_abs_distance_diff: cmp.max_abs_distance_diff,
        max_abs_flow_diff: cmp.max_abs_flow_diff,
    })
}

fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    Ok(text)
}

/// Writes `text` at `path`, creating parent directories as needed.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}
