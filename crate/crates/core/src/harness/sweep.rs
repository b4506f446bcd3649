//! One-parameter sweeps over twin experiments.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{config, Error, Result};

use super::config::ExperimentConfig;
use super::series::{write_series, ErrorSeries};
use super::twin::{run_shared, run_twin_experiment};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Mu,
    H,
    NoiseLevel,
    Ra,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Mu => "mu",
            SweepAxis::H => "h",
            SweepAxis::NoiseLevel => "noise_level",
            SweepAxis::Ra => "Ra",
        }
    }

    /// Whether members along this axis can share one reference trajectory.
    pub fn shares_reference(self) -> bool {
        self != SweepAxis::Ra
    }

    pub fn apply(self, cfg: &ExperimentConfig, value: f64) -> ExperimentConfig {
        let mut c = cfg.clone();
        match self {
            SweepAxis::Mu => c.mu = value,
            SweepAxis::H => c.h = value,
            SweepAxis::NoiseLevel => c.noise_level = value,
            SweepAxis::Ra => c.ra = value,
        }
        c
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<SweepAxis> {
        match s.trim() {
            "mu" => Ok(SweepAxis::Mu),
            "h" => Ok(SweepAxis::H),
            "noise_level" | "noise" => Ok(SweepAxis::NoiseLevel),
            "Ra" | "ra" => Ok(SweepAxis::Ra),
            other => Err(Error::Config(format!("unknown sweep axis {other:?} (expected mu, h, noise_level or Ra)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub fitted_rate: Option<f64>,
    pub final_error: Option<f64>,
    pub conditions_met: bool,
    pub series: ErrorSeries,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.series.failed()
    }
}

/// Parses a comma-separated value list.
pub fn parse_values(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad sweep value {v:?}"))))
        .collect()
}

/// CSV path of one sweep member: `<stem>_<axis>_<value>.<ext>` next to the base output.
pub fn member_output(base: &Path, axis: SweepAxis, value: f64) -> PathBuf {
    let stem = base.file_stem().map_or("sweep".into(), |s| s.to_string_lossy().into_owned());
    let ext = base.extension().map_or("csv".into(), |s| s.to_string_lossy().into_owned());
    base.with_file_name(format!("{stem}_{}_{value:?}.{ext}", axis.name()))
}

/// One twin experiment per value; per-run failures are recorded in the rows.
pub fn sweep(cfg: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return config("sweep needs at least one value");
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return config(format!("sweep value {v} is not finite"));
    }
    if values.windows(2).any(|w| w[1] < w[0]) {
        return config("sweep values must be sorted ascending");
    }
    let cfgs: Vec<ExperimentConfig> = values
        .iter()
        .map(|&v| {
            let mut c = axis.apply(cfg, v);
            c.output = cfg.output.as_deref().map(|p| member_output(p, axis, v));
            c
        })
        .collect();
    let series: Vec<ErrorSeries> = if axis.shares_reference() {
        run_shared(&cfgs)?
    } else {
        cfgs.par_iter()
            .map(|c| {
                let mut quiet = c.clone();
                quiet.output = None;
                run_twin_experiment(&quiet).unwrap_or_else(|e| ErrorSeries {
                    rows: Vec::new(),
                    meta: super::series::RunMetadata {
                        config_hash: c.hash(),
                        failure: Some(e.to_string()),
                        ..Default::default()
                    },
                })
            })
            .collect()
    };
    for (c, s) in cfgs.iter().zip(&series) {
        if let Some(p) = &c.output {
            write_series(s, p)?;
        }
    }
    Ok(values
        .iter()
        .zip(series)
        .map(|(&value, series)| SweepRow {
            value,
            fitted_rate: series.meta.fitted_rate,
            final_error: series.final_error(),
            conditions_met: series.meta.mu_condition && series.meta.h_condition,
            series,
        })
        .collect())
}

pub const SWEEP_HEADER: &str = "value,fitted_rate,final_error,conditions_met,status";

pub fn sweep_table(axis: SweepAxis, rows: &[SweepRow]) -> String {
    let mut s = format!("# axis = {}\n{SWEEP_HEADER}\n", axis.name());
    let opt = |v: Option<f64>| v.map_or("nan".to_string(), |x| format!("{x:.16e}"));
    for r in rows {
        let status = r.series.meta.failure.as_deref().map_or("ok".to_string(), |f| format!("failed: {}", f.replace(',', ";")));
        let _ = writeln!(s, "{:?},{},{},{},{}", r.value, opt(r.fitted_rate), opt(r.final_error), r.conditions_met, status);
    }
    s
}
