//! Error time series, CSV output and exponential rate fits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "t,xi_l2,xi_h1,w_l2,theta_max,eta_max";

/// Minimum samples accepted by [`fit_exponential_rate`].
pub const MIN_FIT_SAMPLES: usize = 10;

/// Relative size below which the automatic window treats the error as exhausted.
pub const AUTO_WINDOW_FLOOR: f64 = 1e-14;

/// Allowed growth between consecutive samples of a "monotone" window.
pub const MONOTONE_JITTER: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub t: f64,
    pub xi_l2: f64,
    pub xi_h1: f64,
    pub w_l2: f64,
    pub theta_max: f64,
    pub eta_max: f64,
}

impl ErrorRow {
    pub fn is_finite(&self) -> bool {
        [self.t, self.xi_l2, self.xi_h1, self.w_l2, self.theta_max, self.eta_max].iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMetadata {
    pub config_hash: String,
    pub c0_estimate: f64,
    pub mu_condition: bool,
    pub mu_margin: f64,
    pub h_condition: bool,
    pub fitted_rate: Option<f64>,
    pub alpha_lower: f64,
    /// First time (on the reference clock, spin-up included) with `max|theta| <= 2`.
    pub t0_estimate: Option<f64>,
    pub spinup_time: f64,
    pub warnings: Vec<String>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorSeries {
    pub rows: Vec<ErrorRow>,
    pub meta: RunMetadata,
}

impl ErrorSeries {
    pub fn failed(&self) -> bool {
        self.meta.failure.is_some()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn xi_l2(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.xi_l2).collect()
    }

    pub fn final_error(&self) -> Option<f64> {
        self.rows.last().map(|r| r.xi_l2)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(96 * (self.rows.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.t, r.xi_l2, r.xi_h1, r.w_l2, r.theta_max, r.eta_max
            );
        }
        s
    }

    pub fn meta_text(&self) -> String {
        let m = &self.meta;
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:?}"));
        let mut s = String::new();
        let _ = writeln!(s, "config_hash: {}", m.config_hash);
        let _ = writeln!(s, "c0_estimate: {:?}", m.c0_estimate);
        let _ = writeln!(s, "mu_condition: {} (margin {:?})", m.mu_condition, m.mu_margin);
        let _ = writeln!(s, "h_condition: {}", m.h_condition);
        let _ = writeln!(s, "fitted_rate: {}", opt(m.fitted_rate));
        let _ = writeln!(s, "alpha_lower: {:?}", m.alpha_lower);
        let _ = writeln!(s, "t0_estimate: {}", opt(m.t0_estimate));
        let _ = writeln!(s, "spinup_time: {:?}", m.spinup_time);
        for w in &m.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        let _ = writeln!(s, "status: {}", m.failure.as_deref().map_or("ok".to_string(), |f| format!("failed: {f}")));
        s
    }
}

/// Path of the metadata sidecar for a CSV path.
pub fn meta_path(csv: &Path) -> PathBuf {
    let mut p = csv.as_os_str().to_owned();
    p.push(".meta");
    PathBuf::from(p)
}

/// Writes the CSV and its `.meta` sidecar.
pub fn write_series(series: &ErrorSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, series.to_csv())?;
    fs::write(meta_path(path), series.meta_text())?;
    Ok(())
}

/// Reads the rows of a CSV written by [`write_series`].
pub fn read_series_csv(path: impl AsRef<Path>) -> Result<Vec<ErrorRow>> {
    let text = fs::read_to_string(path.as_ref())?;
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Config(format!("{}: unexpected CSV header", path.as_ref().display())));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse::<f64>()).collect::<Result<_, _>>().map_err(|e| {
                Error::Config(format!("{}: row {}: {e}", path.as_ref().display(), i + 1))
            })?;
            if v.len() != 6 {
                return Err(Error::Config(format!("{}: row {} has {} fields", path.as_ref().display(), i + 1, v.len())));
            }
            Ok(ErrorRow { t: v[0], xi_l2: v[1], xi_h1: v[2], w_l2: v[3], theta_max: v[4], eta_max: v[5] })
        })
        .collect()
}

/// Sample selection for a rate fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    All,
    /// Samples with `start <= t <= end`.
    Time { start: f64, end: f64 },
    /// The last fraction of the samples by time.
    FinalFraction(f64),
    /// Leading samples until the value first falls below [`AUTO_WINDOW_FLOOR`] times the series maximum.
    Auto,
}

/// Indices of the samples selected by `window`.
pub fn window_indices(t: &[f64], e: &[f64], window: Window) -> std::ops::Range<usize> {
    let n = t.len().min(e.len());
    match window {
        Window::All => 0..n,
        Window::Time { start, end } => {
            let a = t[..n].iter().position(|&x| x >= start).unwrap_or(n);
            let b = t[..n].iter().rposition(|&x| x <= end).map_or(a, |i| i + 1).max(a);
            a..b
        }
        Window::FinalFraction(f) => {
            let f = f.clamp(0.0, 1.0);
            if n == 0 {
                return 0..0;
            }
            let cut = t[n - 1] - f * (t[n - 1] - t[0]);
            t[..n].iter().position(|&x| x >= cut).unwrap_or(n)..n
        }
        Window::Auto => {
            let max = e[..n].iter().cloned().fold(0.0, f64::max);
            let end = e[..n].iter().position(|&x| !(x > AUTO_WINDOW_FLOOR * max)).unwrap_or(n);
            0..end
        }
    }
}

/// Decay rate `-d ln e / dt` from a least-squares line through `(t, ln e)`.
pub fn fit_exponential_rate(t: &[f64], e: &[f64], window: Window) -> Result<f64> {
    if t.len() != e.len() {
        return Err(Error::Fit(format!("{} times but {} values", t.len(), e.len())));
    }
    let r = window_indices(t, e, window);
    let (ts, es) = (&t[r.clone()], &e[r]);
    if ts.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!("{} samples in window, need {MIN_FIT_SAMPLES}", ts.len())));
    }
    if let Some(bad) = es.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Fit(format!("non-positive or non-finite value {bad} in window")));
    }
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ys: Vec<f64> = es.iter().map(|x| x.ln()).collect();
    let ym = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in ts.iter().zip(&ys) {
        sxy += (x - tm) * (y - ym);
        sxx += (x - tm) * (x - tm);
    }
    if sxx == 0.0 {
        return Err(Error::Fit("window spans no time".into()));
    }
    Ok(-sxy / sxx)
}

/// Whether no sample exceeds its predecessor by more than `jitter` (relative).
pub fn is_monotone_decreasing(e: &[f64], jitter: f64) -> bool {
    e.windows(2).all(|w| w[1] <= w[0] * (1.0 + jitter))
}

/// Auto-window rate of the `xi_l2` column, reported only when that window decreases monotonically.
pub fn monotone_rate(series: &ErrorSeries) -> Option<f64> {
    let (t, e) = (series.times(), series.xi_l2());
    let r = window_indices(&t, &e, Window::Auto);
    if !is_monotone_decreasing(&e[r], MONOTONE_JITTER) {
        return None;
    }
    fit_exponential_rate(&t, &e, Window::Auto).ok()
}
