//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::interpolant::InterpolantKind;

/// Reference initial temperature.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    /// `0.5 sin(pi z) (cos(2 pi x / Lx) + 0.3 cos(4 pi x / Lx))`.
    Default,
    /// `sin(pi z) cos(2 pi x / Lx)`, scaled so the nodal maximum equals `theta0_amplitude`.
    Roll,
    Snapshot(PathBuf),
}

/// Initial data of the assimilated system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssimInit {
    /// `(v, eta) = (0, 0)`.
    Zero,
    /// Copy of the reference state at the start of assimilation.
    Reference,
}

/// Initial velocity of the reference when `gamma > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityInit {
    Darcy,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub ra: f64,
    pub gamma: f64,
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub slice2d: bool,
    pub dt: f64,
    pub t_final: f64,
    pub t_spinup: f64,
    pub cfl_limit: f64,
    pub mu: f64,
    pub h: f64,
    pub interpolant: InterpolantKind,
    pub noise_level: f64,
    pub noise_seed: u64,
    pub c_universal: f64,
    pub c0_trials: usize,
    pub c0_seed: u64,
    pub strict: bool,
    pub theta0: InitialProfile,
    pub theta0_amplitude: f64,
    pub u0: VelocityInit,
    pub assim_init: AssimInit,
    pub record_every: usize,
    pub output: Option<PathBuf>,
}

const REQUIRED: [&str; 7] = ["Ra", "Nx", "Nz", "dt", "T_final", "mu", "h"];

const KNOWN: [&str; 27] = [
    "Ra", "gamma", "Lx", "Ly", "Nx", "Ny", "Nz", "slice2d", "dt", "T_final", "T_spinup", "cfl_limit", "mu", "h",
    "interpolant", "noise_level", "noise_seed", "c_universal", "c0_trials", "c0_seed", "strict", "theta0",
    "theta0_amplitude", "u0", "assim_init", "record_every", "output",
];

impl ExperimentConfig {
    /// Config with every optional key at its default.
    pub fn new(ra: f64, nx: usize, nz: usize, dt: f64, t_final: f64, mu: f64, h: f64) -> ExperimentConfig {
        ExperimentConfig {
            ra,
            gamma: 0.0,
            lx: 4.0,
            ly: 1.0,
            nx,
            ny: 1,
            nz,
            slice2d: false,
            dt,
            t_final,
            t_spinup: 2.0,
            cfl_limit: crate::dynamics::CFL_LIMIT,
            mu,
            h,
            interpolant: InterpolantKind::FourierLowpass,
            noise_level: 0.0,
            noise_seed: 0,
            c_universal: 1.0,
            c0_trials: 200,
            c0_seed: 0,
            strict: false,
            theta0: InitialProfile::Default,
            theta0_amplitude: 1.0,
            u0: VelocityInit::Darcy,
            assim_init: AssimInit::Zero,
            record_every: 1,
            output: None,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.lx, self.ly, self.nx, if self.slice2d { 1 } else { self.ny }, self.nz)
    }

    /// Number of twin-experiment steps (`T_final / dt`, rounded to the nearest integer).
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Range checks; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, message: String| Err(Error::Parse { path: "<config>".into(), line: 0, key: key.into(), message });
        let positive: [(&str, f64); 6] = [
            ("Ra", self.ra),
            ("Lx", self.lx),
            ("Ly", self.ly),
            ("dt", self.dt),
            ("h", self.h),
            ("c_universal", self.c_universal),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return fail(k, format!("must be positive and finite, got {v}"));
            }
        }
        let non_negative: [(&str, f64); 6] = [
            ("gamma", self.gamma),
            ("T_final", self.t_final),
            ("T_spinup", self.t_spinup),
            ("mu", self.mu),
            ("noise_level", self.noise_level),
            ("theta0_amplitude", self.theta0_amplitude),
        ];
        for (k, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return fail(k, format!("must be non-negative and finite, got {v}"));
            }
        }
        if !(self.cfl_limit > 0.0 && self.cfl_limit.is_finite()) {
            return fail("cfl_limit", format!("must be positive, got {}", self.cfl_limit));
        }
        if self.record_every == 0 {
            return fail("record_every", "must be at least 1".into());
        }
        if self.c0_trials < crate::interpolant::MIN_TRIALS {
            return fail("c0_trials", format!("must be at least {}", crate::interpolant::MIN_TRIALS));
        }
        if self.slice2d && self.ny != 1 {
            return fail("Ny", format!("slice2d requires Ny = 1, got {}", self.ny));
        }
        if self.t_final > 0.0 && self.steps() == 0 {
            return fail("T_final", "shorter than one time step".into());
        }
        self.grid().map_err(|e| Error::Parse { path: "<config>".into(), line: 0, key: "Nx/Ny/Nz".into(), message: e.to_string() })?;
        Ok(())
    }

    /// Canonical text: every key in a fixed order, floats in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("Ra", fmt_f64(self.ra));
        put("gamma", fmt_f64(self.gamma));
        put("Lx", fmt_f64(self.lx));
        put("Ly", fmt_f64(self.ly));
        put("Nx", self.nx.to_string());
        put("Ny", self.ny.to_string());
        put("Nz", self.nz.to_string());
        put("slice2d", self.slice2d.to_string());
        put("dt", fmt_f64(self.dt));
        put("T_final", fmt_f64(self.t_final));
        put("T_spinup", fmt_f64(self.t_spinup));
        put("cfl_limit", fmt_f64(self.cfl_limit));
        put("mu", fmt_f64(self.mu));
        put("h", fmt_f64(self.h));
        put("interpolant", self.interpolant.name().to_string());
        put("noise_level", fmt_f64(self.noise_level));
        put("noise_seed", self.noise_seed.to_string());
        put("c_universal", fmt_f64(self.c_universal));
        put("c0_trials", self.c0_trials.to_string());
        put("c0_seed", self.c0_seed.to_string());
        put("strict", self.strict.to_string());
        put(
            "theta0",
            match &self.theta0 {
                InitialProfile::Default => "default".into(),
                InitialProfile::Roll => "roll".into(),
                InitialProfile::Snapshot(p) => format!("snapshot:{}", p.display()),
            },
        );
        put("theta0_amplitude", fmt_f64(self.theta0_amplitude));
        put("u0", match self.u0 { VelocityInit::Darcy => "darcy", VelocityInit::Zero => "zero" }.into());
        put("assim_init", match self.assim_init { AssimInit::Zero => "zero", AssimInit::Reference => "reference" }.into());
        put("record_every", self.record_every.to_string());
        if let Some(p) = &self.output {
            put("output", p.display().to_string());
        }
        s
    }

    /// SHA-256 of [`ExperimentConfig::to_text`], hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

struct Entry {
    line: usize,
    value: String,
}

/// Parses config text; `label` names the source in errors.
pub fn parse_config(text: &str, label: &str) -> Result<ExperimentConfig> {
    let err = |line: usize, key: &str, message: String| Error::Parse { path: label.into(), line, key: key.into(), message };
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| err(line, content, "expected `key = value`".into()))?;
        let (k, v) = (k.trim(), v.trim());
        if !KNOWN.contains(&k) {
            return Err(err(line, k, "unknown key".into()));
        }
        if v.is_empty() {
            return Err(err(line, k, "missing value".into()));
        }
        if let Some(prev) = entries.get(k) {
            return Err(err(line, k, format!("duplicate key (first set on line {})", prev.line)));
        }
        entries.insert(k.to_string(), Entry { line, value: v.to_string() });
    }
    for k in REQUIRED {
        if !entries.contains_key(k) {
            return Err(err(0, k, "missing required key".into()));
        }
    }

    let get = |k: &str| entries.get(k);
    let f64_of = |k: &str| -> Result<Option<f64>> {
        get(k)
            .map(|e| e.value.parse::<f64>().map_err(|_| err(e.line, k, format!("not a number: {:?}", e.value))))
            .transpose()
    };
    let usize_of = |k: &str| -> Result<Option<usize>> {
        get(k)
            .map(|e| e.value.parse::<usize>().map_err(|_| err(e.line, k, format!("not a non-negative integer: {:?}", e.value))))
            .transpose()
    };
    let u64_of = |k: &str| -> Result<Option<u64>> {
        get(k)
            .map(|e| e.value.parse::<u64>().map_err(|_| err(e.line, k, format!("not a non-negative integer: {:?}", e.value))))
            .transpose()
    };
    let bool_of = |k: &str| -> Result<Option<bool>> {
        get(k)
            .map(|e| match e.value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(err(e.line, k, format!("not a boolean: {:?}", e.value))),
            })
            .transpose()
    };

    let req_f = |k: &str| -> Result<f64> { Ok(f64_of(k)?.expect("required key present")) };
    let req_u = |k: &str| -> Result<usize> { Ok(usize_of(k)?.expect("required key present")) };
    let mut cfg = ExperimentConfig::new(
        req_f("Ra")?,
        req_u("Nx")?,
        req_u("Nz")?,
        req_f("dt")?,
        req_f("T_final")?,
        req_f("mu")?,
        req_f("h")?,
    );
    macro_rules! opt {
        ($field:ident, $getter:ident, $key:expr) => {
            if let Some(v) = $getter($key)? {
                cfg.$field = v;
            }
        };
    }
    opt!(gamma, f64_of, "gamma");
    opt!(lx, f64_of, "Lx");
    opt!(ly, f64_of, "Ly");
    opt!(ny, usize_of, "Ny");
    opt!(slice2d, bool_of, "slice2d");
    opt!(t_spinup, f64_of, "T_spinup");
    opt!(cfl_limit, f64_of, "cfl_limit");
    opt!(noise_level, f64_of, "noise_level");
    opt!(noise_seed, u64_of, "noise_seed");
    opt!(c_universal, f64_of, "c_universal");
    opt!(c0_trials, usize_of, "c0_trials");
    opt!(c0_seed, u64_of, "c0_seed");
    opt!(strict, bool_of, "strict");
    opt!(theta0_amplitude, f64_of, "theta0_amplitude");
    opt!(record_every, usize_of, "record_every");
    if let Some(e) = get("interpolant") {
        cfg.interpolant = e.value.parse().map_err(|_| err(e.line, "interpolant", format!("unknown kind {:?}", e.value)))?;
    }
    if let Some(e) = get("theta0") {
        cfg.theta0 = match e.value.as_str() {
            "default" => InitialProfile::Default,
            "roll" => InitialProfile::Roll,
            v => match v.strip_prefix("snapshot:") {
                Some(p) if !p.trim().is_empty() => InitialProfile::Snapshot(PathBuf::from(p.trim())),
                _ => return Err(err(e.line, "theta0", format!("expected default, roll or snapshot:<path>, got {v:?}"))),
            },
        };
    }
    if let Some(e) = get("u0") {
        cfg.u0 = match e.value.as_str() {
            "darcy" => VelocityInit::Darcy,
            "zero" => VelocityInit::Zero,
            v => return Err(err(e.line, "u0", format!("expected darcy or zero, got {v:?}"))),
        };
    }
    if let Some(e) = get("assim_init") {
        cfg.assim_init = match e.value.as_str() {
            "zero" => AssimInit::Zero,
            "reference" => AssimInit::Reference,
            v => return Err(err(e.line, "assim_init", format!("expected zero or reference, got {v:?}"))),
        };
    }
    if let Some(e) = get("output") {
        cfg.output = Some(PathBuf::from(&e.value));
    }

    // Re-attribute range failures to the line that set the key.
    cfg.validate().map_err(|e| match e {
        Error::Parse { key, message, .. } => {
            let line = key.split('/').find_map(|k| get(k)).map_or(0, |e| e.line);
            err(line, &key, message)
        }
        other => other,
    })?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, &path.display().to_string())
}

pub fn write_config(cfg: &ExperimentConfig, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, cfg.to_text())?;
    Ok(())
}
