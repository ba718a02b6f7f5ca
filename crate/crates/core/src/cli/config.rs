//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::montecarlo::{Execution, SimMode};
use crate::quantization::Resolution;
use crate::{Error, Result};

/// Every recognised key, in the order used for the resolved-config header.
pub const KEYS: &[&str] = &[
    "n_antennas",
    "n_users",
    "total_power",
    "snr_db",
    "contour_snr_db",
    "converters",
    "dac_bits",
    "adc_bits",
    "n_trials",
    "symbols_per_trial",
    "master_seed",
    "mode",
    "simulate",
    "workers",
    "raw_dump",
    "output",
];

/// Keys that never change a command's numeric output and are therefore left
/// out of the header line.
const PLUMBING_KEYS: &[&str] = &["workers", "raw_dump", "output"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_antennas: usize,
    pub n_users: usize,
    pub total_power: f64,
    pub snr_db: Vec<f64>,
    pub contour_snr_db: f64,
    pub converters: Vec<(Resolution, Resolution)>,
    pub dac_bits: Vec<Resolution>,
    pub adc_bits: Vec<Resolution>,
    pub n_trials: usize,
    pub symbols_per_trial: usize,
    pub master_seed: Option<u64>,
    pub mode: SimMode,
    pub simulate: bool,
    /// `0` means the default pool.
    pub workers: usize,
    pub raw_dump: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut grid: Vec<Resolution> = (1..=8).map(Resolution::Bits).collect();
        grid.push(Resolution::Ideal);
        Self {
            n_antennas: 128,
            n_users: 16,
            total_power: 1.0,
            snr_db: linspace(-10.0, 30.0, 64),
            contour_snr_db: -10.0,
            converters: parse_converters("inf/inf, inf/6, 3/inf, 3/6, 5/5").expect("default converters"),
            dac_bits: grid.clone(),
            adc_bits: grid,
            n_trials: 500,
            symbols_per_trial: 2000,
            master_seed: None,
            mode: SimMode::TrueQuantizer,
            simulate: false,
            workers: 0,
            raw_dump: None,
            output: None,
        }
    }
}

fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let step = (stop - start) / (count - 1) as f64;
    (0..count).map(|i| if i + 1 == count { stop } else { start + step * i as f64 }).collect()
}

fn parse_f64(v: &str) -> Result<f64> {
    let x: f64 = v.trim().parse().map_err(|_| Error::InvalidConfig(format!("expected a number, got {v:?}")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidConfig(format!("expected a finite number, got {v:?}")))
    }
}

fn parse_usize(v: &str) -> Result<usize> {
    v.trim().parse().map_err(|_| Error::InvalidConfig(format!("expected a non-negative integer, got {v:?}")))
}

fn parse_bool(v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(Error::InvalidConfig(format!("expected true or false, got {other:?}"))),
    }
}

fn parse_resolution(v: &str) -> Result<Resolution> {
    v.trim().parse().map_err(Error::InvalidConfig)
}

/// `a, b, c` or `start:stop:count` (inclusive, evenly spaced).
pub fn parse_snr_grid(v: &str) -> Result<Vec<f64>> {
    let v = v.trim();
    if v.contains(':') {
        let parts: Vec<&str> = v.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidConfig(format!("range must be start:stop:count, got {v:?}")));
        }
        let count = parse_usize(parts[2])?;
        if count == 0 {
            return Err(Error::InvalidConfig("range count must be positive".into()));
        }
        return Ok(linspace(parse_f64(parts[0])?, parse_f64(parts[1])?, count));
    }
    let grid = v.split(',').filter(|s| !s.trim().is_empty()).map(parse_f64).collect::<Result<Vec<_>>>()?;
    if grid.is_empty() {
        return Err(Error::InvalidConfig("SNR grid is empty".into()));
    }
    Ok(grid)
}

/// Comma-separated resolutions; `a..b` expands to every bit count in between.
pub fn parse_bits_grid(v: &str) -> Result<Vec<Resolution>> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let (lo, hi): (u32, u32) = (
                lo.trim().parse().map_err(|_| Error::InvalidConfig(format!("bad range start in {item:?}")))?,
                hi.trim().parse().map_err(|_| Error::InvalidConfig(format!("bad range end in {item:?}")))?,
            );
            if lo == 0 || lo > hi {
                return Err(Error::InvalidConfig(format!("bad bit range {item:?}")));
            }
            out.extend((lo..=hi).map(Resolution::Bits));
        } else {
            out.push(parse_resolution(item)?);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig("bit grid is empty".into()));
    }
    Ok(out)
}

/// `dac/adc` pairs separated by commas, e.g. `inf/inf, 3/6`.
pub fn parse_converters(v: &str) -> Result<Vec<(Resolution, Resolution)>> {
    let pairs = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (d, a) = item
                .split_once('/')
                .ok_or_else(|| Error::InvalidConfig(format!("converter pair must be dac/adc, got {item:?}")))?;
            Ok((parse_resolution(d)?, parse_resolution(a)?))
        })
        .collect::<Result<Vec<_>>>()?;
    if pairs.is_empty() {
        return Err(Error::InvalidConfig("converter list is empty".into()));
    }
    Ok(pairs)
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "n_antennas" => self.n_antennas = parse_usize(value)?,
            "n_users" => self.n_users = parse_usize(value)?,
            "total_power" => self.total_power = parse_f64(value)?,
            "snr_db" => self.snr_db = parse_snr_grid(value)?,
            "contour_snr_db" => self.contour_snr_db = parse_f64(value)?,
            "converters" => self.converters = parse_converters(value)?,
            "dac_bits" => self.dac_bits = parse_bits_grid(value)?,
            "adc_bits" => self.adc_bits = parse_bits_grid(value)?,
            "n_trials" => self.n_trials = parse_usize(value)?,
            "symbols_per_trial" => self.symbols_per_trial = parse_usize(value)?,
            "master_seed" => {
                self.master_seed = Some(
                    value.parse().map_err(|_| Error::InvalidConfig(format!("seed must be a u64, got {value:?}")))?,
                )
            }
            "mode" => self.mode = value.parse()?,
            "simulate" => self.simulate = parse_bool(value)?,
            "workers" => self.workers = parse_usize(value)?,
            "raw_dump" => self.raw_dump = (!value.is_empty()).then(|| PathBuf::from(value)),
            "output" => self.output = (!value.is_empty()).then(|| PathBuf::from(value)),
            other => return Err(Error::InvalidConfig(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a config file's text on top of `self`. Blank lines and lines
    /// starting with `#` are skipped; errors name the offending line.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {lineno}: expected key = value, got {line:?}")))?;
            let key = key.trim();
            self.set(key, value).map_err(|e| match e {
                Error::InvalidConfig(msg) => Error::InvalidConfig(format!("line {lineno}, field {key}: {msg}")),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)
            .map_err(|e| match e {
                Error::InvalidConfig(msg) => Error::InvalidConfig(format!("{}: {msg}", path.display())),
                other => other,
            })?;
        Ok(cfg)
    }

    /// Cross-field checks run after file and flag values are merged.
    pub fn check(&self, needs_seed: bool) -> Result<()> {
        if self.n_users == 0 || self.n_users >= self.n_antennas {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= n_users < n_antennas, got n_users={} n_antennas={}",
                self.n_users, self.n_antennas
            )));
        }
        if self.total_power <= 0.0 {
            return Err(Error::InvalidConfig("total_power must be positive".into()));
        }
        if self.n_trials == 0 {
            return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
        }
        if needs_seed && self.master_seed.is_none() {
            return Err(Error::InvalidConfig("master_seed is required".into()));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        self.n_users as f64 / self.n_antennas as f64
    }

    pub fn execution(&self) -> Execution {
        match self.workers {
            0 => Execution::default(),
            n => Execution::with_workers(n),
        }
    }

    /// Canonical textual value of `key`, as it would be written in a file.
    /// Numbers use the shortest form that parses back to the same value.
    pub fn value_of(&self, key: &str) -> Option<String> {
        Some(match key {
            "n_antennas" => self.n_antennas.to_string(),
            "n_users" => self.n_users.to_string(),
            "total_power" => self.total_power.to_string(),
            "snr_db" => join(&self.snr_db, |x| x.to_string()),
            "contour_snr_db" => self.contour_snr_db.to_string(),
            "converters" => join(&self.converters, |(d, a)| format!("{d}/{a}")),
            "dac_bits" => join(&self.dac_bits, |r| r.to_string()),
            "adc_bits" => join(&self.adc_bits, |r| r.to_string()),
            "n_trials" => self.n_trials.to_string(),
            "symbols_per_trial" => self.symbols_per_trial.to_string(),
            "master_seed" => self.master_seed.map_or_else(|| "none".into(), |s| s.to_string()),
            "mode" => self.mode.to_string(),
            "simulate" => self.simulate.to_string(),
            "workers" => self.workers.to_string(),
            "raw_dump" => self.raw_dump.as_ref().map_or_else(String::new, |p| p.display().to_string()),
            "output" => self.output.as_ref().map_or_else(String::new, |p| p.display().to_string()),
            _ => return None,
        })
    }

    /// `# qmimo <command> key=value ...` with every key that can affect the
    /// numbers in the file.
    pub fn header(&self, command: &str) -> String {
        let mut line = format!("# qmimo {command}");
        for key in KEYS.iter().filter(|k| !PLUMBING_KEYS.contains(k)) {
            let _ = write!(line, " {key}={}", self.value_of(key).unwrap_or_default());
        }
        line
    }
}
