//! Deterministic output helpers: 9-significant-digit number formatting,
//! CSV emission, and the JSON run-metadata sidecar.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Formats with at most nine significant digits, trimming trailing zeros
/// (the `%.9g` convention).
pub fn fmt_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let out = if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_zeros(&s)
    } else {
        let s = format!("{x:.8e}");
        // "1.23400000e-12" -> "1.234e-12"
        match s.split_once('e') {
            Some((mantissa, e)) => format!("{}e{e}", trim_zeros(mantissa)),
            None => s,
        }
    };
    if out == "-0" {
        "0".to_string()
    } else {
        out
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    trimmed.to_string()
}

/// A CSV file under construction; rows are written as-is, so callers are
/// responsible for ordering them deterministically.
pub struct CsvOut {
    path: PathBuf,
    buffer: String,
}

impl CsvOut {
    pub fn new(dir: &Path, name: &str, header: &str) -> Self {
        CsvOut {
            path: dir.join(name),
            buffer: format!("{header}\n"),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buffer.push_str(&fields.join(","));
        self.buffer.push('\n');
    }

    pub fn finish(self) -> std::io::Result<PathBuf> {
        let mut f = std::fs::File::create(&self.path)?;
        f.write_all(self.buffer.as_bytes())?;
        Ok(self.path)
    }
}

/// Run metadata written next to every command's outputs. Field order is
/// fixed and maps are sorted, so reruns are byte-identical.
#[derive(serde::Serialize)]
pub struct RunMeta {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    pub git: String,
    pub outputs: Vec<String>,
}

impl RunMeta {
    pub fn new(command: &str, seed: u64) -> Self {
        RunMeta {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            seed,
            git: git_describe(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }

    pub fn wrote(&mut self, path: &Path) {
        self.outputs.push(
            path.file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned(),
        );
    }

    pub fn write(mut self, dir: &Path) -> std::io::Result<()> {
        self.outputs.sort();
        let path = dir.join(format!("{}.meta.json", self.command));
        let body = serde_json::to_string_pretty(&self).expect("meta serializes");
        std::fs::write(path, body)
    }
}

fn git_describe() -> String {
    let try_git = |args: &[&str]| -> Option<String> {
        let out = std::process::Command::new("git").args(args).output().ok()?;
        if !out.status.success() {
            return None;
        }
        let s = String::from_utf8_lossy(&out.stdout).trim().to_string();
        if s.is_empty() {
            None
        } else {
            Some(s)
        }
    };
    try_git(&["describe", "--always", "--dirty"])
        .or_else(|| try_git(&["rev-parse", "--short", "HEAD"]))
        .unwrap_or_else(|| "unknown".to_string())
}
