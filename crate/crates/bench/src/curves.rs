use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::config::MethodKind;
use crate::sweep::{nan_mean, RunRecord};

/// A per-run column that can be averaged into a curve over SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    KHat,
    ErrDoa,
    RmseA0,
    RmseAShrunk,
    /// Root mean square of the per-run deviations.
    RmseSigma,
    TauMean,
    WallMs,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::KHat,
        Quantity::ErrDoa,
        Quantity::RmseA0,
        Quantity::RmseAShrunk,
        Quantity::RmseSigma,
        Quantity::TauMean,
        Quantity::WallMs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::KHat => "k_hat",
            Quantity::ErrDoa => "err_doa",
            Quantity::RmseA0 => "rmse_a0",
            Quantity::RmseAShrunk => "rmse_a_shrunk",
            Quantity::RmseSigma => "rmse_sigma",
            Quantity::TauMean => "tau_mean",
            Quantity::WallMs => "wall_ms",
        }
    }

    fn value(self, r: &RunRecord) -> f64 {
        match self {
            Quantity::KHat => r.k_hat as f64,
            Quantity::ErrDoa => r.err_doa,
            Quantity::RmseA0 => r.rmse_a0,
            Quantity::RmseAShrunk => r.rmse_a_shrunk,
            Quantity::RmseSigma => r.rmse_sigma,
            Quantity::TauMean => r.tau_mean,
            Quantity::WallMs => r.wall_ms,
        }
    }

    fn aggregate(self, values: impl Iterator<Item = f64>) -> f64 {
        match self {
            Quantity::RmseSigma => nan_mean(values.map(|v| v * v)).sqrt(),
            _ => nan_mean(values),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Quantity::ALL.into_iter().find(|q| q.name() == s).ok_or_else(|| {
            let names: Vec<_> = Quantity::ALL.iter().map(|q| q.name()).collect();
            format!("unknown quantity '{s}', expected one of {}", names.join(", "))
        })
    }
}

/// Mean of one quantity against SNR for a fixed method, overlap and decay.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub method: MethodKind,
    pub overlap: f64,
    pub decay: f64,
    pub quantity: Quantity,
    /// `(snr_db, aggregate)` in ascending SNR.
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "snr_db,{}", self.quantity)?;
        for (snr, v) in &self.points {
            writeln!(out, "{snr},{v}")?;
        }
        Ok(())
    }

    /// `<stem>_<quantity>_<method>_ov<overlap>[_dc<decay>].csv`.
    pub fn file_name(&self, stem: &str, with_decay: bool) -> String {
        let mut name = format!("{stem}_{}_{}_ov{}", self.quantity, self.method, self.overlap);
        if with_decay {
            name.push_str(&format!("_dc{}", self.decay));
        }
        name.push_str(".csv");
        name
    }
}

/// One curve per (method, overlap, decay) found in `records`.
pub fn emit_curves(records: &[RunRecord], quantity: Quantity) -> Result<Vec<Curve>, String> {
    if records.is_empty() {
        return Err("result table is empty".into());
    }
    let mut keys: Vec<(MethodKind, f64, f64)> = Vec::new();
    for r in records {
        let key = (r.method, r.overlap, r.decay);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    Ok(keys
        .into_iter()
        .map(|(method, overlap, decay)| {
            let rows: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.method == method && r.overlap == overlap && r.decay == decay)
                .collect();
            let mut snrs: Vec<f64> = Vec::new();
            for r in &rows {
                if !snrs.contains(&r.snr_db) {
                    snrs.push(r.snr_db);
                }
            }
            snrs.sort_by(f64::total_cmp);
            let points = snrs
                .into_iter()
                .map(|snr| {
                    let vals = rows.iter().filter(|r| r.snr_db == snr).map(|r| quantity.value(r));
                    (snr, quantity.aggregate(vals))
                })
                .collect();
            Curve {
                method,
                overlap,
                decay,
                quantity,
                points,
            }
        })
        .collect())
}

/// Writes each curve next to `input`, returning the created paths.
pub fn write_curves(input: &Path, curves: &[Curve]) -> io::Result<Vec<PathBuf>> {
    let dir = input.parent().unwrap_or_else(|| Path::new("."));
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    let with_decay = curves.iter().any(|c| c.decay != curves[0].decay);
    curves
        .iter()
        .map(|c| {
            let path = dir.join(c.file_name(stem, with_decay));
            let mut out = io::BufWriter::new(std::fs::File::create(&path)?);
            c.write_csv(&mut out)?;
            out.flush()?;
            Ok(path)
        })
        .collect()
}
