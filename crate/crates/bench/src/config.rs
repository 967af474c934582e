use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use doa_map::array::default_doas;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MethodKind {
    #[serde(rename = "pca-map")]
    PcaMap,
    #[serde(rename = "music-map")]
    MusicMap,
    #[serde(rename = "dtft-map")]
    DtftMap,
    #[serde(rename = "music-aic")]
    MusicAic,
    #[serde(rename = "music-known-k")]
    MusicKnownK,
    #[serde(rename = "dtft-known-k")]
    DtftKnownK,
}

impl MethodKind {
    pub const ALL: [MethodKind; 6] = [
        MethodKind::PcaMap,
        MethodKind::MusicMap,
        MethodKind::DtftMap,
        MethodKind::MusicAic,
        MethodKind::MusicKnownK,
        MethodKind::DtftKnownK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::PcaMap => "pca-map",
            MethodKind::MusicMap => "music-map",
            MethodKind::DtftMap => "dtft-map",
            MethodKind::MusicAic => "music-aic",
            MethodKind::MusicKnownK => "music-known-k",
            MethodKind::DtftKnownK => "dtft-known-k",
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MethodKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| ConfigError(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// A full experiment description. Every field has a key of the same name in
/// the TOML config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sensors: usize,
    pub sources: usize,
    pub bins: usize,
    pub samples: usize,
    /// Overlap ratios `ϑ` to sweep.
    pub overlap: Vec<f64>,
    /// Decay ratios `ψ` to sweep.
    pub decay: Vec<f64>,
    /// Explicit arrival angles; wins over `doa_spacing_deg`.
    pub doa_deg: Option<Vec<f64>>,
    /// Angles `10° + k·spacing`; defaults to `⌊170°/K⌋`.
    pub doa_spacing_deg: Option<f64>,
    pub snr_grid_db: Vec<f64>,
    pub k_max: usize,
    pub grid_step_deg: f64,
    pub n_runs: usize,
    pub master_seed: u64,
    pub methods: Vec<MethodKind>,
    pub output_path: PathBuf,
    /// Record wall-clock time per run; off keeps output byte-reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl ExperimentConfig {
    /// Scaled-down defaults that finish in minutes on one host.
    pub fn desk() -> Self {
        Self {
            sensors: 32,
            sources: 3,
            bins: 512,
            samples: 512,
            overlap: vec![0.0],
            decay: vec![0.0],
            doa_deg: None,
            doa_spacing_deg: None,
            snr_grid_db: (-6..=6).map(|i| 5.0 * i as f64).collect(),
            k_max: 8,
            grid_step_deg: 0.5,
            n_runs: 100,
            master_seed: 1,
            methods: MethodKind::ALL.to_vec(),
            output_path: PathBuf::from("results.csv"),
            timing: false,
        }
    }

    /// Full-size setting: 100 sensors, 5 sources, 4096 bins, 1000 runs.
    pub fn paper_scale() -> Self {
        Self {
            sensors: 100,
            sources: 5,
            bins: 4096,
            samples: 4096,
            k_max: 10,
            grid_step_deg: 0.1,
            n_runs: 1000,
            ..Self::desk()
        }
    }

    /// Builds a config from the layered sources: base scale, then the file.
    pub fn load(path: Option<&Path>, paper_scale: bool) -> Result<Self, ConfigError> {
        let base = if paper_scale { Self::paper_scale() } else { Self::desk() };
        let cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?;
                base.with_overrides(&text)?
            }
            None => base,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies the keys present in a TOML document on top of `self`.
    pub fn with_overrides(self, toml_text: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(toml_text).map_err(|e| ConfigError(format!("config: {e}")))?;
        Ok(file.apply(self))
    }

    pub fn doas(&self) -> Vec<f64> {
        match (&self.doa_deg, self.doa_spacing_deg) {
            (Some(list), _) => list.clone(),
            (None, Some(step)) => (0..self.sources).map(|k| 10.0 + k as f64 * step).collect(),
            (None, None) => default_doas(self.sources),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError(msg));
        if self.k_max >= self.sensors {
            return bad(format!("k_max = {} must be below sensors = {}", self.k_max, self.sensors));
        }
        if self.n_runs == 0 {
            return bad("n_runs must be at least 1".into());
        }
        if self.bins < 2 || self.bins > self.samples {
            return bad(format!("need 2 <= bins <= samples, got {} and {}", self.bins, self.samples));
        }
        if self.sources >= self.sensors {
            return bad(format!("{} sources need more than {} sensors", self.sources, self.sensors));
        }
        let doas = self.doas();
        if doas.len() != self.sources {
            return bad(format!("{} DOAs given for {} sources", doas.len(), self.sources));
        }
        if let Some(a) = doas.iter().find(|a| !(0.0..180.0).contains(*a)) {
            return bad(format!("DOA {a} outside [0, 180)"));
        }
        if !(self.grid_step_deg > 0.0 && self.grid_step_deg <= 180.0) {
            return bad(format!("grid_step_deg {} outside (0, 180]", self.grid_step_deg));
        }
        for (name, list) in [("overlap", &self.overlap), ("decay", &self.decay)] {
            if list.is_empty() {
                return bad(format!("{name} list is empty"));
            }
            if let Some(v) = list.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return bad(format!("{name} value {v} outside [0, 1]"));
            }
        }
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return bad("snr_grid_db must be a non-empty list of finite values".into());
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        let needs_truth = self
            .methods
            .iter()
            .any(|m| !matches!(m, MethodKind::PcaMap));
        if needs_truth && self.sources == 0 {
            return bad("DOA metrics need at least one true source".into());
        }
        Ok(())
    }

    /// Number of (snr, overlap, decay) grid points.
    pub fn grid_len(&self) -> usize {
        self.snr_grid_db.len() * self.overlap.len() * self.decay.len()
    }

    /// Grid point `g` as `(snr_db, overlap, decay)`; SNR varies fastest.
    pub fn grid_point(&self, g: usize) -> (f64, f64, f64) {
        let ns = self.snr_grid_db.len();
        let no = self.overlap.len();
        (
            self.snr_grid_db[g % ns],
            self.overlap[(g / ns) % no],
            self.decay[g / (ns * no)],
        )
    }
}

/// Partial config as read from disk; absent keys keep the base value.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    sensors: Option<usize>,
    sources: Option<usize>,
    bins: Option<usize>,
    samples: Option<usize>,
    overlap: Option<OneOrMany>,
    decay: Option<OneOrMany>,
    doa_deg: Option<Vec<f64>>,
    doa_spacing_deg: Option<f64>,
    snr_grid_db: Option<OneOrMany>,
    k_max: Option<usize>,
    grid_step_deg: Option<f64>,
    n_runs: Option<usize>,
    master_seed: Option<u64>,
    methods: Option<Vec<MethodKind>>,
    output_path: Option<PathBuf>,
    timing: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl From<OneOrMany> for Vec<f64> {
    fn from(v: OneOrMany) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

impl ConfigFile {
    fn apply(self, mut c: ExperimentConfig) -> ExperimentConfig {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { c.$field = v.into(); })*
            };
        }
        set!(
            sensors, sources, bins, samples, overlap, decay, snr_grid_db, k_max, grid_step_deg,
            n_runs, master_seed, methods, output_path, timing
        );
        if self.doa_deg.is_some() {
            c.doa_deg = self.doa_deg;
        }
        if self.doa_spacing_deg.is_some() {
            c.doa_spacing_deg = self.doa_spacing_deg;
        }
        c
    }
}
