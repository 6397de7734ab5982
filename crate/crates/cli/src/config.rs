//! Experiment configuration: a TOML file with one table per stage, plus
//! `section.key=value` overrides from the command line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bandgcn::features::N_FEATURES;
use bandgcn::gcn::GcnConfig;
use bandgcn::graphs::EdgeRule;
use bandgcn::preprocess::{BandDefinition, BandName, DEFAULT_WINDOW_S};
use bandgcn::signal_io::{random_intervals, SynthesisSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub edf_files: Vec<PathBuf>,
    /// Every `*.edf` directly inside is added to `edf_files`.
    pub data_dir: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    pub duration_s: f64,
    pub fs: f64,
    pub n_channels: usize,
    pub n_seizures: usize,
    pub seizure_min_s: f64,
    pub seizure_max_s: f64,
    pub min_gap_s: f64,
    /// Explicit `[start, end]` pairs; replaces the random draw when set.
    pub intervals: Option<Vec<[f64; 2]>>,
    pub burst_frequencies_hz: Vec<f64>,
    pub burst_amplitude_ratio: f64,
    pub background_rms_uv: f64,
    pub seed: u64,
    pub file_id: String,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            duration_s: 7200.0,
            fs: 256.0,
            n_channels: 23,
            n_seizures: 20,
            seizure_min_s: 10.0,
            seizure_max_s: 60.0,
            min_gap_s: 30.0,
            intervals: None,
            burst_frequencies_hz: vec![3.0, 20.0],
            burst_amplitude_ratio: 5.0,
            background_rms_uv: 20.0,
            seed: 1,
            file_id: "synthetic.edf".into(),
        }
    }
}

impl SynthesisConfig {
    pub fn to_spec(&self) -> Result<SynthesisSpec, CliError> {
        let seizure_intervals = match &self.intervals {
            Some(list) => list.iter().map(|&[s, e]| (s, e)).collect(),
            None => random_intervals(
                self.duration_s,
                self.n_seizures,
                self.seizure_min_s,
                self.seizure_max_s,
                self.min_gap_s,
                self.seed,
            )
            .map_err(|e| CliError::Config(e.to_string()))?,
        };
        let spec = SynthesisSpec {
            duration_s: self.duration_s,
            fs: self.fs,
            n_channels: self.n_channels,
            seizure_intervals,
            burst_frequencies_hz: self.burst_frequencies_hz.clone(),
            burst_amplitude_ratio: self.burst_amplitude_ratio,
            noise_seed: self.seed,
            background_rms_uv: self.background_rms_uv,
            file_id: self.file_id.clone(),
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub window_s: f64,
    pub bands: Vec<String>,
    /// Edge overrides in Hz, keyed by band name.
    pub band_edges: BTreeMap<String, [f64; 2]>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            window_s: DEFAULT_WINDOW_S,
            bands: BandName::ALL.iter().map(|b| b.to_string()).collect(),
            band_edges: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub edge_rule: EdgeRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalanceConfig {
    pub smote_k: usize,
    pub standardize: bool,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        Self {
            smote_k: 5,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub train_fraction: f64,
    pub cv_folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            cv_folds: 5,
            repeats: 10,
            seed: 0,
            output_dir: PathBuf::from("results"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataConfig,
    pub synthesis: Option<SynthesisConfig>,
    pub preprocess: PreprocessConfig,
    pub graph: GraphConfig,
    pub balance: BalanceConfig,
    pub gcn: GcnConfig,
    pub experiment: ExperimentSection,
}

/// Parses `value` as a TOML literal, falling back to a bare string.
fn parse_value(value: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {value}")) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(value.to_string()),
    }
}

fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (path, value) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {assignment:?} is not key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    let (last, parents) = keys.split_last().expect("split yields one item");
    let mut table = root;
    for key in parents {
        let entry = table
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("{path}: {key} is not a table")))?;
    }
    table.insert(last.to_string(), parse_value(value.trim()));
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: Self = table.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn bands(&self) -> Result<Vec<BandDefinition>, CliError> {
        for key in self.preprocess.band_edges.keys() {
            key.parse::<BandName>().map_err(CliError::Config)?;
        }
        let mut seen = Vec::new();
        self.preprocess
            .bands
            .iter()
            .map(|raw| {
                let name: BandName = raw.parse().map_err(CliError::Config)?;
                if seen.contains(&name) {
                    return Err(CliError::Config(format!("band {name} listed twice")));
                }
                seen.push(name);
                let mut def = name.definition();
                if let Some((_, &[lo, hi])) = self.preprocess.band_edges.iter().find(|(k, _)| k.parse::<BandName>().ok() == Some(name)) {
                    def.f_lo = lo;
                    def.f_hi = hi;
                }
                if !(def.f_lo > 0.0 && def.f_hi > def.f_lo) {
                    return Err(CliError::Config(format!("band {name} edges [{}, {}]", def.f_lo, def.f_hi)));
                }
                Ok(def)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let e = &self.experiment;
        if !(e.train_fraction > 0.0 && e.train_fraction < 1.0) {
            return bad(format!("experiment.train_fraction = {} outside (0, 1)", e.train_fraction));
        }
        if e.cv_folds < 2 {
            return bad(format!("experiment.cv_folds = {} (need at least 2)", e.cv_folds));
        }
        if e.repeats < 1 {
            return bad("experiment.repeats must be at least 1".into());
        }
        if self.preprocess.window_s.is_nan() || self.preprocess.window_s <= 0.0 {
            return bad(format!("preprocess.window_s = {}", self.preprocess.window_s));
        }
        if self.preprocess.bands.is_empty() {
            return bad("preprocess.bands is empty".into());
        }
        self.bands()?;
        if self.balance.smote_k < 1 {
            return bad("balance.smote_k must be at least 1".into());
        }
        self.gcn.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let w = self.preprocess.window_s;
        if w.fract() != 0.0 {
            return bad(format!("preprocess.window_s = {w} is not a whole number of 1 s feature frames"));
        }
        let input_dim = N_FEATURES * w as usize;
        if self.gcn.layer_dims[0] != input_dim {
            return bad(format!(
                "gcn.layer_dims must start with {input_dim} ({N_FEATURES} features x {w} seconds), got {}",
                self.gcn.layer_dims[0]
            ));
        }
        if let Some(s) = &self.synthesis {
            s.to_spec()?;
        }
        Ok(())
    }

    /// Checks that referenced inputs exist; done when a command needs them.
    pub fn validate_paths(&self) -> Result<(), CliError> {
        let missing = |p: &Path| CliError::Config(format!("{} does not exist", p.display()));
        for p in &self.data.edf_files {
            if !p.is_file() {
                return Err(missing(p));
            }
        }
        if let Some(d) = &self.data.data_dir {
            if !d.is_dir() {
                return Err(missing(d));
            }
        }
        if let Some(a) = &self.data.annotations {
            if !a.is_file() {
                return Err(missing(a));
            }
        }
        Ok(())
    }

    pub fn uses_files(&self) -> bool {
        !self.data.edf_files.is_empty() || self.data.data_dir.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_the_method() {
        let c = ExperimentConfig::from_toml("", &[]).unwrap();
        assert_eq!(c.preprocess.window_s, 6.0);
        assert_eq!(c.bands().unwrap().len(), 6);
        assert_eq!((c.gcn.learning_rate, c.gcn.epochs), (0.01, 500));
        assert_eq!((c.experiment.cv_folds, c.experiment.repeats, c.experiment.train_fraction), (5, 10, 0.8));
        assert_eq!(c.balance.smote_k, 5);
    }

    #[test]
    fn overrides_and_round_trip() {
        let text = "[gcn]\nepochs = 20\n[synthesis]\nduration_s = 600\nn_seizures = 3\n";
        let c = ExperimentConfig::from_toml(
            text,
            &[
                "gcn.layer_dims=[66, 8, 2]".into(),
                "preprocess.bands=[\"Delta\", \"lower_beta\"]".into(),
                "experiment.output_dir=out/run1".into(),
                "preprocess.band_edges.Delta=[1.0, 4.0]".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.gcn.epochs, 20);
        assert_eq!(c.gcn.layer_dims, vec![66, 8, 2]);
        assert_eq!(c.experiment.output_dir, PathBuf::from("out/run1"));
        let bands = c.bands().unwrap();
        assert_eq!((bands[0].name, bands[0].f_lo), (BandName::Delta, 1.0));
        assert_eq!(bands[1].name, BandName::LowerBeta);
        let again = ExperimentConfig::from_toml(&c.to_toml(), &[]).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_bad_values() {
        for o in [
            "experiment.train_fraction=1.0",
            "preprocess.bands=[]",
            "preprocess.bands=[\"Gamma\"]",
            "gcn.layer_dims=[10, 2]",
            "gcn.learning_rate=-1",
            "experiment.cv_folds=1",
            "unknown.key=3",
        ] {
            let err = ExperimentConfig::from_toml("", &[o.into()]).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{o}");
        }
    }
}
