//! Shared stages: loading recordings, per-band features, and the per-band
//! experiment (split, cross-validation, hold-out fit, repeats).

use std::path::{Path, PathBuf};

use bandgcn::balance::FeatureDataset;
use bandgcn::eval::{
    cross_validate, evaluate, kfold_split, pr_auc, roc_auc, stratified_holdout, sub_seed, summarize, CvReport, GcnLearner, GcnModel,
    Learner, MetricValues, MetricsReport, Scorer, Summary,
};
use bandgcn::features::{FeatureExtractor, SegmentFeatureMatrix};
use bandgcn::graphs::{montage_graph, validate, EegGraph, Montage};
use bandgcn::preprocess::{bandpass, label_windows, segment, window_len, BandDefinition};
use bandgcn::signal_io::{load_annotations, parse_edf, synthesize_recording, write_edf, Recording, SeizureAnnotation, SignalError};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{io_err, CliError};

#[derive(Debug, Clone)]
pub struct LoadedRecording {
    pub file_id: String,
    pub recording: Recording,
    pub annotations: Vec<SeizureAnnotation>,
}

/// Input files and their SHA-256, for run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

/// Montage graph for the configured edge rule, refusing an invalid one.
pub fn build_graph(config: &ExperimentConfig) -> Result<EegGraph, CliError> {
    let graph = montage_graph(config.graph.edge_rule);
    let report = validate(&graph);
    if !report.passed() {
        return Err(CliError::Internal(format!("montage graph invalid: {}", report.failures.join("; "))));
    }
    Ok(graph)
}

fn edf_paths(config: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = config.data.edf_files.clone();
    if let Some(dir) = &config.data.data_dir {
        let mut found: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io_err(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("edf")))
            .collect();
        found.sort();
        paths.extend(found);
    }
    Ok(paths)
}

/// Restricts a recording to the 23-channel montage, in montage order.
pub fn select_montage(recording: &Recording) -> Result<Recording, SignalError> {
    recording.select_channels(Montage::chb_mit().channels())
}

/// Recordings from EDF files, or from the synthesis spec (passed through
/// the EDF writer so the data carry the same 16-bit quantization).
pub fn load_recordings(config: &ExperimentConfig) -> Result<(Vec<LoadedRecording>, Vec<InputDigest>), CliError> {
    if !config.uses_files() {
        let synth = config.synthesis.clone().unwrap_or_default();
        let spec = synth.to_spec()?;
        let (recording, annotations) = synthesize_recording(&spec)?;
        let bytes = write_edf(&recording)?;
        let digest = InputDigest {
            path: format!("<synthesis:{}>", spec.file_id),
            sha256: sha256_hex(&bytes),
        };
        let recording = select_montage(&parse_edf(&bytes)?)?;
        return Ok((
            vec![LoadedRecording {
                file_id: spec.file_id,
                recording,
                annotations,
            }],
            vec![digest],
        ));
    }

    config.validate_paths()?;
    let mut digests = Vec::new();
    let annotations = match &config.data.annotations {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            digests.push(InputDigest {
                path: path.display().to_string(),
                sha256: sha256_hex(text.as_bytes()),
            });
            let set = load_annotations(&text)?;
            for r in &set.rejected {
                log::warn!("annotation line {} ({}) rejected: {}", r.line, r.file_id, r.reason);
            }
            set
        }
        None => {
            log::warn!("no annotation file; every window is labeled non-seizure");
            Default::default()
        }
    };
    let mut out = Vec::new();
    for path in edf_paths(config)? {
        let bytes = std::fs::read(&path).map_err(io_err(&path))?;
        digests.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        let file_id = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        let recording = parse_edf(&bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let recording = match select_montage(&recording) {
            Ok(r) => r,
            Err(SignalError::MissingChannels(missing)) => {
                log::warn!("{file_id}: skipped, montage channels missing: {}", missing.join(", "));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        out.push(LoadedRecording {
            annotations: annotations.for_file(&file_id).cloned().collect(),
            file_id,
            recording,
        });
    }
    if out.is_empty() {
        return Err(CliError::Data("no usable recordings".into()));
    }
    Ok((out, digests))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileCounts {
    pub file: String,
    pub windows: usize,
    pub seizure_windows: usize,
}

#[derive(Debug, Clone)]
pub struct BandFeatures {
    pub band: BandDefinition,
    pub rows: Vec<SegmentFeatureMatrix>,
    pub per_file: Vec<FileCounts>,
}

/// Filter, window, label and featurize every recording for one band.
pub fn band_features(recordings: &[LoadedRecording], band: BandDefinition, window_s: f64) -> Result<BandFeatures, CliError> {
    let mut rows = Vec::new();
    let mut per_file = Vec::new();
    for rec in recordings {
        let fs = rec.recording.fs();
        window_len(window_s, fs)?;
        let filtered = bandpass(&rec.recording, &band)?;
        let windows = segment(&filtered, band.name, window_s, &rec.file_id)?.windows;
        let windows = label_windows(windows, &rec.annotations);
        let mut extractor = FeatureExtractor::new(fs.round() as usize);
        let before = rows.len();
        for w in &windows {
            rows.push(extractor.segment(w)?);
        }
        let seizure_windows = rows[before..].iter().filter(|r| r.label == 1).count();
        per_file.push(FileCounts {
            file: rec.file_id.clone(),
            windows: windows.len(),
            seizure_windows,
        });
    }
    Ok(BandFeatures { band, rows, per_file })
}

/// One seeded pass: split, cross-validate the training part, then fit on
/// the whole training part and score the hold-out part.
pub struct BandRun {
    pub seed: u64,
    pub cv: CvReport,
    pub holdout: MetricsReport,
    pub holdout_scores: Vec<f64>,
    pub holdout_truth: Vec<u8>,
    pub model: GcnModel,
}

pub fn learner(config: &ExperimentConfig, graph: &EegGraph) -> GcnLearner {
    GcnLearner {
        graph: graph.clone(),
        config: config.gcn.clone(),
        smote_k: config.balance.smote_k,
        standardize: config.balance.standardize,
    }
}

pub fn run_band_once(data: &FeatureDataset, band: &BandDefinition, config: &ExperimentConfig, graph: &EegGraph, seed: u64) -> Result<BandRun, CliError> {
    let e = &config.experiment;
    let (train_idx, test_idx) = stratified_holdout(&data.y, e.train_fraction, sub_seed(seed, 100))?;
    let train = data.subset(&train_idx);
    let test = data.subset(&test_idx);
    let plan = kfold_split(&train.y, e.cv_folds, sub_seed(seed, 101))?;
    let learner = learner(config, graph);
    let cv = cross_validate(&learner, &train, &plan, band.name, sub_seed(seed, 102))?;
    let model = learner.fit(&train, sub_seed(seed, 103))?;
    let prediction = model.predict(test.x.view())?;
    let holdout = evaluate(&prediction, &test.y, band.name, "holdout")?;
    Ok(BandRun {
        seed,
        cv,
        holdout,
        holdout_scores: prediction.scores,
        holdout_truth: test.y,
        model,
    })
}

pub struct BandOutcome {
    pub band: BandDefinition,
    pub runs: Vec<BandRun>,
    /// Over runs, of each run's cross-validation mean.
    pub cv_summary: Summary,
    pub holdout_summary: Summary,
}

pub fn run_band(features: &BandFeatures, config: &ExperimentConfig, graph: &EegGraph) -> Result<BandOutcome, CliError> {
    let data = FeatureDataset::from_segments(&features.rows)?;
    let (neg, pos) = data.class_counts();
    log::info!("{}: {} windows ({pos} ictal, {neg} non-ictal)", features.band.name, data.len());
    if pos == 0 || neg == 0 {
        return Err(CliError::Data(format!("{}: windows of a single class", features.band.name)));
    }
    let mut runs = Vec::with_capacity(config.experiment.repeats);
    for r in 0..config.experiment.repeats as u64 {
        let seed = config.experiment.seed.wrapping_add(r);
        let run = run_band_once(&data, &features.band, config, graph, seed)?;
        log::info!(
            "{} run {r}: cv accuracy {:.4}, hold-out accuracy {:.4}",
            features.band.name,
            run.cv.summary.mean.accuracy,
            run.holdout.values.accuracy
        );
        runs.push(run);
    }
    let cv_means: Vec<MetricValues> = runs.iter().map(|r| r.cv.summary.mean).collect();
    let holdouts: Vec<MetricValues> = runs.iter().map(|r| r.holdout.values).collect();
    Ok(BandOutcome {
        band: features.band,
        cv_summary: summarize(&cv_means),
        holdout_summary: summarize(&holdouts),
        runs,
    })
}

/// Curves of the first run's hold-out scores.
pub fn holdout_curves(run: &BandRun) -> Result<(Vec<bandgcn::eval::RocPoint>, Vec<bandgcn::eval::PrPoint>), CliError> {
    let roc = roc_auc(&run.holdout_scores, &run.holdout_truth).map(|r| r.0).unwrap_or_default();
    let pr = pr_auc(&run.holdout_scores, &run.holdout_truth).map(|r| r.0).unwrap_or_default();
    Ok((roc, pr))
}

pub fn ensure_fresh_dir(dir: &Path) -> Result<(), CliError> {
    if dir.exists() {
        let non_empty = std::fs::read_dir(dir).map_err(io_err(dir))?.next().is_some();
        if non_empty {
            return Err(CliError::Config(format!(
                "output directory {} already exists and is not empty; outputs are write-once",
                dir.display()
            )));
        }
    }
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}
