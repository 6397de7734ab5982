//! The five subcommands. Each takes resolved options and returns a summary
//! of what it wrote.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use bandgcn::eval::{stratified_holdout, write_metrics_csv, write_pr_csv, write_roc_csv, MetricValues};
use bandgcn::features::{write_feature_csv, FeatureExtractor};
use bandgcn::gcn::{label_from_probabilities, predict_proba, Checkpoint};
use bandgcn::graphs::{montage_graph, validate, EdgeRule, GraphReport, Montage};
use bandgcn::preprocess::{bandpass, segment, BandName};
use bandgcn::signal_io::{parse_edf, synthesize_recording, write_annotations, write_edf};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{io_err, CliError};
use crate::pipeline::{self, sha256_hex, BandOutcome, FileCounts, InputDigest};

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    Ok(BufWriter::new(File::create_new(path).map_err(io_err(path))?))
}

fn write_with<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut out = create(path)?;
    body(&mut out).and_then(|_| out.flush()).map_err(io_err(path))
}

pub struct SynthOutput {
    pub edf: PathBuf,
    pub annotations: PathBuf,
    pub n_seizures: usize,
}

/// Writes the configured synthetic recording and its annotation CSV.
pub fn cmd_synth(config: &ExperimentConfig, out_dir: &Path) -> Result<SynthOutput, CliError> {
    let synth = config.synthesis.clone().unwrap_or_default();
    let spec = synth.to_spec()?;
    let (recording, annotations) = synthesize_recording(&spec)?;
    let bytes = write_edf(&recording)?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let edf = out_dir.join(&spec.file_id);
    let ann = out_dir.join("annotations.csv");
    for p in [&edf, &ann] {
        if p.exists() {
            return Err(io_err(p)(std::io::ErrorKind::AlreadyExists.into()));
        }
    }
    write_with(&edf, |w| w.write_all(&bytes))?;
    write_with(&ann, |w| w.write_all(write_annotations(&annotations).as_bytes()))?;
    log::info!("wrote {} ({} seizures) and {}", edf.display(), annotations.len(), ann.display());
    Ok(SynthOutput {
        edf,
        annotations: ann,
        n_seizures: annotations.len(),
    })
}

#[derive(Debug, Serialize)]
pub struct FeatureManifestBand {
    pub band: String,
    pub f_lo: f64,
    pub f_hi: f64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub files: Vec<FileCounts>,
}

#[derive(Debug, Serialize)]
pub struct FeatureManifest {
    pub window_s: f64,
    pub train_fraction: f64,
    pub seed: u64,
    pub inputs: Vec<InputDigest>,
    pub bands: Vec<FeatureManifestBand>,
}

/// Writes `<out>/<band>/{train,test}.csv` and `<out>/manifest.json`.
pub fn cmd_features(config: &ExperimentConfig, out_dir: &Path) -> Result<FeatureManifest, CliError> {
    let (recordings, inputs) = pipeline::load_recordings(config)?;
    pipeline::ensure_fresh_dir(out_dir)?;
    let mut bands = Vec::new();
    for band in config.bands()? {
        let feats = pipeline::band_features(&recordings, band, config.preprocess.window_s)?;
        let labels: Vec<u8> = feats.rows.iter().map(|r| r.label).collect();
        let (train, test) = stratified_holdout(&labels, config.experiment.train_fraction, config.experiment.seed)?;
        let dir = out_dir.join(band.name.as_str());
        for (name, idx) in [("train.csv", &train), ("test.csv", &test)] {
            let rows: Vec<_> = idx.iter().map(|&i| feats.rows[i].clone()).collect();
            let mut out = create(&dir.join(name))?;
            write_feature_csv(&mut out, &rows)?;
            out.flush().map_err(io_err(&dir))?;
        }
        bands.push(FeatureManifestBand {
            band: band.name.to_string(),
            f_lo: band.f_lo,
            f_hi: band.f_hi,
            train_rows: train.len(),
            test_rows: test.len(),
            files: feats.per_file,
        });
    }
    let manifest = FeatureManifest {
        window_s: config.preprocess.window_s,
        train_fraction: config.experiment.train_fraction,
        seed: config.experiment.seed,
        inputs,
        bands,
    };
    let path = out_dir.join("manifest.json");
    write_with(&path, |w| w.write_all(serde_json::to_string_pretty(&manifest).expect("serializable").as_bytes()))?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStatus {
    pub band: String,
    pub status: String,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub config: ExperimentConfig,
    pub run_seeds: Vec<u64>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<InputDigest>,
    pub bands: Vec<BandStatus>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

fn fmt_values(v: &MetricValues) -> String {
    v.to_array().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn write_band(dir: &Path, outcome: &BandOutcome, config: &ExperimentConfig, graph: &bandgcn::graphs::EegGraph) -> Result<(), CliError> {
    let first = &outcome.runs[0];
    let mut rows = first.cv.rows();
    rows.push(first.holdout.clone());
    write_with(&dir.join("metrics.csv"), |w| write_metrics_csv(w, &rows))?;
    let (roc, pr) = pipeline::holdout_curves(first)?;
    write_with(&dir.join("roc.csv"), |w| write_roc_csv(w, &roc))?;
    write_with(&dir.join("pr.csv"), |w| write_pr_csv(w, &pr))?;
    let cm = first.holdout.confusion.expect("hold-out report carries counts");
    write_with(&dir.join("confusion.csv"), |w| cm.write_csv(w))?;
    write_with(&dir.join("loss.csv"), |w| {
        writeln!(w, "epoch,loss")?;
        for (i, l) in first.model.loss_history.iter().enumerate() {
            writeln!(w, "{i},{l}")?;
        }
        Ok(())
    })?;
    let names = MetricValues::NAMES;
    write_with(&dir.join("repeats.csv"), |w| {
        let cv: Vec<String> = names.iter().map(|n| format!("cv_{n}")).collect();
        let ho: Vec<String> = names.iter().map(|n| format!("holdout_{n}")).collect();
        writeln!(w, "run,seed,{},{}", cv.join(","), ho.join(","))?;
        for (i, run) in outcome.runs.iter().enumerate() {
            writeln!(w, "{i},{},{},{}", run.seed, fmt_values(&run.cv.summary.mean), fmt_values(&run.holdout.values))?;
        }
        Ok(())
    })?;
    let checkpoint = Checkpoint::new(
        &first.model.params,
        &first.model.config,
        outcome.band,
        config.preprocess.window_s,
        graph,
        first.model.standardizer.clone(),
    );
    let path = dir.join("model.json");
    write_with(&path, |w| w.write_all(checkpoint.to_json().as_bytes()))
}

fn digest_tree(root: &Path) -> Result<Vec<InputDigest>, CliError> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).map_err(io_err(&dir))? {
            let path = entry.map_err(io_err(&dir))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n != "manifest.json") {
                files.push(path);
            }
        }
    }
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(&p).map_err(io_err(&p))?;
            Ok(InputDigest {
                path: p.strip_prefix(root).unwrap_or(&p).display().to_string(),
                sha256: sha256_hex(&bytes),
            })
        })
        .collect()
}

/// Runs every configured band. A failing band is recorded in the manifest
/// and the others continue.
pub fn cmd_run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest, CliError> {
    config.validate()?;
    let graph = pipeline::build_graph(config)?;
    let (recordings, inputs) = pipeline::load_recordings(config)?;
    pipeline::ensure_fresh_dir(out_dir)?;
    let mut snapshot = config.clone();
    snapshot.experiment.output_dir = out_dir.to_path_buf();
    write_with(&out_dir.join("config.toml"), |w| w.write_all(snapshot.to_toml().as_bytes()))?;

    let mut statuses = Vec::new();
    let mut comparison = Vec::new();
    for band in config.bands()? {
        let result = pipeline::band_features(&recordings, band, config.preprocess.window_s)
            .and_then(|feats| pipeline::run_band(&feats, config, &graph))
            .and_then(|outcome| {
                write_band(&out_dir.join(band.name.as_str()), &outcome, config, &graph)?;
                Ok(outcome)
            });
        match result {
            Ok(outcome) => {
                statuses.push(BandStatus {
                    band: band.name.to_string(),
                    status: "ok".into(),
                    error: None,
                });
                comparison.push((band.name, outcome.cv_summary));
            }
            Err(e) => {
                log::error!("{}: {e}", band.name);
                statuses.push(BandStatus {
                    band: band.name.to_string(),
                    status: "failed".into(),
                    error: Some(e.to_string()),
                });
            }
        }
    }

    write_with(&out_dir.join("comparison.csv"), |w| {
        writeln!(w, "band,accuracy,specificity,sensitivity,precision,f1,roc_auc,pr_auc,accuracy_std")?;
        for (band, s) in &comparison {
            let m = &s.mean;
            writeln!(
                w,
                "{band},{},{},{},{},{},{},{},{}",
                m.accuracy, m.specificity, m.sensitivity, m.precision, m.f1, m.roc_auc, m.pr_auc, s.std.accuracy
            )?;
        }
        Ok(())
    })?;

    let manifest = RunManifest {
        tool: format!("bandgcn {}", env!("CARGO_PKG_VERSION")),
        config: snapshot,
        run_seeds: (0..config.experiment.repeats as u64)
            .map(|r| config.experiment.seed.wrapping_add(r))
            .collect(),
        inputs,
        outputs: digest_tree(out_dir)?,
        bands: statuses,
    };
    let path = out_dir.join("manifest.json");
    write_with(&path, |w| w.write_all(serde_json::to_string_pretty(&manifest).expect("serializable").as_bytes()))?;
    Ok(manifest)
}

/// Re-executes the configuration recorded in `manifest` into `out_dir`.
pub fn cmd_run_from_manifest(manifest: &Path, out_dir: &Path) -> Result<RunManifest, CliError> {
    let recorded = RunManifest::load(manifest)?;
    cmd_run(&recorded.config, out_dir)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowPrediction {
    pub window_k: usize,
    pub start_s: f64,
    pub end_s: f64,
    pub p_seizure: f64,
    pub label: u8,
}

/// Scores every window of `edf` with a saved model.
pub fn cmd_predict(checkpoint: &Path, edf: &Path, band: BandName, edge_rule: EdgeRule, out: &Path) -> Result<Vec<WindowPrediction>, CliError> {
    let ck = Checkpoint::load(checkpoint).map_err(|e| CliError::Config(e.to_string()))?;
    ck.check_band(band).map_err(|e| CliError::Config(e.to_string()))?;
    let graph = montage_graph(edge_rule);
    ck.check_graph(&graph).map_err(|e| CliError::Config(e.to_string()))?;
    let params = ck.params().map_err(|e| CliError::Config(e.to_string()))?;

    let bytes = std::fs::read(edf).map_err(io_err(edf))?;
    let recording = pipeline::select_montage(&parse_edf(&bytes)?)?;
    let filtered = bandpass(&recording, &ck.band)?;
    let file_id = edf.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let windows = segment(&filtered, band, ck.window_s, &file_id)?.windows;
    let mut extractor = FeatureExtractor::new(recording.fs().round() as usize);
    let rows = windows.iter().map(|w| extractor.segment(w)).collect::<Result<Vec<_>, _>>()?;
    let mut predictions = Vec::with_capacity(rows.len());
    if !rows.is_empty() {
        let mut x = bandgcn::balance::FeatureDataset::from_segments(&rows)?.x;
        if let Some(s) = &ck.standardizer {
            s.transform(&mut x);
        }
        let proba = predict_proba(&params, &graph, x.view())?;
        predictions.extend(windows.iter().zip(proba.rows()).map(|(w, p)| WindowPrediction {
            window_k: w.index_k,
            start_s: w.index_k as f64 * ck.window_s,
            end_s: (w.index_k + 1) as f64 * ck.window_s,
            p_seizure: p[1],
            label: label_from_probabilities(p),
        }));
    }
    write_with(out, |w| {
        writeln!(w, "window_k,start_s,end_s,p_seizure,label")?;
        for p in &predictions {
            writeln!(w, "{},{},{},{},{}", p.window_k, p.start_s, p.end_s, p.p_seizure, p.label)?;
        }
        Ok(())
    })?;
    Ok(predictions)
}

/// Validates the montage graph; optionally exports its edge list.
pub fn cmd_validate_graph(edge_rule: EdgeRule, edges_out: Option<&Path>) -> Result<GraphReport, CliError> {
    let graph = montage_graph(edge_rule);
    let report = validate(&graph);
    if let Some(path) = edges_out {
        write_with(path, |w| graph.write_edge_csv(w, Montage::chb_mit().channels()))?;
    }
    if !report.passed() {
        return Err(CliError::Internal(report.failures.join("; ")));
    }
    Ok(report)
}
