use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use b2i::metrics::{evaluate_dataset, pe, CountSeries};
use b2i::pipeline::{convert_detailed, Method, MixParams};
use b2i::raster::{load_mask, save_labelmap, save_mask};
use b2i::synthgen::{benchmark_suite, generate, SceneSpec};
use b2i::tuner::{
    grid_search, read_reference_counts, summarize, write_reference_counts, GridEntry,
    ReferenceCount, TuneOutcome, TuneResult,
};
use b2i::{LabelMap, Mask, PipelineConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::files::{create_dir, discover, millis, thread_pool, write_json, write_overlay, InputImage, Settings};
use crate::{ConvertArgs, EvalArgs, SynthArgs, TuneArgs};

#[derive(Serialize)]
struct Manifest<E> {
    command: &'static str,
    config: Option<PathBuf>,
    pipeline: PipelineConfig,
    inputs: Vec<PathBuf>,
    output_dir: PathBuf,
    seed: Option<u64>,
    entries: Vec<E>,
    elapsed_ms: f64,
}

#[derive(Serialize)]
struct ConvertEntry {
    image: String,
    input: PathBuf,
    labels: PathBuf,
    overlay: Option<PathBuf>,
    params: MixParams,
    target: Option<usize>,
    count: usize,
    carved_lines: usize,
    timing_ms: f64,
}

fn reference_map(path: &Path) -> Result<BTreeMap<String, ReferenceCount>> {
    Ok(read_reference_counts(path)?
        .into_iter()
        .map(|r| (r.image.clone(), r))
        .collect())
}

fn require_refs<'a>(refs: &'a Option<PathBuf>, command: &str) -> Result<&'a Path> {
    refs.as_deref().ok_or_else(|| {
        anyhow!("{command} needs --refs pointing to a CSV with header `image,count` (optional `class` column)")
    })
}

struct Outputs {
    labels: PathBuf,
    overlays: Option<PathBuf>,
}

impl Outputs {
    fn create(out: &Path, overlay: bool) -> Result<Self> {
        let labels = out.join("labels");
        create_dir(&labels)?;
        let overlays = if overlay {
            let d = out.join("overlays");
            create_dir(&d)?;
            Some(d)
        } else {
            None
        };
        Ok(Self { labels, overlays })
    }

    /// Writes the label map and, if enabled, its overlay.
    fn write(&self, id: &str, labels: &LabelMap, seed: u64) -> Result<(PathBuf, Option<PathBuf>)> {
        let lp = self.labels.join(format!("{id}.png"));
        save_labelmap(labels, &lp)?;
        let op = match &self.overlays {
            Some(d) => {
                let p = d.join(format!("{id}.png"));
                write_overlay(labels, seed, &p)?;
                Some(p)
            }
            None => None,
        };
        Ok((lp, op))
    }
}

pub fn convert(a: &ConvertArgs) -> Result<()> {
    let c = &a.common;
    let settings = Settings::load(c.config.as_deref())?;
    let refs = a.refs.as_deref().map(reference_map).transpose()?;
    let inputs = discover(&c.input)?;
    let outputs = Outputs::create(&c.out, a.overlay)?;
    let params = settings.pipeline.mix_params[0];
    let pool = thread_pool(c.jobs)?;
    let start = Instant::now();
    let results: Vec<Result<ConvertEntry>> = pool.install(|| {
        inputs
            .par_iter()
            .map(|img| {
                let t = Instant::now();
                let mask = load_mask(&img.path)?;
                let target = refs.as_ref().and_then(|r| r.get(&img.id)).map(|r| r.count);
                let out = convert_detailed(&mask, &params, &settings.pipeline, target)?;
                let (labels, overlay) = outputs.write(&img.id, &out.labels, a.seed)?;
                Ok(ConvertEntry {
                    image: img.id.clone(),
                    input: img.path.clone(),
                    labels,
                    overlay,
                    params,
                    target,
                    count: out.labels.count(),
                    carved_lines: out.carved_lines,
                    timing_ms: millis(t.elapsed()),
                })
            })
            .collect()
    });
    let mut entries = Vec::with_capacity(results.len());
    for (img, r) in inputs.iter().zip(results) {
        entries.push(r.with_context(|| format!("failed on {}", img.path.display()))?);
    }
    write_json(
        &c.out.join("manifest.json"),
        &Manifest {
            command: "convert",
            config: c.config.clone(),
            pipeline: settings.pipeline.clone(),
            inputs: inputs.iter().map(|i| i.path.clone()).collect(),
            output_dir: c.out.clone(),
            seed: Some(a.seed),
            entries,
            elapsed_ms: millis(start.elapsed()),
        },
    )
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
enum TuneEntry {
    /// Grid search against the image's reference count.
    Tuned {
        #[serde(flatten)]
        result: TuneResult,
        labels: PathBuf,
        overlay: Option<PathBuf>,
        timing_ms: f64,
    },
    /// No reference count: the first mix_params entry was applied.
    Untuned {
        image: String,
        params: MixParams,
        count: usize,
        labels: PathBuf,
        overlay: Option<PathBuf>,
        timing_ms: f64,
    },
    Failed {
        image: String,
        error: String,
    },
}

fn tune_one(
    img: &InputImage,
    refs: &BTreeMap<String, ReferenceCount>,
    grid: &[GridEntry],
    settings: &Settings,
    outputs: &Outputs,
    seed: u64,
) -> Result<TuneEntry> {
    let t = Instant::now();
    let mask = load_mask(&img.path)?;
    match refs.get(&img.id) {
        Some(r) => {
            let result = grid_search(&img.id, &mask, r.count, grid, &settings.pipeline)?;
            let (labels, overlay) = outputs.write(&img.id, &result.labels, seed)?;
            Ok(TuneEntry::Tuned {
                result,
                labels,
                overlay,
                timing_ms: millis(t.elapsed()),
            })
        }
        None => {
            let params = settings.pipeline.mix_params[0];
            let out = convert_detailed(&mask, &params, &settings.pipeline, None)?;
            let (labels, overlay) = outputs.write(&img.id, &out.labels, seed)?;
            Ok(TuneEntry::Untuned {
                image: img.id.clone(),
                params,
                count: out.labels.count(),
                labels,
                overlay,
                timing_ms: millis(t.elapsed()),
            })
        }
    }
}

pub fn tune(a: &TuneArgs) -> Result<()> {
    let c = &a.common;
    let refs = reference_map(require_refs(&a.refs, "tune")?)?;
    let settings = Settings::load(c.config.as_deref())?;
    let grid = settings.grid();
    let inputs = discover(&c.input)?;
    let outputs = Outputs::create(&c.out, a.overlay)?;
    let pool = thread_pool(c.jobs)?;
    let start = Instant::now();
    let entries: Vec<TuneEntry> = pool.install(|| {
        inputs
            .par_iter()
            .map(|img| {
                tune_one(img, &refs, &grid, &settings, &outputs, a.seed).unwrap_or_else(|e| {
                    TuneEntry::Failed {
                        image: img.id.clone(),
                        error: format!("{}: {e:#}", img.path.display()),
                    }
                })
            })
            .collect()
    });
    let outcomes: Vec<TuneOutcome> = entries
        .iter()
        .filter_map(|e| match e {
            TuneEntry::Tuned { result, .. } => Some(TuneOutcome::Ok(result.clone())),
            TuneEntry::Failed { image, error } => Some(TuneOutcome::Failed {
                image: image.clone(),
                error: error.clone(),
            }),
            TuneEntry::Untuned { .. } => None,
        })
        .collect();
    #[derive(Serialize)]
    struct TuneReport<'a> {
        grid_size: usize,
        summary: b2i::tuner::TuneSummary,
        results: &'a [TuneOutcome],
    }
    write_json(
        &c.out.join("tune.json"),
        &TuneReport {
            grid_size: grid.len(),
            summary: summarize(&outcomes),
            results: &outcomes,
        },
    )?;
    let failed: Vec<String> = entries
        .iter()
        .filter_map(|e| match e {
            TuneEntry::Failed { error, .. } => Some(error.clone()),
            _ => None,
        })
        .collect();
    write_json(
        &c.out.join("manifest.json"),
        &Manifest {
            command: "tune",
            config: c.config.clone(),
            pipeline: settings.pipeline.clone(),
            inputs: inputs.iter().map(|i| i.path.clone()).collect(),
            output_dir: c.out.clone(),
            seed: Some(a.seed),
            entries,
            elapsed_ms: millis(start.elapsed()),
        },
    )?;
    if let Some(first) = failed.first() {
        bail!("{} of {} images failed; first: {first}", failed.len(), inputs.len());
    }
    Ok(())
}

/// The fixed-parameter baselines scored by `eval`, then the tuned method.
const FIXED: [Method; 5] = [
    Method::FindContour,
    Method::Watershed,
    Method::Skeleton,
    Method::Morphology,
    Method::Combination,
];

#[derive(Serialize)]
struct PeRow<'a> {
    image: &'a str,
    class: &'a str,
    measured: usize,
    reference: usize,
    pe: f64,
}

pub fn eval(a: &EvalArgs) -> Result<()> {
    let c = &a.common;
    let refs = reference_map(require_refs(&a.refs, "eval")?)?;
    let settings = Settings::load(c.config.as_deref())?;
    let grid = settings.grid();
    let inputs = discover(&c.input)?;

    let mask_ids: BTreeSet<&str> = inputs.iter().map(|i| i.id.as_str()).collect();
    let ref_ids: BTreeSet<&str> = refs.keys().map(String::as_str).collect();
    let no_ref: Vec<&str> = mask_ids.difference(&ref_ids).copied().collect();
    let no_mask: Vec<&str> = ref_ids.difference(&mask_ids).copied().collect();
    if !no_ref.is_empty() || !no_mask.is_empty() {
        bail!(
            "image ids differ between masks and reference counts; masks without a count: [{}]; counts without a mask: [{}]",
            no_ref.join(", "),
            no_mask.join(", ")
        );
    }
    create_dir(&c.out)?;
    let pool = thread_pool(c.jobs)?;
    let base = settings.pipeline.mix_params[0];
    // counts[image][method]
    let counts: Vec<Result<Vec<usize>>> = pool.install(|| {
        inputs
            .par_iter()
            .map(|img| {
                let mask: Mask = load_mask(&img.path)?;
                let h = refs[&img.id].count;
                let mut row = Vec::with_capacity(FIXED.len() + 1);
                for m in FIXED {
                    let p = MixParams { method: m, ..base };
                    row.push(convert_detailed(&mask, &p, &settings.pipeline, None)?.labels.count());
                }
                row.push(grid_search(&img.id, &mask, h, &grid, &settings.pipeline)?.achieved_count);
                Ok(row)
            })
            .collect()
    });
    let mut table = Vec::with_capacity(counts.len());
    for (img, r) in inputs.iter().zip(counts) {
        table.push(r.with_context(|| format!("failed on {}", img.path.display()))?);
    }

    let methods: Vec<Method> = FIXED.iter().copied().chain([Method::DyMorph]).collect();
    let class_of = |id: &str| refs[id].class.clone().unwrap_or_else(|| "all".into());
    let mut series = Vec::new();
    for (k, m) in methods.iter().enumerate() {
        let mut by_class: BTreeMap<String, CountSeries> = BTreeMap::new();
        for (img, row) in inputs.iter().zip(&table) {
            let class = class_of(&img.id);
            by_class
                .entry(class.clone())
                .or_insert_with(|| CountSeries::new(class))
                .push(img.id.clone(), row[k], refs[&img.id].count);
        }
        series.extend(by_class.into_values().map(|s| (m.to_string(), s)));
    }
    let report = evaluate_dataset(&series)?;
    write_json(&c.out.join("report.json"), &report)?;

    for (k, m) in methods.iter().enumerate() {
        let path = c.out.join(format!("pe_{m}.csv"));
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("cannot write {}", path.display()))?;
        for (img, row) in inputs.iter().zip(&table) {
            let reference = refs[&img.id].count;
            w.serialize(PeRow {
                image: &img.id,
                class: &class_of(&img.id),
                measured: row[k],
                reference,
                pe: pe(row[k], reference)?,
            })?;
        }
        w.flush()?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SpecFile {
    One(SceneSpec),
    Many(Vec<SceneSpec>),
}

#[derive(Serialize)]
struct SceneRecord {
    image: String,
    class: String,
    true_count: usize,
    spec: SceneSpec,
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let scenes: Vec<(String, String, SceneSpec, b2i::synthgen::Scene)> = if a.suite {
        benchmark_suite(a.seed)
            .into_iter()
            .map(|s| (s.id, s.class, s.spec, s.scene))
            .collect()
    } else {
        let path = a
            .spec
            .as_deref()
            .ok_or_else(|| anyhow!("synth needs --suite or --spec <file>"))?;
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let specs = match serde_json::from_str(&text).with_context(|| format!("bad scene spec {}", path.display()))? {
            SpecFile::One(s) => vec![s],
            SpecFile::Many(v) => v,
        };
        specs
            .into_iter()
            .enumerate()
            .map(|(i, spec)| {
                let scene = generate(&spec).with_context(|| format!("scene {i} of {}", path.display()))?;
                let class = serde_json::to_value(spec.regime)?
                    .as_str()
                    .unwrap_or_default()
                    .to_string();
                Ok((format!("scene_{i:03}"), class, spec, scene))
            })
            .collect::<Result<_>>()?
    };
    let masks = a.out.join("masks");
    let truth = a.out.join("truth");
    create_dir(&masks)?;
    create_dir(&truth)?;
    let mut refs = Vec::with_capacity(scenes.len());
    let mut records = Vec::with_capacity(scenes.len());
    for (id, class, spec, scene) in scenes {
        save_mask(&scene.mask, masks.join(format!("{id}.png")))?;
        save_labelmap(&scene.truth, truth.join(format!("{id}.png")))?;
        refs.push(ReferenceCount {
            image: id.clone(),
            count: scene.true_count,
            class: Some(class.clone()),
        });
        records.push(SceneRecord {
            image: id,
            class,
            true_count: scene.true_count,
            spec,
        });
    }
    write_reference_counts(a.out.join("refs.csv"), &refs)?;
    write_json(&a.out.join("scenes.json"), &records)
}
