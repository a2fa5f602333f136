//! Input discovery, configuration loading and output writers.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use b2i::rng::SplitMix64;
use b2i::tuner::{default_grid, grid_from, GridEntry};
use b2i::{LabelMap, PipelineConfig};
use serde::{Deserialize, Serialize};

/// A mask file and the id it is known by (the file stem).
#[derive(Clone, Debug)]
pub struct InputImage {
    pub id: String,
    pub path: PathBuf,
}

/// The given file, or every `.png` directly inside the given directory,
/// sorted by name.
pub fn discover(input: &Path) -> Result<Vec<InputImage>> {
    let meta = fs::metadata(input).with_context(|| format!("cannot read {}", input.display()))?;
    let mut paths = if meta.is_dir() {
        let mut v = Vec::new();
        for entry in fs::read_dir(input).with_context(|| format!("cannot list {}", input.display()))? {
            let p = entry?.path();
            if p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
                v.push(p);
            }
        }
        v
    } else {
        vec![input.to_path_buf()]
    };
    paths.sort();
    if paths.is_empty() {
        bail!("no PNG masks found in {}", input.display());
    }
    let mut out: Vec<InputImage> = Vec::with_capacity(paths.len());
    for path in paths {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .with_context(|| format!("{} has no file name", path.display()))?;
        if out.iter().any(|i| i.id == id) {
            bail!("two inputs share the id {id:?}");
        }
        out.push(InputImage { id, path });
    }
    Ok(out)
}

/// Extra grid axes for `tune` and `eval`, read from the `tune` key of the
/// config file.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TuneAxes {
    #[serde(default)]
    pub min_area: Vec<f64>,
    #[serde(default)]
    pub inter_collect: Vec<bool>,
}

pub struct Settings {
    pub pipeline: PipelineConfig,
    pub axes: Option<TuneAxes>,
    /// The config file was given.
    pub explicit: bool,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self {
                pipeline: PipelineConfig::default(),
                axes: None,
                explicit: false,
            });
        };
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("config {} is not valid JSON", path.display()))?;
        let axes = match value.as_object_mut().and_then(|o| o.remove("tune")) {
            Some(v) => Some(serde_json::from_value(v).with_context(|| format!("bad tune section in {}", path.display()))?),
            None => None,
        };
        let pipeline: PipelineConfig =
            serde_json::from_value(value).with_context(|| format!("bad config {}", path.display()))?;
        pipeline
            .validate()
            .with_context(|| format!("bad config {}", path.display()))?;
        Ok(Self {
            pipeline,
            axes,
            explicit: true,
        })
    }

    /// The default grid without a config file; otherwise every mix_params
    /// entry crossed with the tune axes (falling back to the config's own
    /// min_area and inter_collect).
    pub fn grid(&self) -> Vec<GridEntry> {
        if !self.explicit {
            return default_grid();
        }
        let axes = self.axes.clone().unwrap_or_default();
        let areas = if axes.min_area.is_empty() {
            vec![self.pipeline.min_area]
        } else {
            axes.min_area
        };
        let collect = if axes.inter_collect.is_empty() {
            vec![self.pipeline.inter_collect]
        } else {
            axes.inter_collect
        };
        grid_from(&self.pipeline.mix_params, &areas, &collect)
    }
}

pub fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Random bright color per label from a seeded stream; background stays black.
pub fn write_overlay(labels: &LabelMap, seed: u64, path: &Path) -> Result<()> {
    let mut rng = SplitMix64::new(seed);
    let palette: Vec<[u8; 3]> = (0..=labels.max_label())
        .map(|l| {
            let v = rng.next_u64();
            if l == 0 {
                [0, 0, 0]
            } else {
                [64 + (v % 192) as u8, 64 + ((v >> 8) % 192) as u8, 64 + ((v >> 16) % 192) as u8]
            }
        })
        .collect();
    let raw: Vec<u8> = labels.data().iter().flat_map(|&l| palette[l as usize]).collect();
    let img = image::RgbImage::from_raw(labels.width() as u32, labels.height() as u32, raw)
        .context("overlay buffer size")?;
    img.save_with_format(path, image::ImageFormat::Png)
        .with_context(|| format!("cannot write {}", path.display()))
}

pub fn millis(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}
