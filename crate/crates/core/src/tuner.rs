//! Per-image grid search over conversion settings, scored by how close the
//! instance count comes to a reference count.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{finish, run_method_detailed, Conversion, Method, MixParams, PipelineConfig};
use crate::raster::{LabelMap, Mask};

/// One candidate setting: the method tuple plus the two post-processing knobs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub params: MixParams,
    pub min_area: f64,
    pub inter_collect: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub image: String,
    pub chosen: GridEntry,
    /// Position of `chosen` in the grid.
    pub grid_index: usize,
    pub achieved_count: usize,
    pub reference_count: usize,
    pub objective: usize,
    pub carved_lines: usize,
    pub candidates_evaluated: usize,
    #[serde(skip)]
    pub labels: LabelMap,
}

/// The 288-entry default grid: method in {watershed, dymorph}, dist_kernel
/// in {3, 5}, fg_thresh in {0.3, 0.4, 0.5, 0.6}, min_len in {0, 5, 10},
/// min_area in {0, 30, 100}, inter_collect in {false, true}; max_len 4096.
pub fn default_grid() -> Vec<GridEntry> {
    let mut grid = Vec::with_capacity(288);
    for method in [Method::Watershed, Method::DyMorph] {
        for dist_kernel in [3u8, 5] {
            for fg_thresh in [0.3, 0.4, 0.5, 0.6] {
                for min_len in [0.0, 5.0, 10.0] {
                    for min_area in [0.0, 30.0, 100.0] {
                        for inter_collect in [false, true] {
                            grid.push(GridEntry {
                                params: MixParams {
                                    method,
                                    dist_kernel,
                                    fg_thresh,
                                    min_len,
                                    max_len: 4096.0,
                                },
                                min_area,
                                inter_collect,
                            });
                        }
                    }
                }
            }
        }
    }
    grid
}

/// Cartesian product of method tuples with post-processing settings, in
/// that nesting order.
pub fn grid_from(params: &[MixParams], min_areas: &[f64], inter_collect: &[bool]) -> Vec<GridEntry> {
    let mut grid = Vec::new();
    for &p in params {
        for &min_area in min_areas {
            for &ic in inter_collect {
                grid.push(GridEntry {
                    params: p,
                    min_area,
                    inter_collect: ic,
                });
            }
        }
    }
    grid
}

// Parameters a method ignores are normalized away so equal runs are shared.
fn run_key(p: &MixParams) -> (Method, u8, u64, u64, u64) {
    let (k, t, lo, hi) = match p.method {
        Method::FindContour | Method::Skeleton => (0, 0.0, 0.0, 0.0),
        Method::Morphology => (p.dist_kernel, 0.0, 0.0, 0.0),
        Method::Watershed | Method::Combination => (p.dist_kernel, p.fg_thresh, 0.0, 0.0),
        Method::DyMorph => (p.dist_kernel, p.fg_thresh, p.min_len, p.max_len),
    };
    (p.method, k, t.to_bits(), lo.to_bits(), hi.to_bits())
}

/// Converts `mask` under every grid entry and keeps the entry whose count is
/// closest to `reference_count`.
///
/// Ties go to fewer carved lines, then to the earlier grid entry, so the
/// choice does not depend on evaluation order. `dymorph` entries receive
/// `reference_count` as their target.
pub fn grid_search(
    image: &str,
    mask: &Mask,
    reference_count: usize,
    grid: &[GridEntry],
    cfg: &PipelineConfig,
) -> Result<TuneResult> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut runs: BTreeMap<_, usize> = BTreeMap::new();
    let mut unique: Vec<MixParams> = Vec::new();
    let slot: Vec<usize> = grid
        .iter()
        .map(|e| {
            *runs.entry(run_key(&e.params)).or_insert_with(|| {
                unique.push(e.params);
                unique.len() - 1
            })
        })
        .collect();
    let raw: Vec<Conversion> = unique
        .par_iter()
        .map(|p| run_method_detailed(mask, p, cfg, Some(reference_count)))
        .collect::<Result<_>>()?;
    let scored: Vec<(usize, usize, Conversion)> = grid
        .par_iter()
        .zip(slot.par_iter())
        .map(|(e, &s)| {
            let out = finish(mask, raw[s].clone(), e.min_area, e.inter_collect);
            (out.labels.count().abs_diff(reference_count), out.carved_lines, out)
        })
        .collect();
    let (index, (objective, carved_lines, out)) = scored
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| (a.0, a.1, i).cmp(&(b.0, b.1, j)))
        .expect("grid is not empty");
    Ok(TuneResult {
        image: image.to_string(),
        chosen: grid[index],
        grid_index: index,
        achieved_count: out.labels.count(),
        reference_count,
        objective,
        carved_lines,
        candidates_evaluated: grid.len(),
        labels: out.labels,
    })
}

/// Outcome for one image of a batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum TuneOutcome {
    Ok(TuneResult),
    Failed { image: String, error: String },
}

/// A named mask with its reference count.
#[derive(Clone, Debug)]
pub struct TuneInput {
    pub image: String,
    pub mask: Mask,
    pub reference_count: usize,
}

/// Independent [`grid_search`] per image; a failing image is recorded and
/// the rest of the batch proceeds. Results keep input order.
pub fn tune_dataset(images: &[TuneInput], grid: &[GridEntry], cfg: &PipelineConfig) -> Vec<TuneOutcome> {
    images
        .par_iter()
        .map(|i| match grid_search(&i.image, &i.mask, i.reference_count, grid, cfg) {
            Ok(r) => TuneOutcome::Ok(r),
            Err(e) => TuneOutcome::Failed {
                image: i.image.clone(),
                error: e.to_string(),
            },
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneSummary {
    pub images: usize,
    pub failed: usize,
    pub mean_objective: f64,
    pub exact: usize,
    /// How often each method was chosen.
    pub chosen_methods: BTreeMap<String, usize>,
}

pub fn summarize(outcomes: &[TuneOutcome]) -> TuneSummary {
    let ok: Vec<&TuneResult> = outcomes
        .iter()
        .filter_map(|o| match o {
            TuneOutcome::Ok(r) => Some(r),
            TuneOutcome::Failed { .. } => None,
        })
        .collect();
    let mut chosen_methods = BTreeMap::new();
    for r in &ok {
        *chosen_methods.entry(r.chosen.params.method.to_string()).or_insert(0) += 1;
    }
    TuneSummary {
        images: outcomes.len(),
        failed: outcomes.len() - ok.len(),
        mean_objective: if ok.is_empty() {
            0.0
        } else {
            ok.iter().map(|r| r.objective as f64).sum::<f64>() / ok.len() as f64
        },
        exact: ok.iter().filter(|r| r.objective == 0).count(),
        chosen_methods,
    }
}

/// One row of a reference-count table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceCount {
    pub image: String,
    pub count: usize,
    #[serde(default)]
    pub class: Option<String>,
}

/// Reads a `image,count[,class]` CSV with a header row.
pub fn read_reference_counts(path: impl AsRef<Path>) -> Result<Vec<ReferenceCount>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for row in reader.deserialize() {
        let row: ReferenceCount = row.map_err(|e| csv_error(path, e))?;
        if !seen.insert(row.image.clone()) {
            return Err(Error::References(format!(
                "{}: image {:?} listed twice",
                path.display(),
                row.image
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Writes the table read by [`read_reference_counts`].
pub fn write_reference_counts(path: impl AsRef<Path>, rows: &[ReferenceCount]) -> Result<()> {
    let path = path.as_ref();
    let with_class = rows.iter().any(|r| r.class.is_some());
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut write = |rec: Vec<String>| w.write_record(rec).map_err(|e| csv_error(path, e));
    if with_class {
        write(vec!["image".into(), "count".into(), "class".into()])?;
    } else {
        write(vec!["image".into(), "count".into()])?;
    }
    for r in rows {
        let mut rec = vec![r.image.clone(), r.count.to_string()];
        if with_class {
            rec.push(r.class.clone().unwrap_or_default());
        }
        write(rec)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            _ => unreachable!("checked io error"),
        }
    } else {
        Error::References(format!("{}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dumbbell() -> Mask {
        Mask::from_fn(46, 28, |x, y| {
            let (x, y) = (x as f64, y as f64);
            let a = (x - 14.0).powi(2) + (y - 14.0).powi(2) <= 100.0;
            let b = (x - 32.0).powi(2) + (y - 14.0).powi(2) <= 100.0;
            a || b
        })
    }

    fn entry(method: Method, fg_thresh: f64) -> GridEntry {
        GridEntry {
            params: MixParams {
                method,
                fg_thresh,
                ..MixParams::default()
            },
            min_area: 0.0,
            inter_collect: false,
        }
    }

    #[test]
    fn default_grid_has_288_entries() {
        assert_eq!(default_grid().len(), 288);
    }

    #[test]
    fn empty_grid_is_an_error() {
        let r = grid_search("x", &dumbbell(), 2, &[], &PipelineConfig::default());
        assert!(matches!(r, Err(Error::EmptyGrid)));
    }

    #[test]
    fn disc_any_grid_hits_reference() {
        let m = Mask::from_fn(30, 30, |x, y| {
            (x as f64 - 15.0).powi(2) + (y as f64 - 15.0).powi(2) <= 81.0
        });
        let r = grid_search("d", &m, 1, &default_grid(), &PipelineConfig::default()).unwrap();
        assert_eq!(r.objective, 0);
        assert_eq!(r.grid_index, 0);
    }

    #[test]
    fn dumbbell_picks_dymorph_over_findcontour() {
        let grid = [entry(Method::FindContour, 0.3), entry(Method::DyMorph, 0.3)];
        let r = grid_search("d", &dumbbell(), 2, &grid, &PipelineConfig::default()).unwrap();
        assert_eq!(r.chosen.params.method, Method::DyMorph);
        assert_eq!(r.objective, 0);
        assert_eq!(r.carved_lines, 1);
        assert_eq!(r.objective, r.achieved_count.abs_diff(r.reference_count));
    }

    #[test]
    fn ties_prefer_fewer_lines_then_grid_order() {
        // watershed at 0.5 already gives 2, dymorph at 0.3 needs a cut
        let grid = [entry(Method::DyMorph, 0.3), entry(Method::Watershed, 0.5), entry(Method::DyMorph, 0.5)];
        let r = grid_search("d", &dumbbell(), 2, &grid, &PipelineConfig::default()).unwrap();
        assert_eq!(r.grid_index, 1);
    }

    #[test]
    fn empty_image_reference_zero() {
        let r = grid_search("e", &Mask::new(20, 20), 0, &default_grid(), &PipelineConfig::default()).unwrap();
        assert_eq!((r.achieved_count, r.objective), (0, 0));
    }

    #[test]
    fn batch_records_failures_and_keeps_order() {
        let bad_grid = [GridEntry {
            params: MixParams {
                dist_kernel: 7,
                ..MixParams::default()
            },
            min_area: 0.0,
            inter_collect: false,
        }];
        let inputs = vec![TuneInput {
            image: "a".into(),
            mask: dumbbell(),
            reference_count: 2,
        }];
        let out = tune_dataset(&inputs, &bad_grid, &PipelineConfig::default());
        assert!(matches!(&out[0], TuneOutcome::Failed { image, .. } if image == "a"));
        let out = tune_dataset(&inputs, &default_grid(), &PipelineConfig::default());
        assert_eq!(out.len(), 1);
        let s = summarize(&out);
        assert_eq!((s.images, s.failed, s.exact), (1, 0, 1));
    }

    #[test]
    fn reference_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("refs.csv");
        let rows = vec![
            ReferenceCount { image: "a".into(), count: 3, class: Some("cap".into()) },
            ReferenceCount { image: "b".into(), count: 0, class: Some("dt".into()) },
        ];
        write_reference_counts(&p, &rows).unwrap();
        assert_eq!(read_reference_counts(&p).unwrap(), rows);
        std::fs::write(&p, "image,count\na,1\nb,2\n").unwrap();
        let plain = read_reference_counts(&p).unwrap();
        assert_eq!(plain[1].count, 2);
        assert_eq!(plain[1].class, None);
        std::fs::write(&p, "image,count\na,1\na,2\n").unwrap();
        assert!(read_reference_counts(&p).is_err());
        std::fs::write(&p, "image,count\na,many\n").unwrap();
        assert!(matches!(read_reference_counts(&p), Err(Error::References(_))));
        assert!(matches!(read_reference_counts(dir.path().join("none.csv")), Err(Error::Io { .. })));
    }
}
