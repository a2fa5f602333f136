//! One full binary-to-instance conversion: a splitting method, then the
//! small-instance filter, then optional hole collection.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::contours::{convex_hull, convexity_defects, trace_contours, ContourKind};
use crate::error::{Error, Result};
use crate::grow::neighbors8;
use crate::morphops::{connected_components, morph_split, Connectivity, StructuringElement};
use crate::raster::{relabel, LabelMap, Mask};
use crate::skeleton::{skeleton_split, thin};
use crate::splitter::{
    align_to_skeleton_by, carve_partition, fit_length_bounds_on, propose_lines, Deviation,
    SplitLine,
};
use crate::watershed::{watershed_split, ThresholdScope};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// One instance per connected component.
    FindContour,
    Watershed,
    Skeleton,
    Morphology,
    /// Every cut of watershed, raw defect lines and skeleton splitting, unrefined.
    Combination,
    /// Watershed refined by aligned, length-fitted defect cuts.
    DyMorph,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::FindContour,
        Method::Watershed,
        Method::Skeleton,
        Method::Morphology,
        Method::Combination,
        Method::DyMorph,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::FindContour => "findcontour",
            Method::Watershed => "watershed",
            Method::Skeleton => "skeleton",
            Method::Morphology => "morphology",
            Method::Combination => "combination",
            Method::DyMorph => "dymorph",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

/// The five-element hyperparameter tuple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixParams {
    pub method: Method,
    /// Chamfer kernel (3 or 5); also the structuring element size for `morphology`.
    pub dist_kernel: u8,
    pub fg_thresh: f64,
    pub min_len: f64,
    /// Upper end of the split-line length search.
    pub max_len: f64,
}

impl Default for MixParams {
    fn default() -> Self {
        Self {
            method: Method::DyMorph,
            dist_kernel: 3,
            fg_thresh: 0.5,
            min_len: 0.0,
            max_len: 4096.0,
        }
    }
}

impl MixParams {
    pub fn validate(&self) -> Result<()> {
        if self.dist_kernel != 3 && self.dist_kernel != 5 {
            return Err(Error::InvalidParameter(format!(
                "dist_kernel must be 3 or 5, got {}",
                self.dist_kernel
            )));
        }
        if !(0.0..=1.0).contains(&self.fg_thresh) {
            return Err(Error::InvalidParameter(format!(
                "fg_thresh must lie in [0, 1], got {}",
                self.fg_thresh
            )));
        }
        if !(self.min_len >= 0.0 && self.min_len <= self.max_len) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= min_len <= max_len, got {} and {}",
                self.min_len, self.max_len
            )));
        }
        Ok(())
    }
}

fn default_mix() -> Vec<MixParams> {
    vec![MixParams::default()]
}

fn default_prune() -> usize {
    5
}

fn default_tau() -> f64 {
    5.0
}

fn default_depth() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_mix")]
    pub mix_params: Vec<MixParams>,
    /// Instances smaller than this many pixels are merged or dropped.
    #[serde(default)]
    pub min_area: f64,
    /// Turn enclosed holes into instances of their own.
    #[serde(default)]
    pub inter_collect: bool,
    /// Connectivity of the `findcontour` baseline.
    #[serde(default)]
    pub connectivity: Connectivity,
    #[serde(default = "default_prune")]
    pub prune_len: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_depth")]
    pub min_defect_depth: f64,
    #[serde(default)]
    pub threshold_scope: ThresholdScope,
    #[serde(default)]
    pub max_lines_per_region: Option<usize>,
    #[serde(default)]
    pub align_metric: Deviation,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mix_params: default_mix(),
            min_area: 0.0,
            inter_collect: false,
            connectivity: Connectivity::Eight,
            prune_len: default_prune(),
            tau: default_tau(),
            min_defect_depth: default_depth(),
            threshold_scope: ThresholdScope::Component,
            max_lines_per_region: None,
            align_metric: Deviation::Midpoint,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mix_params.is_empty() {
            return Err(Error::InvalidParameter("mix_params is empty".into()));
        }
        for p in &self.mix_params {
            p.validate()?;
        }
        if !(self.min_area >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "min_area must be non-negative, got {}",
                self.min_area
            )));
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if !(self.min_defect_depth >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "min_defect_depth must be non-negative, got {}",
                self.min_defect_depth
            )));
        }
        Ok(())
    }
}

/// A label map with the number of split lines that were carved into it.
#[derive(Clone, Debug, PartialEq)]
pub struct Conversion {
    pub labels: LabelMap,
    pub carved_lines: usize,
}

/// Axis-aligned box of one instance, inclusive.
#[derive(Clone, Copy)]
struct Bbox {
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
}

fn bboxes(labels: &LabelMap) -> Vec<Option<Bbox>> {
    let w = labels.width();
    let mut out: Vec<Option<Bbox>> = vec![None; labels.max_label() as usize + 1];
    for (i, &l) in labels.data().iter().enumerate() {
        if l == 0 {
            continue;
        }
        let (x, y) = (i % w, i / w);
        let b = out[l as usize].get_or_insert(Bbox { x0: x, y0: y, x1: x, y1: y });
        b.x0 = b.x0.min(x);
        b.x1 = b.x1.max(x);
        b.y0 = b.y0.min(y);
        b.y1 = b.y1.max(y);
    }
    out
}

/// One instance cut out with a one-pixel background margin; `origin` maps
/// crop coordinates back to the image.
struct Crop {
    mask: Mask,
    origin: (i64, i64),
}

fn crop(labels: &LabelMap, label: u32, b: Bbox) -> Crop {
    let origin = (b.x0 as i64 - 1, b.y0 as i64 - 1);
    let (cw, ch) = (b.x1 - b.x0 + 3, b.y1 - b.y0 + 3);
    let (w, h) = (labels.width() as i64, labels.height() as i64);
    let mask = Mask::from_fn(cw, ch, |x, y| {
        let (ix, iy) = (x as i64 + origin.0, y as i64 + origin.1);
        ix >= 0 && iy >= 0 && ix < w && iy < h && labels.get(ix as usize, iy as usize) == label
    });
    Crop { mask, origin }
}

/// Defect-pair split lines for every instance, in image coordinates.
fn instance_lines(labels: &LabelMap, cfg: &PipelineConfig, align: bool) -> Vec<SplitLine> {
    let mut out = Vec::new();
    for (label, b) in bboxes(labels).into_iter().enumerate() {
        let Some(b) = b else { continue };
        let c = crop(labels, label as u32, b);
        let mut lines = Vec::new();
        for contour in trace_contours(&c.mask) {
            if contour.kind != ContourKind::Outer {
                continue;
            }
            let hull = convex_hull(&contour);
            let defects = convexity_defects(&contour, &hull, cfg.min_defect_depth);
            lines.extend(propose_lines(&contour, &defects, cfg.max_lines_per_region));
        }
        if lines.is_empty() {
            continue;
        }
        if align {
            let skel = thin(&c.mask);
            for l in &mut lines {
                *l = align_to_skeleton_by(l, &skel, cfg.tau, &c.mask, cfg.align_metric);
            }
        }
        let (ox, oy) = (c.origin.0 as f64, c.origin.1 as f64);
        out.extend(lines.into_iter().map(|l| SplitLine {
            aligned: l.aligned,
            ..SplitLine::new((l.p0.0 + ox, l.p0.1 + oy), (l.p1.0 + ox, l.p1.1 + oy))
        }));
    }
    out
}

/// Overlays partitions of the same foreground: two pixels stay together only
/// if every partition agrees, and each agreeing 8-connected piece becomes an
/// instance.
fn intersect_partitions(parts: &[&LabelMap]) -> LabelMap {
    let (w, h) = (parts[0].width(), parts[0].height());
    let same = |p: usize, q: usize| parts.iter().all(|l| l.at(p) == l.at(q));
    let mut out = vec![0u32; w * h];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for s in 0..w * h {
        if parts[0].at(s) == 0 || out[s] != 0 {
            continue;
        }
        next += 1;
        out[s] = next;
        queue.push_back(s);
        while let Some(p) = queue.pop_front() {
            for q in neighbors8(p, w, h) {
                if out[q] == 0 && parts[0].at(q) != 0 && same(p, q) {
                    out[q] = next;
                    queue.push_back(q);
                }
            }
        }
    }
    LabelMap::from_vec(w, h, out).expect("same dimensions")
}

/// Runs one splitting method; see [`run_method_detailed`].
pub fn run_method(
    mask: &Mask,
    p: &MixParams,
    cfg: &PipelineConfig,
    target_count: Option<usize>,
) -> Result<LabelMap> {
    Ok(run_method_detailed(mask, p, cfg, target_count)?.labels)
}

/// Runs one splitting method and reports how many lines it carved.
///
/// `dymorph` fits the split-line length range so the instance count
/// approaches `target_count`; without one, the watershed instance count is
/// the target.
pub fn run_method_detailed(
    mask: &Mask,
    p: &MixParams,
    cfg: &PipelineConfig,
    target_count: Option<usize>,
) -> Result<Conversion> {
    p.validate()?;
    let plain = |labels| Conversion {
        labels,
        carved_lines: 0,
    };
    Ok(match p.method {
        Method::FindContour => plain(connected_components(mask, cfg.connectivity)),
        Method::Watershed => plain(watershed_split(
            mask,
            p.dist_kernel,
            p.fg_thresh,
            cfg.threshold_scope,
        )?),
        Method::Skeleton => plain(skeleton_split(mask, cfg.prune_len)),
        Method::Morphology => plain(morph_split(
            mask,
            StructuringElement::square(p.dist_kernel as usize)?,
        )),
        Method::Combination => {
            let ws = watershed_split(mask, p.dist_kernel, p.fg_thresh, cfg.threshold_scope)?;
            let lines = instance_lines(&ws, cfg, false);
            let cut = carve_partition(&ws, &lines);
            let skel = skeleton_split(mask, 0);
            Conversion {
                labels: intersect_partitions(&[&cut, &skel]),
                carved_lines: lines.len(),
            }
        }
        Method::DyMorph => {
            let ws = watershed_split(mask, p.dist_kernel, p.fg_thresh, cfg.threshold_scope)?;
            let lines = instance_lines(&ws, cfg, true);
            if lines.is_empty() {
                return Ok(plain(ws));
            }
            let target = target_count.unwrap_or_else(|| ws.count());
            let fit = fit_length_bounds_on(&ws, &lines, target, p.min_len, p.max_len);
            Conversion {
                carved_lines: fit.accepted(),
                labels: fit.labels,
            }
        }
    })
}

/// Merges instances smaller than `min_area` into their largest 8-adjacent
/// neighbor, or drops them to background when they touch no other instance.
///
/// Small instances are visited in label order; a merge adds the area and the
/// adjacency of the absorbed instance to its host.
pub fn filter_min_area(labels: &LabelMap, min_area: f64) -> LabelMap {
    let mut area: Vec<usize> = labels.areas();
    let small = |a: usize| (a as f64) < min_area;
    if !area.iter().skip(1).any(|&a| a > 0 && small(a)) {
        return relabel(labels);
    }
    let (w, h) = (labels.width(), labels.height());
    let mut adjacent: HashMap<u32, BTreeSet<u32>> = HashMap::new();
    for (p, &a) in labels.data().iter().enumerate() {
        if a == 0 {
            continue;
        }
        for q in neighbors8(p, w, h) {
            let b = labels.at(q);
            if b != 0 && b != a {
                adjacent.entry(a).or_default().insert(b);
            }
        }
    }
    let mut parent: Vec<u32> = (0..area.len() as u32).collect();
    fn root(parent: &[u32], mut l: u32) -> u32 {
        while parent[l as usize] != l {
            l = parent[l as usize];
        }
        l
    }
    for l in 1..area.len() as u32 {
        if area[l as usize] == 0 || !small(area[l as usize]) || parent[l as usize] != l {
            continue;
        }
        let neighbors: BTreeSet<u32> = adjacent
            .get(&l)
            .map(|s| s.iter().map(|&b| root(&parent, b)).filter(|&b| b != l && b != 0).collect())
            .unwrap_or_default();
        let host = neighbors
            .iter()
            .copied()
            .max_by(|&a, &b| area[a as usize].cmp(&area[b as usize]).then(b.cmp(&a)));
        match host {
            Some(hst) => {
                parent[l as usize] = hst;
                area[hst as usize] += area[l as usize];
                let moved = adjacent.remove(&l).unwrap_or_default();
                adjacent.entry(hst).or_default().extend(moved);
            }
            None => parent[l as usize] = 0,
        }
    }
    let data = labels.data().iter().map(|&l| root(&parent, l)).collect();
    relabel(&LabelMap::from_vec(w, h, data).expect("same dimensions"))
}

/// Adds every hole of at least `min_area` pixels that is enclosed by a
/// single instance as a new instance.
///
/// A hole is a 4-connected background component that does not touch the
/// image border.
pub fn collect_inner(mask: &Mask, labels: &LabelMap, min_area: f64) -> LabelMap {
    let (w, h) = (mask.width(), mask.height());
    let mut out = labels.data().to_vec();
    let mut seen = vec![false; w * h];
    let mut next = labels.max_label();
    let mut queue = VecDeque::new();
    for s in 0..w * h {
        if mask.at(s) || seen[s] {
            continue;
        }
        seen[s] = true;
        queue.push_back(s);
        let mut hole = Vec::new();
        let mut border = false;
        let mut hosts = BTreeSet::new();
        while let Some(p) = queue.pop_front() {
            hole.push(p);
            let (x, y) = (p % w, p / w);
            if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                border = true;
            }
            let four = [
                (x > 0).then(|| p - 1),
                (x + 1 < w).then(|| p + 1),
                (y > 0).then(|| p - w),
                (y + 1 < h).then(|| p + w),
            ];
            for q in four.into_iter().flatten() {
                if mask.at(q) {
                    hosts.insert(labels.at(q));
                } else if !seen[q] {
                    seen[q] = true;
                    queue.push_back(q);
                }
            }
        }
        if border || hosts.len() != 1 || hosts.contains(&0) || (hole.len() as f64) < min_area {
            continue;
        }
        next += 1;
        for p in hole {
            out[p] = next;
        }
    }
    relabel(&LabelMap::from_vec(w, h, out).expect("same dimensions"))
}

/// Full conversion; see [`convert_detailed`].
pub fn convert(
    mask: &Mask,
    p: &MixParams,
    cfg: &PipelineConfig,
    target_count: Option<usize>,
) -> Result<LabelMap> {
    Ok(convert_detailed(mask, p, cfg, target_count)?.labels)
}

/// Method, then [`filter_min_area`], then [`collect_inner`] when
/// `cfg.inter_collect` is set.
pub fn convert_detailed(
    mask: &Mask,
    p: &MixParams,
    cfg: &PipelineConfig,
    target_count: Option<usize>,
) -> Result<Conversion> {
    let raw = run_method_detailed(mask, p, cfg, target_count)?;
    Ok(finish(mask, raw, cfg.min_area, cfg.inter_collect))
}

/// The post-processing half of [`convert_detailed`].
pub(crate) fn finish(mask: &Mask, raw: Conversion, min_area: f64, inter_collect: bool) -> Conversion {
    let mut labels = filter_min_area(&raw.labels, min_area);
    if inter_collect {
        labels = collect_inner(mask, &labels, min_area);
    }
    Conversion {
        labels,
        carved_lines: raw.carved_lines,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dumbbell() -> Mask {
        // two radius-10 discs 18 px apart, joined by a neck of half-width ~4
        Mask::from_fn(46, 28, |x, y| {
            let (x, y) = (x as f64, y as f64);
            let a = (x - 14.0).powi(2) + (y - 14.0).powi(2) <= 100.0;
            let b = (x - 32.0).powi(2) + (y - 14.0).powi(2) <= 100.0;
            a || b
        })
    }

    fn disc() -> Mask {
        Mask::from_fn(30, 30, |x, y| {
            (x as f64 - 15.0).powi(2) + (y as f64 - 15.0).powi(2) <= 81.0
        })
    }

    fn annulus(outer: f64, inner: f64) -> Mask {
        Mask::from_fn(40, 40, |x, y| {
            let d2 = (x as f64 - 20.0).powi(2) + (y as f64 - 20.0).powi(2);
            d2 <= outer * outer && d2 > inner * inner
        })
    }

    fn params(method: Method) -> MixParams {
        MixParams {
            method,
            ..MixParams::default()
        }
    }

    #[test]
    fn config_parses_with_defaults() {
        let cfg: PipelineConfig = serde_json::from_str(
            r#"{"mix_params":[{"method":"watershed","dist_kernel":5,"fg_thresh":0.4,"min_len":0,"max_len":100}],"connectivity":4}"#,
        )
        .unwrap();
        assert_eq!(cfg.mix_params[0].method, Method::Watershed);
        assert_eq!(cfg.connectivity, Connectivity::Four);
        assert_eq!(cfg.prune_len, 5);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"mix_params":[{"method":"magic","dist_kernel":3,"fg_thresh":0.5,"min_len":0,"max_len":1}]}"#).is_err());
    }

    #[test]
    fn invalid_params_are_rejected() {
        let cfg = PipelineConfig::default();
        let bad = MixParams {
            dist_kernel: 4,
            ..MixParams::default()
        };
        assert!(run_method(&disc(), &bad, &cfg, None).is_err());
        let bad = MixParams {
            min_len: 10.0,
            max_len: 5.0,
            ..MixParams::default()
        };
        assert!(bad.validate().is_err());
        assert!(PipelineConfig {
            mix_params: vec![],
            ..cfg
        }
        .validate()
        .is_err());
    }

    #[test]
    fn disc_is_one_instance_for_every_method() {
        let cfg = PipelineConfig::default();
        for m in Method::ALL {
            for t in [None, Some(1)] {
                let out = convert(&disc(), &params(m), &cfg, t).unwrap();
                assert_eq!(out.count(), 1, "{m}");
                assert_eq!(out.foreground(), disc(), "{m}");
            }
        }
    }

    #[test]
    fn dumbbell_dymorph_versus_findcontour() {
        let cfg = PipelineConfig::default();
        let m = dumbbell();
        assert_eq!(convert(&m, &params(Method::FindContour), &cfg, None).unwrap().count(), 1);
        // a threshold high enough to leave a single marker, so the cut must come from the neck line
        let p = MixParams {
            fg_thresh: 0.3,
            ..params(Method::DyMorph)
        };
        assert_eq!(run_method(&m, &params(Method::Watershed), &cfg, None).unwrap().count(), 2);
        let ws = run_method(&m, &MixParams { method: Method::Watershed, ..p }, &cfg, None).unwrap();
        assert_eq!(ws.count(), 1);
        let out = convert_detailed(&m, &p, &PipelineConfig { min_area: 1.0, ..cfg }, Some(2)).unwrap();
        assert_eq!(out.labels.count(), 2);
        assert_eq!(out.carved_lines, 1);
        assert_eq!(out.labels.foreground(), m);
    }

    #[test]
    fn empty_mask_converts_to_empty_map() {
        let cfg = PipelineConfig::default();
        for m in Method::ALL {
            let out = convert(&Mask::new(12, 9), &params(m), &cfg, Some(0)).unwrap();
            assert_eq!(out.count(), 0);
        }
    }

    #[test]
    fn min_area_zero_is_identity() {
        let l = LabelMap::from_vec(4, 1, vec![1, 0, 2, 2]).unwrap();
        assert_eq!(filter_min_area(&l, 0.0), l);
    }

    #[test]
    fn isolated_speck_is_removed() {
        let mut data = vec![0u32; 20 * 20];
        for i in [0, 1, 2] {
            data[i] = 1;
        }
        for y in 5..20 {
            for x in 5..20 {
                data[y * 20 + x] = 2;
            }
        }
        let out = filter_min_area(&LabelMap::from_vec(20, 20, data).unwrap(), 10.0);
        assert_eq!(out.count(), 1);
        assert_eq!(out.at(0), 0);
        assert_eq!(out.at(5 * 20 + 5), 1);
    }

    #[test]
    fn fragment_merges_into_large_neighbor() {
        // a 200-pixel block with a 5-pixel fragment along its edge
        let (w, h) = (25, 12);
        let mut data = vec![0u32; w * h];
        for y in 1..11 {
            for x in 1..21 {
                data[y * w + x] = 2;
            }
        }
        for x in 21..24 {
            data[5 * w + x] = 1;
        }
        data[6 * w + 21] = 1;
        data[6 * w + 22] = 1;
        let l = LabelMap::from_vec(w, h, data).unwrap();
        assert_eq!(l.areas()[1], 5);
        assert_eq!(l.areas()[2], 200);
        let out = filter_min_area(&l, 10.0);
        assert_eq!(out.count(), 1);
        assert_eq!(out.foreground(), l.foreground());
    }

    #[test]
    fn fragment_prefers_largest_neighbor() {
        let l = LabelMap::from_vec(
            6,
            3,
            vec![
                1, 1, 2, 3, 3, 3, //
                1, 1, 2, 3, 3, 3, //
                1, 1, 0, 3, 3, 3,
            ],
        )
        .unwrap();
        let out = filter_min_area(&l, 3.0);
        assert_eq!(out.count(), 2);
        assert_eq!(out.at(2), out.at(3));
    }

    #[test]
    fn annulus_hole_collection() {
        // hole radius 4 holds 49 pixels
        let m = annulus(9.0, 4.0);
        let hole = m.len() - annulus(40.0, 4.0).count();
        assert_eq!(hole, 49);
        let labels = connected_components(&m, Connectivity::Eight);
        assert_eq!(collect_inner(&m, &labels, 10.0).count(), 2);
        assert_eq!(collect_inner(&m, &labels, 100.0).count(), 1);
        assert_eq!(collect_inner(&disc(), &connected_components(&disc(), Connectivity::Eight), 0.0).count(), 1);
        let cfg = PipelineConfig {
            min_area: 10.0,
            inter_collect: true,
            ..PipelineConfig::default()
        };
        let out = convert(&m, &params(Method::FindContour), &cfg, None).unwrap();
        assert_eq!(out.count(), 2);
    }

    #[test]
    fn hole_shared_by_two_instances_stays_background() {
        let m = annulus(9.0, 4.0);
        let w = m.width();
        let data = m
            .data()
            .iter()
            .enumerate()
            .map(|(i, &f)| if !f { 0 } else if i % w < 20 { 1 } else { 2 })
            .collect();
        let labels = LabelMap::from_vec(w, m.height(), data).unwrap();
        assert_eq!(collect_inner(&m, &labels, 0.0).count(), 2);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert!("blob".parse::<Method>().is_err());
    }
}
