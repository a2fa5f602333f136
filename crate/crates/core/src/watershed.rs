//! Marker-based watershed on the chamfer distance map.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grow::neighbors8;
use crate::morphops::{connected_components, distance_transform, Connectivity, DistanceMap};
use crate::raster::{relabel, LabelMap, Mask};
use crate::skeleton::assign_orphans;

/// What the foreground threshold is relative to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdScope {
    /// The image-wide distance maximum.
    Global,
    /// Each connected component's own distance maximum.
    #[default]
    Component,
}

/// Seed raster: 0 unassigned, k >= 1 seed of instance k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkerMap {
    labels: LabelMap,
}

impl MarkerMap {
    pub fn labels(&self) -> &LabelMap {
        &self.labels
    }

    pub fn count(&self) -> usize {
        self.labels.count()
    }
}

fn check_ratio(fg_thresh: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&fg_thresh) {
        return Err(Error::InvalidParameter(format!(
            "fg_thresh must lie in [0, 1], got {fg_thresh}"
        )));
    }
    Ok(())
}

/// Thresholds the distance map at `fg_thresh` times the relevant maximum and
/// labels the surviving pixels by 8-connectivity.
pub fn compute_markers(
    dist: &DistanceMap,
    fg_thresh: f64,
    scope: ThresholdScope,
) -> Result<MarkerMap> {
    check_ratio(fg_thresh)?;
    let (w, h) = (dist.width(), dist.height());
    let fg = Mask::from_vec(w, h, dist.data().iter().map(|&d| d > 0.0).collect())?;
    let comps = connected_components(&fg, Connectivity::Eight);
    let peak: Vec<f64> = match scope {
        ThresholdScope::Global => vec![dist.max(); comps.count() + 1],
        ThresholdScope::Component => {
            let mut peak = vec![0.0f64; comps.count() + 1];
            for (&c, &d) in comps.data().iter().zip(dist.data()) {
                peak[c as usize] = peak[c as usize].max(d);
            }
            peak
        }
    };
    let seeds = Mask::from_vec(
        w,
        h,
        comps
            .data()
            .iter()
            .zip(dist.data())
            .map(|(&c, &d)| c != 0 && d >= fg_thresh * peak[c as usize])
            .collect(),
    )?;
    Ok(MarkerMap {
        labels: connected_components(&seeds, Connectivity::Eight),
    })
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Entry {
    // max-heap on distance, then FIFO on sequence
    key: u64,
    seq: std::cmp::Reverse<u64>,
    idx: usize,
    label: u32,
}

/// Priority flood from the markers, deepest basins first.
///
/// Each popped pixel takes the label of the neighbor that queued it. Equal
/// priorities pop in queue order. Foreground components holding no marker
/// get one fresh label each.
pub fn watershed_flood(mask: &Mask, dist: &DistanceMap, markers: &MarkerMap) -> Result<LabelMap> {
    let (w, h) = (mask.width(), mask.height());
    let ml = markers.labels();
    if dist.width() != w || dist.height() != h || ml.width() != w || ml.height() != h {
        return Err(Error::Dimensions(format!(
            "mask {w}x{h}, distance {}x{}, markers {}x{}",
            dist.width(),
            dist.height(),
            ml.width(),
            ml.height()
        )));
    }
    let mut labels: Vec<u32> = ml
        .data()
        .iter()
        .zip(mask.data())
        .map(|(&l, &f)| if f { l } else { 0 })
        .collect();
    // chamfer distances are multiples of 1/3 or 1/5; the scaled key keeps their order
    let key = |i: usize| (dist.data()[i] * 1.0e6).round() as u64;
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for p in 0..labels.len() {
        if labels[p] == 0 {
            continue;
        }
        for q in neighbors8(p, w, h) {
            if labels[q] == 0 && mask.at(q) {
                heap.push(Entry {
                    key: key(q),
                    seq: std::cmp::Reverse(seq),
                    idx: q,
                    label: labels[p],
                });
                seq += 1;
            }
        }
    }
    while let Some(Entry { idx, label, .. }) = heap.pop() {
        if labels[idx] != 0 {
            continue;
        }
        labels[idx] = label;
        for q in neighbors8(idx, w, h) {
            if labels[q] == 0 && mask.at(q) {
                heap.push(Entry {
                    key: key(q),
                    seq: std::cmp::Reverse(seq),
                    idx: q,
                    label,
                });
                seq += 1;
            }
        }
    }
    assign_orphans(mask, &mut labels);
    LabelMap::from_vec(w, h, labels)
}

/// Distance transform, markers, flood, relabel.
pub fn watershed_split(
    mask: &Mask,
    dist_kernel: u8,
    fg_thresh: f64,
    scope: ThresholdScope,
) -> Result<LabelMap> {
    let dist = distance_transform(mask, dist_kernel)?;
    let markers = compute_markers(&dist, fg_thresh, scope)?;
    Ok(relabel(&watershed_flood(mask, &dist, &markers)?))
}
