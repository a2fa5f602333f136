//! Seeded label propagation shared by the splitters.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::raster::Mask;

pub(crate) const N8: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[inline]
pub(crate) fn neighbors8(
    idx: usize,
    width: usize,
    height: usize,
) -> impl Iterator<Item = usize> {
    let x = (idx % width) as i64;
    let y = (idx / width) as i64;
    N8.iter().filter_map(move |&(dx, dy)| {
        let (nx, ny) = (x + dx, y + dy);
        (nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height)
            .then(|| ny as usize * width + nx as usize)
    })
}

/// Geodesic dilation of `labels` inside `allowed` with a 3x3 element,
/// iterated to stability. A pixel reached in a given round takes the
/// smallest label among its neighbors labeled in earlier rounds.
/// Unreachable pixels stay 0.
pub(crate) fn geodesic_grow(allowed: &Mask, labels: &mut [u32]) {
    let (w, h) = (allowed.width(), allowed.height());
    let mut frontier: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] != 0).collect();
    let mut queued = vec![false; labels.len()];
    while !frontier.is_empty() {
        let mut candidates = Vec::new();
        for &p in &frontier {
            for q in neighbors8(p, w, h) {
                if labels[q] == 0 && allowed.at(q) && !queued[q] {
                    queued[q] = true;
                    candidates.push(q);
                }
            }
        }
        let assigned: Vec<(usize, u32)> = candidates
            .iter()
            .map(|&q| {
                let l = neighbors8(q, w, h)
                    .map(|n| labels[n])
                    .filter(|&l| l != 0)
                    .min()
                    .expect("candidate has a labeled neighbor");
                (q, l)
            })
            .collect();
        for &(q, l) in &assigned {
            labels[q] = l;
        }
        frontier = candidates;
    }
}

/// Unconstrained nearest-label fill: every pixel in `targets` still at 0
/// takes the label of its nearest labeled pixel under the chessboard metric
/// (ties to the smallest label).
pub(crate) fn nearest_fill(targets: &Mask, labels: &mut [u32]) {
    if labels.iter().all(|&l| l == 0) {
        return;
    }
    let (w, h) = (targets.width(), targets.height());
    let everywhere = Mask::from_fn(w, h, |_, _| true);
    let mut spread = labels.to_vec();
    geodesic_grow(&everywhere, &mut spread);
    for (i, l) in labels.iter_mut().enumerate() {
        if *l == 0 && targets.at(i) {
            *l = spread[i];
        }
    }
}

/// Assigns every pixel of `allowed` to its nearest seed by geodesic chamfer
/// distance (weights 3 orthogonal, 4 diagonal). Ties go to the smaller label.
pub(crate) fn chamfer_assign(allowed: &Mask, labels: &mut [u32]) {
    let (w, h) = (allowed.width(), allowed.height());
    let mut dist = vec![u32::MAX; labels.len()];
    let mut heap = BinaryHeap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l != 0 {
            dist[i] = 0;
            heap.push(Reverse((0u32, l, i)));
        }
    }
    while let Some(Reverse((d, l, p))) = heap.pop() {
        if d > dist[p] || (d == dist[p] && labels[p] != l) {
            continue;
        }
        let (x, y) = ((p % w) as i64, (p / w) as i64);
        for &(dx, dy) in &N8 {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                continue;
            }
            let q = ny as usize * w + nx as usize;
            if !allowed.at(q) {
                continue;
            }
            let nd = d + if dx == 0 || dy == 0 { 3 } else { 4 };
            if nd < dist[q] || (nd == dist[q] && l < labels[q]) {
                dist[q] = nd;
                labels[q] = l;
                heap.push(Reverse((nd, l, q)));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geodesic_grow_respects_allowed_region() {
        let m = Mask::from_ascii(&["##.##", "#####", "##.##"]);
        let mut labels = vec![0u32; m.len()];
        labels[0] = 1;
        labels[4] = 2;
        geodesic_grow(&m, &mut labels);
        assert_eq!(labels[2], 0);
        assert!(labels.iter().zip(m.data()).all(|(&l, &f)| (l != 0) == f));
        // middle pixel is equidistant, smaller label wins
        assert_eq!(labels[7], 1);
    }

    #[test]
    fn chamfer_assign_splits_bar_halfway() {
        let m = Mask::from_ascii(&["#########"]);
        let mut labels = vec![0u32; m.len()];
        labels[0] = 2;
        labels[8] = 1;
        chamfer_assign(&m, &mut labels);
        assert_eq!(labels, vec![2, 2, 2, 2, 1, 1, 1, 1, 1]);
    }
}
