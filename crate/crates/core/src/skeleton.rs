//! Zhang–Suen thinning and skeleton-guided splitting of elongated regions.

use crate::grow;
use crate::morphops::{connected_components, Connectivity};
use crate::raster::{relabel, LabelMap, Mask};

/// One-pixel-wide medial approximation of a mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skeleton {
    pixels: Mask,
}

impl Skeleton {
    pub fn as_mask(&self) -> &Mask {
        &self.pixels
    }

    pub fn into_mask(self) -> Mask {
        self.pixels
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.count() == 0
    }

    /// Skeletal pixel coordinates in scan order.
    pub fn points(&self) -> Vec<(usize, usize)> {
        let w = self.pixels.width();
        (0..self.pixels.len())
            .filter(|&i| self.pixels.at(i))
            .map(|i| (i % w, i / w))
            .collect()
    }
}

// Neighbors P2..P9, clockwise from north.
const RING: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

fn ring(m: &Mask, x: usize, y: usize) -> [bool; 8] {
    let mut p = [false; 8];
    for (k, &(dx, dy)) in RING.iter().enumerate() {
        p[k] = m.get_signed(x as i64 + dx, y as i64 + dy);
    }
    p
}

/// Number of background-to-foreground transitions around the 8-ring.
pub fn crossing_number(m: &Mask, x: usize, y: usize) -> usize {
    let p = ring(m, x, y);
    (0..8).filter(|&k| !p[k] && p[(k + 1) % 8]).count()
}

fn neighbor_count(m: &Mask, x: usize, y: usize) -> usize {
    ring(m, x, y).iter().filter(|&&v| v).count()
}

/// Zhang–Suen two-subiteration thinning, run until a full pass deletes nothing.
pub fn thin(mask: &Mask) -> Skeleton {
    let mut m = mask.clone();
    let (w, h) = (m.width(), m.height());
    let mut doomed = Vec::new();
    loop {
        let mut changed = false;
        for step in 0..2 {
            doomed.clear();
            for y in 0..h {
                for x in 0..w {
                    if !m.get(x, y) {
                        continue;
                    }
                    let p = ring(&m, x, y);
                    let b = p.iter().filter(|&&v| v).count();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    let a = (0..8).filter(|&k| !p[k] && p[(k + 1) % 8]).count();
                    if a != 1 {
                        continue;
                    }
                    let (n, e, s, wst) = (p[0], p[2], p[4], p[6]);
                    let keep = if step == 0 {
                        (n && e && s) || (e && s && wst)
                    } else {
                        (n && e && wst) || (n && s && wst)
                    };
                    if !keep {
                        doomed.push((x, y));
                    }
                }
            }
            for &(x, y) in &doomed {
                m.set(x, y, false);
            }
            changed |= !doomed.is_empty();
        }
        if !changed {
            break;
        }
    }
    Skeleton { pixels: m }
}

/// Removes end branches shorter than `prune_len` that terminate at a junction.
fn prune_spurs(skel: &mut Mask, prune_len: usize) {
    if prune_len == 0 {
        return;
    }
    let (w, h) = (skel.width(), skel.height());
    let endpoints: Vec<(usize, usize)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| skel.get(x, y) && neighbor_count(skel, x, y) == 1)
        .collect();
    let snapshot = skel.clone();
    for (ex, ey) in endpoints {
        let mut path = vec![(ex, ey)];
        let mut reached_junction = false;
        loop {
            let &(cx, cy) = path.last().expect("non-empty path");
            // prefer 4-neighbors so staircases are walked pixel by pixel
            let mut next = None;
            for &(dx, dy) in RING.iter().step_by(2).chain(RING.iter().skip(1).step_by(2)) {
                let (nx, ny) = (cx as i64 + dx, cy as i64 + dy);
                if !snapshot.get_signed(nx, ny) {
                    continue;
                }
                let n = (nx as usize, ny as usize);
                if path.contains(&n) {
                    continue;
                }
                next = Some(n);
                break;
            }
            match next {
                None => break,
                Some((nx, ny)) if crossing_number(&snapshot, nx, ny) >= 3 => {
                    reached_junction = true;
                    break;
                }
                Some(n) => {
                    path.push(n);
                    if path.len() >= prune_len {
                        break;
                    }
                }
            }
        }
        if reached_junction && path.len() < prune_len {
            for (x, y) in path {
                skel.set(x, y, false);
            }
        }
    }
}

/// Splits a mask at skeleton junctions.
///
/// The skeleton is pruned of spurs shorter than `prune_len`, junctions
/// (crossing number >= 3) are cut out together with their 3x3 neighborhood,
/// and every remaining skeleton segment seeds one instance. Foreground
/// pixels join the geodesically nearest segment under the 3-4 chamfer
/// metric; components left without a segment become one instance each.
pub fn skeleton_split(mask: &Mask, prune_len: usize) -> LabelMap {
    let (w, h) = (mask.width(), mask.height());
    let mut skel = thin(mask).into_mask();
    prune_spurs(&mut skel, prune_len);

    let junctions: Vec<(usize, usize)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| skel.get(x, y) && crossing_number(&skel, x, y) >= 3)
        .collect();
    for (x, y) in junctions {
        for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if skel.get_signed(nx, ny) {
                    skel.set(nx as usize, ny as usize, false);
                }
            }
        }
    }

    let mut labels = connected_components(&skel, Connectivity::Eight).into_vec();
    grow::chamfer_assign(mask, &mut labels);
    assign_orphans(mask, &mut labels);
    relabel(&LabelMap::from_vec(w, h, labels).expect("same dimensions"))
}

/// Gives each still-unlabeled foreground component a fresh label.
pub(crate) fn assign_orphans(mask: &Mask, labels: &mut [u32]) {
    let orphans = Mask::from_vec(
        mask.width(),
        mask.height(),
        labels
            .iter()
            .zip(mask.data())
            .map(|(&l, &f)| f && l == 0)
            .collect(),
    )
    .expect("same dimensions");
    if orphans.count() == 0 {
        return;
    }
    let base = labels.iter().copied().max().unwrap_or(0);
    let cc = connected_components(&orphans, Connectivity::Eight);
    for (i, &c) in cc.data().iter().enumerate() {
        if c != 0 {
            labels[i] = base + c;
        }
    }
}
