//! Split lines from convexity defects: proposal, skeleton alignment, length
//! bisection and carving.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::contours::{Contour, DefectSet};
use crate::grow::{self, N8};
use crate::morphops::{connected_components, Connectivity};
use crate::raster::{relabel, LabelMap, Mask};
use crate::skeleton::{assign_orphans, Skeleton};

pub type Point = (f64, f64);

fn dist(a: Point, b: Point) -> f64 {
    (b.0 - a.0).hypot(b.1 - a.1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitLine {
    pub p0: Point,
    pub p1: Point,
    pub length: f64,
    /// The line was moved onto the skeleton.
    pub aligned: bool,
    /// The line passed the length constraint.
    pub accepted: bool,
}

impl SplitLine {
    pub fn new(p0: Point, p1: Point) -> Self {
        Self {
            p0,
            p1,
            length: dist(p0, p1),
            aligned: false,
            accepted: false,
        }
    }

    pub fn midpoint(&self) -> Point {
        ((self.p0.0 + self.p1.0) / 2.0, (self.p0.1 + self.p1.1) / 2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LengthBounds {
    pub min_len: f64,
    pub max_len: f64,
}

impl LengthBounds {
    pub fn admits(&self, len: f64) -> bool {
        self.min_len <= len && len <= self.max_len
    }
}

/// Cumulative polygon length at every contour vertex, plus the closed perimeter.
fn arc_lengths(c: &Contour) -> (Vec<f64>, f64) {
    let n = c.points.len();
    let mut acc = Vec::with_capacity(n);
    let mut s = 0.0;
    for k in 0..n {
        acc.push(s);
        let (a, b) = (c.points[k], c.points[(k + 1) % n]);
        s += ((b.0 - a.0) as f64).hypot((b.1 - a.1) as f64);
    }
    (acc, s)
}

/// Pairs defects into candidate cuts.
///
/// Defects are ranked by depth (ties by contour position). The deepest
/// unpaired defect is joined to the partner whose chord is shortest relative
/// to the shorter contour arc between them, so that the first line on a
/// two-defect neck joins the two deepest defects and further lines on
/// multi-lobe regions cut across necks rather than along one side.
/// `max_lines` caps the number of lines per region.
pub fn propose_lines(c: &Contour, defects: &DefectSet, max_lines: Option<usize>) -> Vec<SplitLine> {
    if defects.len() < 2 {
        return Vec::new();
    }
    let mut ranked: Vec<usize> = (0..defects.len()).collect();
    ranked.sort_by(|&a, &b| {
        defects[b]
            .depth
            .total_cmp(&defects[a].depth)
            .then(defects[a].contour_index.cmp(&defects[b].contour_index))
    });
    let (acc, perimeter) = arc_lengths(c);
    let arc = |i: usize, j: usize| {
        let d = (acc[i] - acc[j]).abs();
        d.min(perimeter - d)
    };
    let to_f = |p: (i32, i32)| (p.0 as f64, p.1 as f64);
    let limit = max_lines.unwrap_or(usize::MAX);
    let mut lines = Vec::new();
    let mut free = ranked;
    while free.len() >= 2 && lines.len() < limit {
        let anchor = free.remove(0);
        let a = &defects[anchor];
        let (pos, _) = free
            .iter()
            .enumerate()
            .map(|(pos, &k)| {
                let b = &defects[k];
                let chord = dist(to_f(a.point), to_f(b.point));
                let along = arc(a.contour_index, b.contour_index);
                let ratio = if along > 0.0 { chord / along } else { f64::INFINITY };
                (pos, ratio)
            })
            .fold((0usize, f64::INFINITY), |best, cur| {
                if cur.1 < best.1 {
                    cur
                } else {
                    best
                }
            });
        let partner = free.remove(pos);
        lines.push(SplitLine::new(
            to_f(a.point),
            to_f(defects[partner].point),
        ));
    }
    lines
}

fn round_px(p: Point) -> (i64, i64) {
    (p.0.round() as i64, p.1.round() as i64)
}

/// How far a line is from the skeleton.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Deviation {
    /// Distance from the line midpoint to the nearest skeletal pixel.
    #[default]
    Midpoint,
    /// Mean distance to the skeleton over points sampled every pixel along the line.
    Mean,
}

fn nearest_point(points: &[Point], q: Point) -> Option<(Point, f64)> {
    points.iter().fold(None, |best: Option<(Point, f64)>, &p| {
        let d = dist(p, q);
        match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((p, d)),
        }
    })
}

/// Moves a line onto the skeleton when its midpoint is more than `tau` away
/// from the nearest skeletal pixel, then stretches both ends along the line
/// direction to the last foreground pixel of `region`.
pub fn align_to_skeleton(line: &SplitLine, skel: &Skeleton, tau: f64, region: &Mask) -> SplitLine {
    align_to_skeleton_by(line, skel, tau, region, Deviation::Midpoint)
}

/// [`align_to_skeleton`] with a choice of deviation measure. The translation
/// always brings the midpoint onto its nearest skeletal pixel.
pub fn align_to_skeleton_by(
    line: &SplitLine,
    skel: &Skeleton,
    tau: f64,
    region: &Mask,
    measure: Deviation,
) -> SplitLine {
    let m = line.midpoint();
    let points: Vec<Point> = skel
        .points()
        .into_iter()
        .map(|(x, y)| (x as f64, y as f64))
        .collect();
    let Some((s, to_mid)) = nearest_point(&points, m) else {
        return SplitLine {
            aligned: false,
            ..*line
        };
    };
    let deviation = match measure {
        Deviation::Midpoint => to_mid,
        Deviation::Mean => {
            let n = line.length.ceil().max(1.0) as usize;
            let total: f64 = (0..=n)
                .map(|k| {
                    let t = k as f64 / n as f64;
                    let q = (
                        line.p0.0 + t * (line.p1.0 - line.p0.0),
                        line.p0.1 + t * (line.p1.1 - line.p0.1),
                    );
                    nearest_point(&points, q).map_or(0.0, |(_, d)| d)
                })
                .sum();
            total / (n + 1) as f64
        }
    };
    if deviation <= tau || line.length == 0.0 {
        return SplitLine {
            aligned: false,
            ..*line
        };
    }
    let u = (
        (line.p1.0 - line.p0.0) / line.length,
        (line.p1.1 - line.p0.1) / line.length,
    );
    let reach = |sign: f64| -> Point {
        let mut last = s;
        let mut t = 0.5;
        loop {
            let q = (s.0 + sign * t * u.0, s.1 + sign * t * u.1);
            let (qx, qy) = round_px(q);
            if !region.get_signed(qx, qy) {
                return last;
            }
            last = (qx as f64, qy as f64);
            t += 0.5;
        }
    };
    let p0 = reach(-1.0);
    let p1 = reach(1.0);
    SplitLine {
        aligned: true,
        ..SplitLine::new(p0, p1)
    }
}

/// Bresenham pixels of a line, thickened by one pixel perpendicular to its
/// dominant direction and extended by one pixel past each end.
pub fn rasterize_line(line: &SplitLine) -> Vec<(i64, i64)> {
    let (mut x0, mut y0) = round_px(line.p0);
    let (mut x1, mut y1) = round_px(line.p1);
    let (dxf, dyf) = ((x1 - x0) as f64, (y1 - y0) as f64);
    let len = dxf.hypot(dyf);
    if len > 0.0 {
        let (ux, uy) = (dxf / len, dyf / len);
        x0 = (x0 as f64 - ux).round() as i64;
        y0 = (y0 as f64 - uy).round() as i64;
        x1 = (x1 as f64 + ux).round() as i64;
        y1 = (y1 as f64 + uy).round() as i64;
    }
    let x_dominant = (x1 - x0).abs() >= (y1 - y0).abs();
    let mut out = Vec::new();
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        out.push((x, y));
        out.push(if x_dominant { (x, y + 1) } else { (x + 1, y) });
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}

/// Carves `lines` into an existing partition.
///
/// Carved pixels are removed, each base instance is re-split into its
/// 8-connected pieces, and the carved pixels are handed back to the nearest
/// piece of the same base instance. The foreground is unchanged.
pub fn carve_partition(base: &LabelMap, lines: &[SplitLine]) -> LabelMap {
    let (w, h) = (base.width(), base.height());
    let mut carved = vec![false; w * h];
    let mut any = false;
    for line in lines {
        for (x, y) in rasterize_line(line) {
            if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
                let i = y as usize * w + x as usize;
                if base.at(i) != 0 {
                    carved[i] = true;
                    any = true;
                }
            }
        }
    }
    if !any {
        return relabel(base);
    }

    let mut labels = vec![0u32; w * h];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for s in 0..w * h {
        if base.at(s) == 0 || carved[s] || labels[s] != 0 {
            continue;
        }
        next += 1;
        labels[s] = next;
        queue.push_back(s);
        while let Some(p) = queue.pop_front() {
            for q in grow::neighbors8(p, w, h) {
                if labels[q] == 0 && !carved[q] && base.at(q) == base.at(p) {
                    labels[q] = next;
                    queue.push_back(q);
                }
            }
        }
    }
    restore_within(base, &mut labels);
    let fg = base.foreground();
    assign_orphans(&fg, &mut labels);
    relabel(&LabelMap::from_vec(w, h, labels).expect("same dimensions"))
}

// Layered geodesic growth that never crosses base instance boundaries.
fn restore_within(base: &LabelMap, labels: &mut [u32]) {
    let (w, h) = (base.width() as i64, base.height() as i64);
    let mut frontier: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] != 0).collect();
    let mut queued = vec![false; labels.len()];
    while !frontier.is_empty() {
        let mut candidates = Vec::new();
        for &p in &frontier {
            let (x, y) = ((p as i64) % w, (p as i64) / w);
            for &(dx, dy) in &N8 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let q = (ny * w + nx) as usize;
                if labels[q] == 0 && !queued[q] && base.at(q) != 0 && base.at(q) == base.at(p) {
                    queued[q] = true;
                    candidates.push(q);
                }
            }
        }
        let assigned: Vec<(usize, u32)> = candidates
            .iter()
            .map(|&q| {
                let (x, y) = ((q as i64) % w, (q as i64) / w);
                let l = N8
                    .iter()
                    .filter_map(|&(dx, dy)| {
                        let (nx, ny) = (x + dx, y + dy);
                        (nx >= 0 && ny >= 0 && nx < w && ny < h)
                            .then(|| (ny * w + nx) as usize)
                    })
                    .filter(|&n| labels[n] != 0 && base.at(n) == base.at(q))
                    .map(|n| labels[n])
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

/// Carves lines into a binary mask; see [`carve_partition`].
pub fn carve_lines(mask: &Mask, lines: &[SplitLine]) -> LabelMap {
    carve_partition(&connected_components(mask, Connectivity::Eight), lines)
}

/// Outcome of the max-length bisection.
#[derive(Clone, Debug)]
pub struct LengthFit {
    pub bounds: LengthBounds,
    pub labels: LabelMap,
    /// Lines with `accepted` set according to the chosen bounds.
    pub lines: Vec<SplitLine>,
}

impl LengthFit {
    pub fn accepted(&self) -> usize {
        self.lines.iter().filter(|l| l.accepted).count()
    }
}

const MAX_BISECTIONS: usize = 24;

/// Bisects the upper length bound so the carved instance count approaches
/// `target_count`; see [`fit_length_bounds_on`].
pub fn fit_length_bounds(
    lines: &[SplitLine],
    region: &Mask,
    target_count: usize,
    min_len: f64,
) -> LengthFit {
    let base = connected_components(region, Connectivity::Eight);
    fit_length_bounds_on(&base, lines, target_count, min_len, f64::INFINITY)
}

/// Bisection over `max_len` in `[min_len, min(max_cap, image diagonal)]`.
///
/// Each step carves the lines whose length lies in `[min_len, mid]` and
/// counts instances: too few raises the lower end, too many lowers the upper
/// end. Stops on an exact count, after the interval shrinks below one pixel,
/// or after 24 steps. The carving closest to the target wins, ties going to
/// fewer accepted lines.
pub fn fit_length_bounds_on(
    base: &LabelMap,
    lines: &[SplitLine],
    target_count: usize,
    min_len: f64,
    max_cap: f64,
) -> LengthFit {
    let diag = (base.width() as f64).hypot(base.height() as f64);
    let mut lo = min_len;
    let mut hi = diag.min(max_cap).max(min_len);

    // the accepted set only depends on how many lengths fall under `mid`
    let mut eligible: Vec<(f64, usize)> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| l.length >= min_len)
        .map(|(i, l)| (l.length, i))
        .collect();
    eligible.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut cache: HashMap<usize, LabelMap> = HashMap::new();
    let mut carve_prefix = |k: usize| -> LabelMap {
        cache
            .entry(k)
            .or_insert_with(|| {
                let chosen: Vec<SplitLine> = eligible[..k].iter().map(|&(_, i)| lines[i]).collect();
                carve_partition(base, &chosen)
            })
            .clone()
    };
    let prefix_len = |max_len: f64| eligible.iter().take_while(|(l, _)| *l <= max_len).count();

    let mut best: Option<(usize, usize, f64, LabelMap)> = None;
    for _ in 0..MAX_BISECTIONS {
        let mid = (lo + hi) / 2.0;
        let k = prefix_len(mid);
        let labels = carve_prefix(k);
        let count = labels.count();
        let err = count.abs_diff(target_count);
        let better = match &best {
            None => true,
            Some((be, bk, _, _)) => (err, k) < (*be, *bk),
        };
        if better {
            best = Some((err, k, mid, labels));
        }
        if count == target_count {
            break;
        }
        if count < target_count {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1.0 {
            break;
        }
    }
    let (_, _, max_len, labels) = best.expect("at least one bisection step");
    let bounds = LengthBounds { min_len, max_len };
    let lines = lines
        .iter()
        .map(|l| SplitLine {
            accepted: bounds.admits(l.length),
            ..*l
        })
        .collect();
    LengthFit {
        bounds,
        labels,
        lines,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contours::{convex_hull, convexity_defects, trace_contours};
    use crate::skeleton::thin;

    pub(crate) fn dumbbell(r: f64, centers: f64) -> Mask {
        let w = (2.0 * r + centers + 8.0) as usize;
        let h = (2.0 * r + 8.0) as usize;
        let cy = h as f64 / 2.0;
        let c0 = r + 4.0;
        let c1 = c0 + centers;
        Mask::from_fn(w, h, |x, y| {
            let (x, y) = (x as f64, y as f64);
            (x - c0).powi(2) + (y - cy).powi(2) <= r * r
                || (x - c1).powi(2) + (y - cy).powi(2) <= r * r
        })
    }

    // three fused discs; the larger middle one reaches the hull on both sides
    fn triple_chain() -> Mask {
        Mask::from_fn(70, 32, |x, y| {
            let (x, y) = (x as f64, y as f64);
            [(14.0, 10.0), (33.0, 11.0), (52.0, 10.0)]
                .iter()
                .any(|&(cx, r)| (x - cx).powi(2) + (y - 16.0).powi(2) <= r * r)
        })
    }

    fn neck_lines(m: &Mask) -> Vec<SplitLine> {
        let c = &trace_contours(m)[0];
        let h = convex_hull(c);
        let d = convexity_defects(c, &h, 1.0);
        propose_lines(c, &d, None)
    }

    #[test]
    fn length_matches_endpoints() {
        let l = SplitLine::new((1.0, 2.0), (4.0, 6.0));
        assert_eq!(l.length, 5.0);
        assert_eq!(l.midpoint(), (2.5, 4.0));
    }

    #[test]
    fn convex_region_proposes_nothing() {
        let disc = Mask::from_fn(30, 30, |x, y| {
            (x as f64 - 15.0).powi(2) + (y as f64 - 15.0).powi(2) <= 100.0
        });
        assert!(neck_lines(&disc).is_empty());
    }

    #[test]
    fn dumbbell_proposes_one_vertical_neck_line() {
        let m = dumbbell(10.0, 18.0);
        let lines = neck_lines(&m);
        assert_eq!(lines.len(), 1);
        let l = lines[0];
        let neck_x = 14.0 + 9.0;
        assert!((l.p0.0 - neck_x).abs() <= 1.5 && (l.p1.0 - neck_x).abs() <= 1.5, "{l:?}");
        assert!((l.p0.1 - l.p1.1).abs() >= 6.0);
    }

    #[test]
    fn triple_chain_proposes_two_neck_lines() {
        let m = triple_chain();
        let lines = neck_lines(&m);
        assert_eq!(lines.len(), 2);
        for l in &lines {
            // each cut crosses the chain instead of running along it
            assert!((l.p0.0 - l.p1.0).abs() <= 2.0, "{l:?}");
        }
        assert_eq!(carve_lines(&m, &lines).count(), 3);
    }

    #[test]
    fn max_lines_caps_pairs() {
        let m = triple_chain();
        let c = &trace_contours(&m)[0];
        let d = convexity_defects(c, &convex_hull(c), 1.0);
        assert_eq!(propose_lines(c, &d, Some(1)).len(), 1);
    }

    #[test]
    fn align_leaves_centered_line() {
        let region = Mask::from_fn(30, 11, |_, y| (2..9).contains(&y));
        let skel = thin(&region);
        let line = SplitLine::new((15.0, 2.0), (15.0, 8.0));
        let out = align_to_skeleton(&line, &skel, 5.0, &region);
        assert_eq!(out, line);
        assert!(!out.aligned);
    }

    #[test]
    fn align_translates_onto_skeleton() {
        // one skeletal pixel at (20, 10); the line midpoint sits 8 px above it
        let region = Mask::from_fn(40, 30, |x, _| (12..29).contains(&x));
        let mut sk = Mask::new(40, 30);
        sk.set(20, 10, true);
        let skel = thin(&sk);
        let line = SplitLine::new((16.0, 2.0), (24.0, 2.0));
        let out = align_to_skeleton(&line, &skel, 5.0, &region);
        assert!(out.aligned);
        // re-clipped horizontally through (20, 10) to the region edges
        assert_eq!(out.p0, (12.0, 10.0));
        assert_eq!(out.p1, (28.0, 10.0));
        assert_eq!(out.midpoint(), (20.0, 10.0));
        assert!((out.length - 16.0).abs() < 1e-12);
    }

    #[test]
    fn align_with_empty_skeleton_is_noop() {
        let region = Mask::from_fn(10, 10, |_, _| true);
        let skel = thin(&Mask::new(10, 10));
        let line = SplitLine::new((1.0, 1.0), (8.0, 8.0));
        let out = align_to_skeleton(&line, &skel, 1.0, &region);
        assert_eq!(out, line);
    }

    #[test]
    fn carve_nothing_is_components() {
        let m = dumbbell(8.0, 20.0);
        assert_eq!(carve_lines(&m, &[]), connected_components(&m, Connectivity::Eight));
    }

    #[test]
    fn carve_over_background_is_noop() {
        let m = Mask::from_fn(20, 20, |x, y| x < 8 && y < 8);
        let l = SplitLine::new((12.0, 2.0), (12.0, 18.0));
        assert_eq!(carve_lines(&m, &[l]), connected_components(&m, Connectivity::Eight));
    }

    #[test]
    fn carve_dumbbell_neck() {
        let m = dumbbell(10.0, 18.0);
        let lines = neck_lines(&m);
        let out = carve_lines(&m, &lines);
        assert_eq!(out.count(), 2);
        assert_eq!(out.foreground(), m);
    }

    #[test]
    fn diagonal_cut_does_not_leak() {
        let m = Mask::from_fn(30, 30, |x, y| (2..28).contains(&x) && (2..28).contains(&y));
        let l = SplitLine::new((2.0, 2.0), (27.0, 27.0));
        let out = carve_lines(&m, &[l]);
        assert_eq!(out.count(), 2);
        let l = SplitLine::new((2.0, 9.0), (27.0, 20.0));
        assert_eq!(carve_lines(&m, &[l]).count(), 2);
    }

    #[test]
    fn bisection_rejects_all_when_target_met() {
        let m = dumbbell(10.0, 18.0);
        let lines = neck_lines(&m);
        let fit = fit_length_bounds(&lines, &m, 1, 0.0);
        assert_eq!(fit.labels.count(), 1);
        assert!(lines.iter().all(|l| l.length > fit.bounds.max_len));
        assert_eq!(fit.accepted(), 0);
    }

    #[test]
    fn bisection_accepts_neck_for_target_two() {
        let m = dumbbell(10.0, 18.0);
        let lines = neck_lines(&m);
        let fit = fit_length_bounds(&lines, &m, 2, 0.0);
        assert_eq!(fit.labels.count(), 2);
        assert!(fit.bounds.max_len >= lines[0].length);
        assert_eq!(fit.accepted(), 1);
    }

    #[test]
    fn bisection_best_effort_when_unreachable() {
        let m = dumbbell(10.0, 18.0);
        let lines = neck_lines(&m);
        let fit = fit_length_bounds(&lines, &m, 5, 0.0);
        assert_eq!(fit.labels.count(), 2);
        assert_eq!(fit.bounds.min_len, 0.0);
    }
}
