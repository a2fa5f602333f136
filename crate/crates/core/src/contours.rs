//! Border following with hole hierarchy, convex hulls and convexity defects.
//!
//! Contours are polygons through pixel centers. Outer borders wind
//! counterclockwise as seen on screen (y axis pointing down), which makes
//! their shoelace sum negative; hole borders wind the other way.

use crate::raster::Mask;

/// Pixel coordinate `(x, y)`.
pub type Pixel = (i32, i32);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContourKind {
    Outer,
    Inner,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Contour {
    pub points: Vec<Pixel>,
    pub kind: ContourKind,
    /// Index of the enclosing outer contour; set only for inner contours.
    pub parent: Option<usize>,
    pub area: f64,
}

/// Signed shoelace area; negative for screen-counterclockwise polygons.
pub fn signed_area(points: &[Pixel]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let mut s = 0i64;
    for (k, &(x0, y0)) in points.iter().enumerate() {
        let (x1, y1) = points[(k + 1) % points.len()];
        s += x0 as i64 * y1 as i64 - x1 as i64 * y0 as i64;
    }
    s as f64 / 2.0
}

pub fn contour_area(c: &Contour) -> f64 {
    signed_area(&c.points).abs()
}

// Clockwise on screen, starting east: (dx, dy).
const DIRS: [(i32, i32); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

fn dir_of(from: (i32, i32), to: (i32, i32)) -> usize {
    let d = (to.0 - from.0, to.1 - from.1);
    DIRS.iter().position(|&v| v == d).expect("adjacent pixels")
}

/// Suzuki–Abe border following: one outer contour per 8-connected
/// component and one inner contour per 4-connected hole.
pub fn trace_contours(mask: &Mask) -> Vec<Contour> {
    let (w, h) = (mask.width() as i32 + 2, mask.height() as i32 + 2);
    let mut f = vec![0i32; (w * h) as usize];
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) {
                f[((y as i32 + 1) * w + x as i32 + 1) as usize] = 1;
            }
        }
    }
    let at = |x: i32, y: i32| (y * w + x) as usize;

    // per border number: (is_hole, parent border number)
    let mut borders: Vec<(bool, usize)> = vec![(true, 0), (true, 0)];
    let mut raw: Vec<(usize, Vec<Pixel>)> = Vec::new();
    let mut nbd: i32 = 1;

    for y in 1..h - 1 {
        let mut lnbd: i32 = 1;
        for x in 1..w - 1 {
            let v = f[at(x, y)];
            if v == 0 {
                continue;
            }
            let start = if v == 1 && f[at(x - 1, y)] == 0 {
                Some((false, (x - 1, y)))
            } else if v >= 1 && f[at(x + 1, y)] == 0 {
                if v > 1 {
                    lnbd = v;
                }
                Some((true, (x + 1, y)))
            } else {
                None
            };
            if let Some((is_hole, from)) = start {
                nbd += 1;
                let (lnbd_hole, lnbd_parent) = borders[lnbd as usize];
                let parent = match (is_hole, lnbd_hole) {
                    (false, false) | (true, true) => lnbd_parent,
                    _ => lnbd as usize,
                };
                borders.push((is_hole, parent));
                let pts = follow(&mut f, w, (x, y), from, nbd);
                raw.push((nbd as usize, pts));
            }
            let v = f[at(x, y)];
            if v != 1 {
                lnbd = v.abs();
            }
        }
    }

    // border number -> output index of outer contours
    let mut index_of = vec![usize::MAX; borders.len()];
    for (k, (b, _)) in raw.iter().enumerate() {
        index_of[*b] = k;
    }
    raw.into_iter()
        .map(|(b, pts)| {
            let (is_hole, parent) = borders[b];
            let mut points: Vec<Pixel> = pts.into_iter().map(|(x, y)| (x - 1, y - 1)).collect();
            let sa = signed_area(&points);
            if (!is_hole && sa > 0.0) || (is_hole && sa < 0.0) {
                points[1..].reverse();
            }
            let area = signed_area(&points).abs();
            Contour {
                points,
                kind: if is_hole {
                    ContourKind::Inner
                } else {
                    ContourKind::Outer
                },
                parent: (is_hole && parent > 1).then(|| index_of[parent]),
                area,
            }
        })
        .collect()
}

fn follow(f: &mut [i32], w: i32, start: (i32, i32), from: (i32, i32), nbd: i32) -> Vec<Pixel> {
    let at = |p: (i32, i32)| (p.1 * w + p.0) as usize;
    let nb = |p: (i32, i32), d: usize| (p.0 + DIRS[d].0, p.1 + DIRS[d].1);

    // 3.1: clockwise search from `from` for a nonzero neighbor
    let d0 = dir_of(start, from);
    let first = (0..8)
        .map(|k| (d0 + k) % 8)
        .find(|&d| f[at(nb(start, d))] != 0);
    let Some(d1) = first else {
        f[at(start)] = -nbd;
        return vec![start];
    };
    let p1 = nb(start, d1);
    let mut p2 = p1;
    let mut p3 = start;
    let mut points = Vec::new();
    loop {
        points.push(p3);
        // 3.3: counterclockwise search starting after p2
        let d2 = dir_of(p3, p2);
        let mut east_zero = false;
        let mut p4 = p3;
        for k in 1..=8 {
            let d = (d2 + 8 - k) % 8;
            let q = nb(p3, d);
            if f[at(q)] != 0 {
                p4 = q;
                break;
            }
            if d == 0 {
                east_zero = true;
            }
        }
        // 3.4
        if east_zero {
            f[at(p3)] = -nbd;
        } else if f[at(p3)] == 1 {
            f[at(p3)] = nbd;
        }
        // 3.5
        if p4 == start && p3 == p1 {
            break;
        }
        p2 = p3;
        p3 = p4;
    }
    points
}

/// Hull vertex indices into `c.points` (monotone chain, collinear points
/// dropped), wound like the contour and starting at the smallest index.
pub fn convex_hull(c: &Contour) -> Vec<usize> {
    let pts = &c.points;
    if pts.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by_key(|&i| (pts[i], i));
    order.dedup_by_key(|i| pts[*i]);
    if order.len() <= 2 {
        let mut v = order;
        v.sort_unstable();
        return v;
    }
    let cross = |o: Pixel, a: Pixel, b: Pixel| {
        (a.0 - o.0) as i64 * (b.1 - o.1) as i64 - (a.1 - o.1) as i64 * (b.0 - o.0) as i64
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * order.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(order.iter())
        } else {
            Box::new(order.iter().rev())
        };
        for &i in iter {
            while hull.len() >= start + 2
                && cross(pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]], pts[i]) <= 0
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    if hull.len() == 2 && pts[hull[0]] == pts[hull[1]] {
        hull.pop();
    }
    // monotone chain yields a positive shoelace sum; match the contour
    if signed_area(&c.points) <= 0.0 {
        hull.reverse();
    }
    let min_pos = hull
        .iter()
        .enumerate()
        .min_by_key(|&(_, &i)| i)
        .map(|(k, _)| k)
        .unwrap_or(0);
    hull.rotate_left(min_pos);
    hull
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Defect {
    pub point: Pixel,
    /// Index of `point` in the contour.
    pub contour_index: usize,
    pub depth: f64,
    /// Hull vertices (contour indices) bounding the arc.
    pub hull_edge: (usize, usize),
}

pub type DefectSet = Vec<Defect>;

/// Perpendicular distance from `p` to the line through `a` and `b`.
pub fn line_distance(p: Pixel, a: Pixel, b: Pixel) -> f64 {
    let (dx, dy) = ((b.0 - a.0) as f64, (b.1 - a.1) as f64);
    let len = dx.hypot(dy);
    if len == 0.0 {
        return ((p.0 - a.0) as f64).hypot((p.1 - a.1) as f64);
    }
    (dx * (p.1 - a.1) as f64 - dy * (p.0 - a.0) as f64).abs() / len
}

/// For each hull edge, the deepest contour point strictly between its
/// endpoints along the contour; defects shallower than `min_depth` are dropped.
pub fn convexity_defects(c: &Contour, hull: &[usize], min_depth: f64) -> DefectSet {
    let n = c.points.len();
    if hull.len() < 2 || n < 3 {
        return Vec::new();
    }
    let mut sorted = hull.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::new();
    for k in 0..sorted.len() {
        let (a, b) = (sorted[k], sorted[(k + 1) % sorted.len()]);
        let span = (b + n - a) % n;
        let (pa, pb) = (c.points[a], c.points[b]);
        let mut best: Option<(f64, usize)> = None;
        for s in 1..span {
            let i = (a + s) % n;
            let d = line_distance(c.points[i], pa, pb);
            if best.map_or(true, |(bd, _)| d > bd) {
                best = Some((d, i));
            }
        }
        if let Some((depth, i)) = best {
            if depth >= min_depth {
                out.push(Defect {
                    point: c.points[i],
                    contour_index: i,
                    depth,
                    hull_edge: (a, b),
                });
            }
        }
    }
    out
}
