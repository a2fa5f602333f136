//! Binary morphology, connected components and the chamfer distance transform.
//!
//! Everything outside the image is background: erosion shrinks objects that
//! touch the border and the distance transform measures distance to the
//! frame as well as to interior background.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::grow;
use crate::raster::{relabel, LabelMap, Mask};

/// Odd-sided square structuring element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StructuringElement {
    size: usize,
}

impl StructuringElement {
    pub fn square(size: usize) -> Result<Self> {
        if size == 0 || size % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "structuring element size must be odd and >= 1, got {size}"
            )));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }
}

/// Foreground connectivity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            4 => Ok(Self::Four),
            8 => Ok(Self::Eight),
            _ => Err(format!("connectivity must be 4 or 8, got {v}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// Per-pixel distance to the nearest background pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl DistanceMap {
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Dimensions(format!(
                "{width}x{height} distance map with {} values",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

// Separable min/max filter: a square window is a row window followed by a
// column window.
fn window_filter(mask: &Mask, radius: usize, all: bool) -> Mask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = (mask.width(), mask.height());
    let r = radius as i64;
    let pass = |src: &[bool], horizontal: bool| -> Vec<bool> {
        let mut out = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut acc = all;
                for d in -r..=r {
                    let (nx, ny) = if horizontal {
                        (x as i64 + d, y as i64)
                    } else {
                        (x as i64, y as i64 + d)
                    };
                    let v = nx >= 0
                        && ny >= 0
                        && (nx as usize) < w
                        && (ny as usize) < h
                        && src[ny as usize * w + nx as usize];
                    if all && !v {
                        acc = false;
                        break;
                    }
                    if !all && v {
                        acc = true;
                        break;
                    }
                }
                out[y * w + x] = acc;
            }
        }
        out
    };
    let rows = pass(mask.data(), true);
    let data = pass(&rows, false);
    Mask::from_vec(w, h, data).expect("same dimensions")
}

pub fn erode(mask: &Mask, se: StructuringElement) -> Mask {
    window_filter(mask, se.radius(), true)
}

pub fn dilate(mask: &Mask, se: StructuringElement) -> Mask {
    window_filter(mask, se.radius(), false)
}

/// Labels connected foreground components in row-major first-occurrence order.
pub fn connected_components(mask: &Mask, connectivity: Connectivity) -> LabelMap {
    let (w, h) = (mask.width(), mask.height());
    let offsets: &[(i64, i64)] = match connectivity {
        Connectivity::Four => &[(0, -1), (-1, 0), (1, 0), (0, 1)],
        Connectivity::Eight => &grow::N8,
    };
    let mut labels = vec![0u32; w * h];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask.at(start) || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            let (x, y) = ((p % w) as i64, (p / w) as i64);
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                    continue;
                }
                let q = ny as usize * w + nx as usize;
                if mask.at(q) && labels[q] == 0 {
                    labels[q] = next;
                    queue.push_back(q);
                }
            }
        }
    }
    LabelMap::from_vec(w, h, labels).expect("same dimensions")
}

/// Chamfer weights and normalisation for a distance-transform kernel size.
fn chamfer_mask(dist_kernel: u8) -> Result<(Vec<(i64, i64, u32)>, f64)> {
    match dist_kernel {
        3 => Ok((
            vec![(-1, -1, 4), (0, -1, 3), (1, -1, 4), (-1, 0, 3)],
            3.0,
        )),
        5 => Ok((
            vec![
                (-1, -2, 11),
                (1, -2, 11),
                (-2, -1, 11),
                (-1, -1, 7),
                (0, -1, 5),
                (1, -1, 7),
                (2, -1, 11),
                (-1, 0, 5),
            ],
            5.0,
        )),
        k => Err(Error::InvalidParameter(format!(
            "dist_kernel must be 3 or 5, got {k}"
        ))),
    }
}

/// Two-pass chamfer distance to the nearest background pixel.
///
/// Kernel 3 uses weights (3, 4)/3, kernel 5 uses (5, 7, 11)/5 with
/// knight moves. Pixels beyond the image edge count as background.
pub fn distance_transform(mask: &Mask, dist_kernel: u8) -> Result<DistanceMap> {
    let (forward, scale) = chamfer_mask(dist_kernel)?;
    let pad = 2usize;
    let (w, h) = (mask.width(), mask.height());
    let (pw, ph) = (w + 2 * pad, h + 2 * pad);
    let mut d = vec![0u32; pw * ph];
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                d[(y + pad) * pw + x + pad] = u32::MAX / 2;
            }
        }
    }
    // The padded frame stays 0; only interior cells are relaxed.
    for y in pad..pad + h {
        for x in pad..pad + w {
            let i = y * pw + x;
            if d[i] == 0 {
                continue;
            }
            for &(dx, dy, wt) in &forward {
                let j = (y as i64 + dy) as usize * pw + (x as i64 + dx) as usize;
                d[i] = d[i].min(d[j] + wt);
            }
        }
    }
    for y in (pad..pad + h).rev() {
        for x in (pad..pad + w).rev() {
            let i = y * pw + x;
            if d[i] == 0 {
                continue;
            }
            for &(dx, dy, wt) in &forward {
                let j = (y as i64 - dy) as usize * pw + (x as i64 - dx) as usize;
                d[i] = d[i].min(d[j] + wt);
            }
        }
    }
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            data.push(d[(y + pad) * pw + x + pad] as f64 / scale);
        }
    }
    DistanceMap::from_vec(w, h, data)
}

/// Splits light adhesions: erode, label the surviving cores, then regrow the
/// cores inside the original foreground.
///
/// Foreground that no core can reach geodesically joins the nearest core
/// label. If erosion removes everything, the plain 8-connected components
/// of the input are returned.
pub fn morph_split(mask: &Mask, se: StructuringElement) -> LabelMap {
    let eroded = erode(mask, se);
    let seeds = connected_components(&eroded, Connectivity::Eight);
    if seeds.count() == 0 {
        return connected_components(mask, Connectivity::Eight);
    }
    let mut labels = seeds.into_vec();
    grow::geodesic_grow(mask, &mut labels);
    grow::nearest_fill(mask, &mut labels);
    relabel(&LabelMap::from_vec(mask.width(), mask.height(), labels).expect("same dimensions"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(w: usize, h: usize, x0: usize, y0: usize, side: usize) -> Mask {
        Mask::from_fn(w, h, |x, y| {
            x >= x0 && x < x0 + side && y >= y0 && y < y0 + side
        })
    }

    fn se(n: usize) -> StructuringElement {
        StructuringElement::square(n).unwrap()
    }

    #[test]
    fn even_structuring_element_rejected() {
        assert!(StructuringElement::square(4).is_err());
        assert!(StructuringElement::square(0).is_err());
    }

    #[test]
    fn erode_point_vanishes() {
        let m = square(5, 5, 2, 2, 1);
        assert_eq!(erode(&m, se(3)).count(), 0);
    }

    #[test]
    fn erode_square_to_interior() {
        let m = square(9, 9, 2, 2, 5);
        assert_eq!(erode(&m, se(3)), square(9, 9, 3, 3, 3));
    }

    #[test]
    fn erode_full_image_keeps_interior() {
        let m = Mask::from_fn(6, 4, |_, _| true);
        let e = erode(&m, se(3));
        assert_eq!(e, Mask::from_fn(6, 4, |x, y| x >= 1 && x <= 4 && y >= 1 && y <= 2));
    }

    #[test]
    fn dilate_point_and_empty() {
        let m = square(7, 7, 3, 3, 1);
        assert_eq!(dilate(&m, se(3)), square(7, 7, 2, 2, 3));
        let e = Mask::new(4, 4);
        assert_eq!(dilate(&e, se(5)), e);
    }

    #[test]
    fn components_diagonal_pair() {
        let m = Mask::from_ascii(&["#.", ".#"]);
        assert_eq!(connected_components(&m, Connectivity::Four).count(), 2);
        assert_eq!(connected_components(&m, Connectivity::Eight).count(), 1);
        assert_eq!(connected_components(&Mask::new(3, 3), Connectivity::Eight).count(), 0);
    }

    #[test]
    fn components_are_numbered_in_scan_order() {
        let m = Mask::from_ascii(&["..#", "#..", "#.#"]);
        let cc = connected_components(&m, Connectivity::Four);
        assert_eq!(cc.data(), &[0, 0, 1, 2, 0, 0, 2, 0, 3]);
    }

    #[test]
    fn distance_single_pixel() {
        let m = square(5, 5, 2, 2, 1);
        let d = distance_transform(&m, 3).unwrap();
        assert_eq!(d.get(2, 2), 1.0);
        let d5 = distance_transform(&m, 5).unwrap();
        assert_eq!(d5.get(2, 2), 1.0);
    }

    #[test]
    fn distance_square_center() {
        let m = square(11, 11, 3, 3, 5);
        let d = distance_transform(&m, 3).unwrap();
        assert_eq!(d.get(5, 5), 3.0);
        assert_eq!(d.get(3, 3), 1.0);
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn distance_counts_frame_as_background() {
        let m = Mask::from_fn(5, 5, |_, _| true);
        let d = distance_transform(&m, 3).unwrap();
        assert_eq!(d.get(2, 2), 3.0);
        assert_eq!(d.get(0, 2), 1.0);
    }

    #[test]
    fn distance_empty_and_invalid_kernel() {
        let d = distance_transform(&Mask::new(4, 3), 5).unwrap();
        assert!(d.data().iter().all(|&v| v == 0.0));
        assert!(distance_transform(&Mask::new(4, 3), 4).is_err());
    }

    #[test]
    fn morph_split_two_squares_with_bridge() {
        // two 9x9 squares joined by a 1-wide, 3-long bridge
        let m = Mask::from_fn(25, 13, |x, y| {
            let left = (2..11).contains(&x) && (2..11).contains(&y);
            let right = (14..23).contains(&x) && (2..11).contains(&y);
            let bridge = (11..14).contains(&x) && y == 6;
            left || right || bridge
        });
        let out = morph_split(&m, se(3));
        assert_eq!(out.count(), 2);
        assert_eq!(out.foreground(), m);
    }

    #[test]
    fn morph_split_disc_and_fallback() {
        let disc = Mask::from_fn(21, 21, |x, y| {
            let (dx, dy) = (x as f64 - 10.0, y as f64 - 10.0);
            dx * dx + dy * dy <= 64.0
        });
        assert_eq!(morph_split(&disc, se(3)).count(), 1);

        let lines = Mask::from_ascii(&["#####..", ".......", "..#####"]);
        let out = morph_split(&lines, se(5));
        assert_eq!(out, connected_components(&lines, Connectivity::Eight));
    }

    #[test]
    fn morph_split_unreachable_component_joins_nearest_core() {
        // a thin strand far from any core, plus a square that survives erosion
        let m = Mask::from_fn(20, 9, |x, y| {
            ((1..8).contains(&x) && (1..8).contains(&y)) || (x == 12 && (2..7).contains(&y))
        });
        let out = morph_split(&m, se(3));
        assert_eq!(out.count(), 1);
        assert_eq!(out.foreground(), m);
    }
}
