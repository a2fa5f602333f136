//! Raster types shared by every stage: binary masks, label maps, and PNG I/O.

use std::collections::HashMap;
use std::path::Path;

use image::{ColorType, ImageBuffer, Luma};

use crate::error::{Error, Result};

/// Binary foreground/background raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    /// An all-background mask.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width >= 1 && height >= 1, "mask dimensions must be positive");
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::Dimensions(format!(
                "{width}x{height} mask with {} pixels",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds a mask from a predicate evaluated at every `(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                m.data[y * width + x] = f(x, y);
            }
        }
        m
    }

    /// Parses rows of `#` (foreground) and `.` (background). Handy in tests.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        Self::from_fn(width, height, |x, y| rows[y].as_bytes()[x] == b'#')
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Out-of-bounds reads are background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.data[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn at(&self, idx: usize) -> bool {
        self.data[idx]
    }

    #[inline]
    pub fn set_at(&mut self, idx: usize, v: bool) {
        self.data[idx] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| !v).collect(),
        }
    }

    pub fn same_shape(&self, w: usize, h: usize) -> bool {
        self.width == w && self.height == h
    }
}

/// Instance raster: 0 is background, positive values are instance ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LabelMap {
    width: usize,
    height: usize,
    data: Vec<u32>,
    count: usize,
}

impl LabelMap {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
            count: 0,
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::Dimensions(format!(
                "{width}x{height} label map with {} pixels",
                data.len()
            )));
        }
        let count = distinct_nonzero(&data);
        Ok(Self {
            width,
            height,
            data,
            count,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[u32] {
        &self.data
    }

    /// Number of distinct nonzero labels.
    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn at(&self, idx: usize) -> u32 {
        self.data[idx]
    }

    /// Largest label value present (0 for an empty map).
    pub fn max_label(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0)
    }

    /// Foreground mask of all labeled pixels.
    pub fn foreground(&self) -> Mask {
        Mask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&l| l != 0).collect(),
        }
    }

    /// Mask of the pixels carrying `label`.
    pub fn region(&self, label: u32) -> Mask {
        Mask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&l| l == label).collect(),
        }
    }

    /// Pixel count per label, indexed by label value.
    pub fn areas(&self) -> Vec<usize> {
        let mut areas = vec![0usize; self.max_label() as usize + 1];
        for &l in &self.data {
            areas[l as usize] += 1;
        }
        areas
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.data
    }
}

fn distinct_nonzero(data: &[u32]) -> usize {
    let mut seen: HashMap<u32, ()> = HashMap::new();
    for &l in data {
        if l != 0 {
            seen.entry(l).or_insert(());
        }
    }
    seen.len()
}

/// Compacts labels to `1..=count` in order of first appearance in a row-major scan.
pub fn relabel(labels: &LabelMap) -> LabelMap {
    let mut mapping: HashMap<u32, u32> = HashMap::new();
    let mut next = 0u32;
    let data = labels
        .data
        .iter()
        .map(|&l| {
            if l == 0 {
                0
            } else {
                *mapping.entry(l).or_insert_with(|| {
                    next += 1;
                    next
                })
            }
        })
        .collect();
    LabelMap {
        width: labels.width,
        height: labels.height,
        data,
        count: next as usize,
    }
}

/// Reads an 8-bit single-channel PNG; any nonzero pixel is foreground.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask> {
    let path = path.as_ref();
    let img = open_image(path)?;
    match img.color() {
        ColorType::L8 => {}
        ColorType::L16 | ColorType::La16 | ColorType::Rgb16 | ColorType::Rgba16 => {
            return Err(Error::Format {
                path: path.to_path_buf(),
                reason: "unsupported bit depth (expected 8-bit)".into(),
            })
        }
        other => {
            return Err(Error::Format {
                path: path.to_path_buf(),
                reason: format!(
                    "unsupported channel count {} (expected 1)",
                    other.channel_count()
                ),
            })
        }
    }
    let gray = img.into_luma8();
    let (w, h) = gray.dimensions();
    let data = gray.into_raw().into_iter().map(|v| v != 0).collect();
    Mask::from_vec(w as usize, h as usize, data)
}

/// Writes an 8-bit grayscale PNG with foreground 255 and background 0.
pub fn save_mask(mask: &Mask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let raw: Vec<u8> = mask.data.iter().map(|&f| if f { 255 } else { 0 }).collect();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(mask.width as u32, mask.height as u32, raw)
            .expect("buffer length matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: e,
        })
}

/// Writes a 16-bit grayscale PNG holding the raw label values.
pub fn save_labelmap(labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let max = labels.max_label();
    if labels.count() > u16::MAX as usize || max > u16::MAX as u32 {
        return Err(Error::Capacity(max.max(labels.count() as u32)));
    }
    let raw: Vec<u16> = labels.data.iter().map(|&l| l as u16).collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(labels.width as u32, labels.height as u32, raw)
            .expect("buffer length matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: e,
        })
}

/// Reads a label map written by [`save_labelmap`] (8- or 16-bit grayscale).
pub fn load_labelmap(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    let img = open_image(path)?;
    let data: Vec<u32>;
    let (w, h);
    match img.color() {
        ColorType::L16 => {
            let g = img.into_luma16();
            (w, h) = g.dimensions();
            data = g.into_raw().into_iter().map(u32::from).collect();
        }
        ColorType::L8 => {
            let g = img.into_luma8();
            (w, h) = g.dimensions();
            data = g.into_raw().into_iter().map(u32::from).collect();
        }
        other => {
            return Err(Error::Format {
                path: path.to_path_buf(),
                reason: format!("unsupported label map color type {other:?}"),
            })
        }
    }
    LabelMap::from_vec(w as usize, h as usize, data)
}

fn open_image(path: &Path) -> Result<image::DynamicImage> {
    if !path.exists() {
        return Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        });
    }
    image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        source: e,
    })
}
