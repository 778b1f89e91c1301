//! Binary PGM/PPM ingestion, luma conversion and window geometry.

use std::fs;
use std::path::Path;

/// Detection window width in pixels.
pub const WINDOW_WIDTH: usize = 66;
/// Detection window height in pixels.
pub const WINDOW_HEIGHT: usize = 130;

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic at byte 0: expected P5 or P6")]
    BadMagic,
    #[error("malformed header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: &'static str },
    #[error("unsupported maxval {maxval} at byte {offset} (only 255 is accepted)")]
    UnsupportedMaxval { offset: usize, maxval: u32 },
    #[error("truncated pixel data at byte {offset}: expected {expected} bytes, found {found}")]
    Truncated {
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid image dimensions {width}x{height}")]
    BadDimensions { width: usize, height: usize },
    #[error("window must be {WINDOW_WIDTH}x{WINDOW_HEIGHT}, got {width}x{height}")]
    WindowMismatch { width: usize, height: usize },
    #[error("image {width}x{height} is smaller than the {WINDOW_WIDTH}x{WINDOW_HEIGHT} window")]
    TooSmall { width: usize, height: usize },
}

impl ImageError {
    /// True for errors caused by image geometry rather than file contents.
    pub fn is_geometry(&self) -> bool {
        matches!(self, ImageError::WindowMismatch { .. } | ImageError::TooSmall { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RgbImage {
    /// `pixels` holds row-major (R, G, B) triples.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 || pixels.len() != width * height * 3 {
            return Err(ImageError::BadDimensions { width, height });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

/// 8-bit grayscale image of arbitrary size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(ImageError::BadDimensions { width, height });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// A decoded PNM file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Image {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl Image {
    pub fn into_gray(self) -> GrayImage {
        match self {
            Image::Gray(g) => g,
            Image::Rgb(rgb) => rgb_to_gray(&rgb),
        }
    }
}

/// The fixed 66x130 detection window, intensities f(x, y) in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayWindow {
    pixels: Vec<u8>,
}

impl GrayWindow {
    pub fn from_pixels(pixels: Vec<u8>) -> Result<Self, ImageError> {
        if pixels.len() != WINDOW_WIDTH * WINDOW_HEIGHT {
            return Err(ImageError::WindowMismatch {
                width: pixels.len() / WINDOW_HEIGHT,
                height: WINDOW_HEIGHT,
            });
        }
        Ok(Self { pixels })
    }

    pub fn from_fn(f: impl FnMut(usize, usize) -> u8) -> Self {
        Self {
            pixels: GrayImage::from_fn(WINDOW_WIDTH, WINDOW_HEIGHT, f).pixels,
        }
    }

    pub fn filled(value: u8) -> Self {
        Self {
            pixels: vec![value; WINDOW_WIDTH * WINDOW_HEIGHT],
        }
    }

    pub const fn width(&self) -> usize {
        WINDOW_WIDTH
    }

    pub const fn height(&self) -> usize {
        WINDOW_HEIGHT
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * WINDOW_WIDTH + x]
    }

    /// Applies `f` to every pixel.
    pub fn map(&self, mut f: impl FnMut(u8) -> u8) -> Self {
        Self {
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn to_gray_image(&self) -> GrayImage {
        GrayImage {
            width: WINDOW_WIDTH,
            height: WINDOW_HEIGHT,
            pixels: self.pixels.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CropMode {
    /// Input must already be 66x130.
    #[default]
    Exact,
    /// Take the centered 66x130 region; odd margins put the extra pixel on
    /// the right/bottom.
    CenterCrop,
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Image, ImageError> {
    let bytes = fs::read(path)?;
    decode_pnm(&bytes)
}

struct HeaderCursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &'static str) -> Result<u32, ImageError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        let mut value: u32 = 0;
        while let Some(&b) = self.data.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(u32::from(b - b'0')))
                .ok_or(ImageError::MalformedHeader {
                    offset: start,
                    reason: "numeric field overflows",
                })?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(ImageError::MalformedHeader {
                offset: start,
                reason: what,
            });
        }
        Ok(value)
    }
}

/// Decodes a binary PGM (P5) or PPM (P6) buffer with maxval 255.
pub fn decode_pnm(data: &[u8]) -> Result<Image, ImageError> {
    let channels = match data.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(ImageError::BadMagic),
    };
    let mut cur = HeaderCursor { data, pos: 2 };
    if !data.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(ImageError::MalformedHeader {
            offset: 2,
            reason: "expected whitespace after magic",
        });
    }
    let width = cur.number("expected width")? as usize;
    let height = cur.number("expected height")? as usize;
    let maxval_offset = {
        cur.skip_whitespace_and_comments();
        cur.pos
    };
    let maxval = cur.number("expected maxval")?;
    if width == 0 || height == 0 {
        return Err(ImageError::BadDimensions { width, height });
    }
    if maxval != 255 {
        return Err(ImageError::UnsupportedMaxval {
            offset: maxval_offset,
            maxval,
        });
    }
    // exactly one whitespace byte separates maxval from the raster
    match data.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(ImageError::MalformedHeader {
                offset: cur.pos,
                reason: "expected single whitespace after maxval",
            })
        }
    }
    let expected = width * height * channels;
    let raster = &data[cur.pos..];
    if raster.len() < expected {
        return Err(ImageError::Truncated {
            offset: cur.pos,
            expected,
            found: raster.len(),
        });
    }
    let pixels = raster[..expected].to_vec();
    Ok(if channels == 1 {
        Image::Gray(GrayImage::new(width, height, pixels)?)
    } else {
        Image::Rgb(RgbImage::new(width, height, pixels)?)
    })
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

/// Luma conversion: round(0.2989 R + 0.5870 G + 0.1140 B), half away from zero.
pub fn rgb_to_gray(img: &RgbImage) -> GrayImage {
    let pixels = img.pixels.chunks_exact(3).map(|p| luma(p[0], p[1], p[2])).collect();
    GrayImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.2989 * f64::from(r) + 0.5870 * f64::from(g) + 0.1140 * f64::from(b);
    y.round().clamp(0.0, 255.0) as u8
}

pub fn to_window(img: &GrayImage, mode: CropMode) -> Result<GrayWindow, ImageError> {
    let (w, h) = (img.width, img.height);
    match mode {
        CropMode::Exact => {
            if w != WINDOW_WIDTH || h != WINDOW_HEIGHT {
                return Err(ImageError::WindowMismatch { width: w, height: h });
            }
            Ok(GrayWindow {
                pixels: img.pixels.clone(),
            })
        }
        CropMode::CenterCrop => {
            if w < WINDOW_WIDTH || h < WINDOW_HEIGHT {
                return Err(ImageError::TooSmall { width: w, height: h });
            }
            let (ox, oy) = center_offset(w, h);
            Ok(GrayWindow::from_fn(|x, y| img.get(x + ox, y + oy)))
        }
    }
}

/// Top-left corner of the centered window inside a `w`x`h` image.
pub fn center_offset(w: usize, h: usize) -> (usize, usize) {
    ((w - WINDOW_WIDTH) / 2, (h - WINDOW_HEIGHT) / 2)
}
