//! Page input and swath planning.
//!
//! Pages arrive as portable anymaps: P1/P4 bitmaps print binary, P2/P5
//! graymaps carry an ink intensity per pixel (255 is full ink) that also
//! feeds the drive DAC. The page is cut into horizontal bands as tall as
//! the nozzle column; each pixel column of each band becomes one frame,
//! so frame `band * width + column` carries nozzle `n` from page row
//! `band * nozzles + n - 1`. Bands past the bottom edge are zero padded.

use crate::error::{Error, Result};
use crate::time::Picos;
use serde::Serialize;
use std::path::Path;

/// Ink intensities at or above this count as a firing pixel.
pub const INK_THRESHOLD: u8 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PageMode {
    /// From a bitmap; pixels are exactly 0 or 255.
    Binary,
    /// From a graymap; pixels are DAC-ready ink intensities.
    Gray,
}

/// A decoded page, row major, top row first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RasterPage {
    width: usize,
    height: usize,
    mode: PageMode,
    pixels: Vec<u8>,
}

impl RasterPage {
    pub fn new(width: usize, height: usize, mode: PageMode, pixels: Vec<u8>) -> Result<RasterPage> {
        if width == 0 || height == 0 {
            return Err(Error::Config("page dimensions must be positive".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::DataLength {
                got: pixels.len(),
                expected: width * height,
            });
        }
        Ok(RasterPage {
            width,
            height,
            mode,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mode(&self) -> PageMode {
        self.mode
    }

    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn ink(&self, x: usize, y: usize) -> bool {
        self.pixel(x, y) >= INK_THRESHOLD
    }

    /// Total pixels that would fire.
    pub fn ink_count(&self) -> usize {
        self.pixels.iter().filter(|&&v| v >= INK_THRESHOLD).count()
    }

    /// Encodes back to a portable anymap: raw (P4/P5) or plain (P1/P2).
    /// Binary pages threshold on the way out, so hand-built binary pages
    /// should stick to pixel values 0 and 255.
    pub fn encode(&self, raw: bool) -> Vec<u8> {
        let mut out = Vec::new();
        match (self.mode, raw) {
            (PageMode::Binary, false) => {
                out.extend_from_slice(format!("P1\n{} {}\n", self.width, self.height).as_bytes());
                for y in 0..self.height {
                    let row: Vec<&str> = (0..self.width)
                        .map(|x| if self.ink(x, y) { "1" } else { "0" })
                        .collect();
                    out.extend_from_slice(row.join(" ").as_bytes());
                    out.push(b'\n');
                }
            }
            (PageMode::Binary, true) => {
                out.extend_from_slice(format!("P4\n{} {}\n", self.width, self.height).as_bytes());
                for y in 0..self.height {
                    let mut byte = 0u8;
                    for x in 0..self.width {
                        if self.ink(x, y) {
                            byte |= 0x80 >> (x % 8);
                        }
                        if x % 8 == 7 {
                            out.push(byte);
                            byte = 0;
                        }
                    }
                    if !self.width.is_multiple_of(8) {
                        out.push(byte);
                    }
                }
            }
            (PageMode::Gray, false) => {
                out.extend_from_slice(
                    format!("P2\n{} {}\n255\n", self.width, self.height).as_bytes(),
                );
                for y in 0..self.height {
                    let row: Vec<String> = (0..self.width)
                        .map(|x| self.pixel(x, y).to_string())
                        .collect();
                    out.extend_from_slice(row.join(" ").as_bytes());
                    out.push(b'\n');
                }
            }
            (PageMode::Gray, true) => {
                out.extend_from_slice(
                    format!("P5\n{} {}\n255\n", self.width, self.height).as_bytes(),
                );
                out.extend_from_slice(&self.pixels);
            }
        }
        out
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Skips whitespace and `#` comments between header tokens and plain
    /// samples.
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
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

    fn uint(&mut self, what: &str) -> Result<usize> {
        self.skip_separators();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::raster(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::raster(start, format!("{what} out of range")))
    }

    fn plain_bit(&mut self) -> Result<bool> {
        self.skip_separators();
        match self.bytes.get(self.pos) {
            Some(b'0') => {
                self.pos += 1;
                Ok(false)
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(true)
            }
            Some(&other) => Err(Error::raster(
                self.pos,
                format!("bitmap sample must be 0 or 1, found {:?}", other as char),
            )),
            None => Err(Error::raster(self.pos, "bitmap data truncated")),
        }
    }

    /// Consumes the single whitespace byte that separates a raw header
    /// from its raster.
    fn single_separator(&mut self) -> Result<()> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::raster(
                self.pos,
                "expected a whitespace byte before raw raster data",
            )),
        }
    }

    fn raw_block(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < len {
            return Err(Error::raster(
                self.bytes.len(),
                format!(
                    "raster data truncated: need {len} bytes, have {}",
                    self.bytes.len() - self.pos
                ),
            ));
        }
        let block = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(block)
    }
}

fn page_size(cur: &mut Cursor) -> Result<(usize, usize)> {
    let width = cur.uint("width")?;
    let height = cur.uint("height")?;
    if width == 0 || height == 0 {
        return Err(Error::raster(2, "page dimensions must be positive"));
    }
    width
        .checked_mul(height)
        .ok_or_else(|| Error::raster(2, "page dimensions overflow"))?;
    Ok((width, height))
}

fn maxval(cur: &mut Cursor) -> Result<usize> {
    let max = cur.uint("maxval")?;
    if max == 0 {
        return Err(Error::raster(2, "maxval must be positive"));
    }
    if max > 255 {
        return Err(Error::raster(
            2,
            format!("maxval {max} is not supported (limit 255)"),
        ));
    }
    Ok(max)
}

fn rescale(v: usize, max: usize) -> u8 {
    if max == 255 {
        v as u8
    } else {
        ((v * 255 + max / 2) / max) as u8
    }
}

/// Decodes a P1, P2, P4 or P5 portable anymap. Parse errors carry the
/// byte offset of the offending input.
pub fn parse_raster(bytes: &[u8]) -> Result<RasterPage> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::raster(0, "not a portable anymap"));
    }
    let mut cur = Cursor { bytes, pos: 2 };
    match bytes[1] {
        b'1' => {
            let (width, height) = page_size(&mut cur)?;
            let mut pixels = Vec::with_capacity(width * height);
            for _ in 0..width * height {
                pixels.push(if cur.plain_bit()? { 255 } else { 0 });
            }
            RasterPage::new(width, height, PageMode::Binary, pixels)
        }
        b'2' => {
            let (width, height) = page_size(&mut cur)?;
            let max = maxval(&mut cur)?;
            let mut pixels = Vec::with_capacity(width * height);
            for _ in 0..width * height {
                let at = {
                    cur.skip_separators();
                    cur.pos
                };
                let v = cur.uint("gray sample")?;
                if v > max {
                    return Err(Error::raster(
                        at,
                        format!("gray sample {v} exceeds maxval {max}"),
                    ));
                }
                pixels.push(rescale(v, max));
            }
            RasterPage::new(width, height, PageMode::Gray, pixels)
        }
        b'4' => {
            let (width, height) = page_size(&mut cur)?;
            cur.single_separator()?;
            let stride = width.div_ceil(8);
            let mut pixels = Vec::with_capacity(width * height);
            for _ in 0..height {
                let row = cur.raw_block(stride)?;
                for x in 0..width {
                    let set = row[x / 8] & (0x80 >> (x % 8)) != 0;
                    pixels.push(if set { 255 } else { 0 });
                }
            }
            RasterPage::new(width, height, PageMode::Binary, pixels)
        }
        b'5' => {
            let (width, height) = page_size(&mut cur)?;
            let max = maxval(&mut cur)?;
            cur.single_separator()?;
            let base = cur.pos;
            let block = cur.raw_block(width * height)?;
            let mut pixels = Vec::with_capacity(width * height);
            for (i, &v) in block.iter().enumerate() {
                if v as usize > max {
                    return Err(Error::raster(
                        base + i,
                        format!("gray sample {v} exceeds maxval {max}"),
                    ));
                }
                pixels.push(rescale(v as usize, max));
            }
            RasterPage::new(width, height, PageMode::Gray, pixels)
        }
        b'3' | b'6' => Err(Error::raster(1, "color anymaps are not supported")),
        other => Err(Error::raster(
            1,
            format!("unrecognized anymap type {:?}", other as char),
        )),
    }
}

pub fn load_raster(path: impl AsRef<Path>) -> Result<RasterPage> {
    parse_raster(&std::fs::read(path)?)
}

/// A page sliced into per-frame nozzle vectors.
#[derive(Clone, Debug)]
pub struct SwathPlan {
    pub frames: Vec<Vec<bool>>,
    /// DAC codes per frame, present for gray pages.
    pub gray_frames: Option<Vec<Vec<u8>>>,
    pub nozzles_per_column: usize,
    pub width: usize,
    pub height: usize,
    pub bands: usize,
}

impl SwathPlan {
    pub fn frames_count(&self) -> usize {
        self.frames.len()
    }

    /// Total firing bits across all frames.
    pub fn drop_count(&self) -> usize {
        self.frames
            .iter()
            .map(|f| f.iter().filter(|&&b| b).count())
            .sum()
    }
}

/// Slices a page into frames for a column of `nozzle_count` nozzles.
pub fn rasterize_to_frames(page: &RasterPage, nozzle_count: usize) -> Result<SwathPlan> {
    if nozzle_count == 0 {
        return Err(Error::Config("nozzle count must be positive".into()));
    }
    let bands = page.height.div_ceil(nozzle_count);
    let mut frames = Vec::with_capacity(bands * page.width);
    let mut gray_frames =
        (page.mode == PageMode::Gray).then(|| Vec::with_capacity(bands * page.width));
    for band in 0..bands {
        for column in 0..page.width {
            let mut bits = vec![false; nozzle_count];
            let mut codes = vec![0u8; nozzle_count];
            for n in 0..nozzle_count {
                let row = band * nozzle_count + n;
                if row < page.height {
                    let v = page.pixel(column, row);
                    bits[n] = v >= INK_THRESHOLD;
                    codes[n] = v;
                }
            }
            frames.push(bits);
            if let Some(g) = gray_frames.as_mut() {
                g.push(codes);
            }
        }
    }
    Ok(SwathPlan {
        frames,
        gray_frames,
        nozzles_per_column: nozzle_count,
        width: page.width,
        height: page.height,
        bands,
    })
}

/// Reassembles the page a plan came from; the inverse of
/// [`rasterize_to_frames`] up to binary thresholding.
pub fn render_page(plan: &SwathPlan) -> RasterPage {
    let mode = if plan.gray_frames.is_some() {
        PageMode::Gray
    } else {
        PageMode::Binary
    };
    let mut pixels = vec![0u8; plan.width * plan.height];
    for band in 0..plan.bands {
        for column in 0..plan.width {
            let frame = band * plan.width + column;
            for n in 0..plan.nozzles_per_column {
                let row = band * plan.nozzles_per_column + n;
                if row < plan.height {
                    pixels[row * plan.width + column] = match &plan.gray_frames {
                        Some(g) => g[frame][n],
                        None => {
                            if plan.frames[frame][n] {
                                255
                            } else {
                                0
                            }
                        }
                    };
                }
            }
        }
    }
    RasterPage {
        width: plan.width,
        height: plan.height,
        mode,
        pixels,
    }
}

/// Page-rate projection for a plan printed at a fixed frame time.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThroughputEstimate {
    pub frames: usize,
    pub frame_time: Picos,
    pub page_time: Picos,
    pub pages_per_minute: f64,
    pub nozzle_frequency_hz: f64,
}

pub fn throughput_estimate(plan: &SwathPlan, frame_time: Picos) -> ThroughputEstimate {
    let page_time = frame_time * plan.frames_count() as u64;
    ThroughputEstimate {
        frames: plan.frames_count(),
        frame_time,
        page_time,
        pages_per_minute: 60.0 / page_time.as_secs(),
        nozzle_frequency_hz: 1.0 / frame_time.as_secs(),
    }
}
