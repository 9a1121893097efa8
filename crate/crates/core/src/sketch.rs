//! Trajectory sketch rasterization.
//!
//! Channel layout of a rendered sketch:
//!
//! * curve pixels: `R = time` (never below 1), `G = height` in 2.5D mode and
//!   0 in 2D mode, `B = 0`;
//! * close markers: filled discs of exactly `(0, 255, 0)`;
//! * open markers: filled discs of exactly `(0, 0, 255)`;
//! * background: `(0, 0, 0)`.
//!
//! Markers are painted after the curve. Because curve pixels always carry a
//! nonzero red channel, curve and marker pixels can be told apart exactly.

use std::collections::VecDeque;
use std::io::Cursor;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{PixelPath, PixelVertex};
use crate::interaction::{EventKind, InteractionEvent};

pub const CLOSE_COLOR: [u8; 3] = [0, 255, 0];
pub const OPEN_COLOR: [u8; 3] = [0, 0, 255];

#[derive(Debug, Error)]
pub enum SketchError {
    #[error("sketch path has no vertices")]
    EmptySpec,
    #[error("event at step {0} has no matching path vertex")]
    UnresolvedEvent(u64),
    #[error("invalid render config: {0}")]
    InvalidConfig(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("png encoding failed: {0}")]
    PngEncode(#[from] png::EncodingError),
    #[error("png decoding failed: {0}")]
    PngDecode(#[from] png::DecodingError),
    #[error("unsupported png layout: {0}")]
    PngLayout(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SketchMode {
    /// Time in red, markers; no height.
    #[serde(rename = "2d")]
    TwoD,
    /// Time in red, height in green, markers.
    #[serde(rename = "2.5d")]
    TwoPointFiveD,
}

/// Vector form of a sketch: the pixel path, its interaction events and the
/// representation to render.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchSpec {
    pub path: PixelPath,
    pub events: Vec<InteractionEvent>,
    pub mode: SketchMode,
}

impl SketchSpec {
    /// Events are sorted by step; each must name a step present in the path.
    pub fn new(path: PixelPath, mut events: Vec<InteractionEvent>, mode: SketchMode) -> Result<Self, SketchError> {
        path.validate().map_err(|e| SketchError::InvalidPath(e.to_string()))?;
        if let Some(e) = events.iter().find(|e| path.vertex_for_step(e.step).is_none()) {
            return Err(SketchError::UnresolvedEvent(e.step));
        }
        events.sort_by_key(|e| e.step);
        Ok(Self { path, events, mode })
    }

    pub fn with_mode(&self, mode: SketchMode) -> SketchSpec {
        SketchSpec { mode, ..self.clone() }
    }

    /// Subpixel center and kind of every marker, in painting order.
    pub fn marker_centers(&self) -> Vec<(f64, f64, EventKind)> {
        self.events
            .iter()
            .filter_map(|e| self.path.vertex_for_step(e.step).map(|v| (v.u, v.v, e.kind)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub width: u32,
    pub height: u32,
    pub line_thickness: u32,
    pub marker_radius: u32,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self { width: 320, height: 256, line_thickness: 3, marker_radius: 6 }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), SketchError> {
        let bad = |m: String| Err(SketchError::InvalidConfig(m));
        if self.width < 16 || self.height < 16 {
            return bad(format!("image must be at least 16x16, got {}x{}", self.width, self.height));
        }
        if self.line_thickness == 0 {
            return bad("line thickness must be at least 1".into());
        }
        if 2 * self.marker_radius <= self.line_thickness {
            return bad(format!(
                "marker radius {} must exceed half the line thickness {}",
                self.marker_radius, self.line_thickness
            ));
        }
        Ok(())
    }
}

/// 8-bit RGB raster, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl SketchImage {
    pub fn blank(width: u32, height: u32) -> Self {
        Self { width, height, data: vec![0; width as usize * height as usize * 3] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = self.offset(x, y);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn get(&self, x: i64, y: i64) -> Option<[u8; 3]> {
        self.contains(x, y).then(|| self.pixel(x as u32, y as u32))
    }

    fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    fn put(&mut self, x: i64, y: i64, rgb: [u8; 3]) {
        if self.contains(x, y) {
            let i = self.offset(x as u32, y as u32);
            self.data[i..i + 3].copy_from_slice(&rgb);
        }
    }

    pub fn to_png(&self) -> Result<Vec<u8>, SketchError> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.width, self.height);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header()?;
            writer.write_image_data(&self.data)?;
        }
        Ok(out)
    }

    pub fn from_png(bytes: &[u8]) -> Result<Self, SketchError> {
        let decoder = png::Decoder::new(Cursor::new(bytes));
        let mut reader = decoder.read_info()?;
        let size = reader
            .output_buffer_size()
            .ok_or_else(|| SketchError::PngLayout("image too large".into()))?;
        let mut buf = vec![0; size];
        let info = reader.next_frame(&mut buf)?;
        if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
            return Err(SketchError::PngLayout(format!("{:?}/{:?}", info.color_type, info.bit_depth)));
        }
        buf.truncate(info.buffer_size());
        Ok(Self { width: info.width, height: info.height, data: buf })
    }
}

/// `round(255·x)` with halves away from zero, clamped to `[0, 255]`.
pub fn quantize(x: f64) -> u8 {
    (255.0 * x).round().clamp(0.0, 255.0) as u8
}

/// Red value of a curve pixel. Any curve pixel reads at least 1.
fn time_to_red(t: f64) -> u8 {
    quantize(t).max(1)
}

fn pixel_of(v: &PixelVertex) -> (i64, i64) {
    (v.u.round() as i64, v.v.round() as i64)
}

/// Integer line from `a` to `b` inclusive, in drawing order.
fn bresenham(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x, mut y) = a;
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity(dx.max(-dy) as usize + 1);
    loop {
        out.push((x, y));
        if x == b.0 && y == b.1 {
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

/// Liang–Barsky clip of segment `a→b` against `[lo, hi]²`-style bounds.
/// Returns the parameter interval that lies inside, if any.
fn clip_segment(a: (f64, f64), b: (f64, f64), min: (f64, f64), max: (f64, f64)) -> Option<(f64, f64)> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (p, q) in [(-dx, a.0 - min.0), (dx, max.0 - a.0), (-dy, a.1 - min.1), (dy, max.1 - a.1)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// A thin-line pixel with its interpolated time and height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePixel {
    pub x: i64,
    pub y: i64,
    pub time: f64,
    pub height: f64,
}

/// Centerline pixels of the sketch curve in drawing order, including pixels
/// slightly outside the image (within the brush margin).
pub fn centerline(path: &PixelPath, cfg: &RenderConfig) -> Vec<CurvePixel> {
    let verts = &path.vertices;
    if verts.len() == 1 {
        let (x, y) = pixel_of(&verts[0]);
        return vec![CurvePixel { x, y, time: verts[0].time_norm, height: verts[0].height_norm }];
    }
    let pad = cfg.line_thickness as f64;
    let min = (-pad, -pad);
    let max = (cfg.width as f64 - 1.0 + pad, cfg.height as f64 - 1.0 + pad);
    let inside = |p: (i64, i64)| {
        let (x, y) = (p.0 as f64, p.1 as f64);
        x >= min.0 && x <= max.0 && y >= min.1 && y <= max.1
    };

    let mut out = Vec::new();
    for w in verts.windows(2) {
        let (va, vb) = (&w[0], &w[1]);
        let (pa, pb) = (pixel_of(va), pixel_of(vb));
        let (t0, t1, a, b) = if inside(pa) && inside(pb) {
            (0.0, 1.0, pa, pb)
        } else {
            let fa = (pa.0 as f64, pa.1 as f64);
            let fb = (pb.0 as f64, pb.1 as f64);
            let Some((t0, t1)) = clip_segment(fa, fb, min, max) else { continue };
            let at = |t: f64| ((fa.0 + (fb.0 - fa.0) * t).round() as i64, (fa.1 + (fb.1 - fa.1) * t).round() as i64);
            (t0, t1, at(t0), at(t1))
        };
        let line = bresenham(a, b);
        let last = (line.len() - 1) as f64;
        for (k, &(x, y)) in line.iter().enumerate() {
            // a degenerate segment is a single pixel carrying the end value
            let t = if line.len() == 1 { t1 } else { t0 + (t1 - t0) * (k as f64 / last) };
            out.push(CurvePixel {
                x,
                y,
                time: va.time_norm + (vb.time_norm - va.time_norm) * t,
                height: va.height_norm + (vb.height_norm - va.height_norm) * t,
            });
        }
    }
    out
}

fn fill_disc(img: &mut SketchImage, cx: i64, cy: i64, radius: u32, rgb: [u8; 3]) {
    let r = radius as i64;
    for y in (cy - r)..=(cy + r) {
        for x in (cx - r)..=(cx + r) {
            let (dx, dy) = (x - cx, y - cy);
            if dx * dx + dy * dy <= r * r {
                img.put(x, y, rgb);
            }
        }
    }
}

pub fn marker_color(kind: EventKind) -> [u8; 3] {
    match kind {
        EventKind::Close => CLOSE_COLOR,
        EventKind::Open => OPEN_COLOR,
    }
}

/// Render a sketch. Identical inputs give bit-identical images.
pub fn rasterize(spec: &SketchSpec, cfg: &RenderConfig) -> Result<SketchImage, SketchError> {
    cfg.validate()?;
    if spec.path.is_empty() {
        return Err(SketchError::EmptySpec);
    }
    let mut img = SketchImage::blank(cfg.width, cfg.height);
    let lo = -((cfg.line_thickness as i64 - 1) / 2);
    let hi = lo + cfg.line_thickness as i64 - 1;

    for px in centerline(&spec.path, cfg) {
        let g = match spec.mode {
            SketchMode::TwoD => 0,
            SketchMode::TwoPointFiveD => quantize(px.height),
        };
        let rgb = [time_to_red(px.time), g, 0];
        for dy in lo..=hi {
            for dx in lo..=hi {
                img.put(px.x + dx, px.y + dy, rgb);
            }
        }
    }

    for (u, v, kind) in spec.marker_centers() {
        fill_disc(&mut img, u.round() as i64, v.round() as i64, cfg.marker_radius, marker_color(kind));
    }
    Ok(img)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodedMarker {
    pub x: f64,
    pub y: f64,
    pub kind: EventKind,
    pub pixel_count: usize,
}

/// Recover markers as 8-connected components of exact marker colors.
/// Components are reported in raster order of their first pixel.
pub fn decode_markers(img: &SketchImage) -> Vec<DecodedMarker> {
    let (w, h) = (img.width as usize, img.height as usize);
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if seen[start] {
            continue;
        }
        let color = img.pixel((start % w) as u32, (start / w) as u32);
        let kind = match color {
            CLOSE_COLOR => EventKind::Close,
            OPEN_COLOR => EventKind::Open,
            _ => continue,
        };
        seen[start] = true;
        queue.push_back(start);
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            sx += x as f64;
            sy += y as f64;
            n += 1;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if !seen[j] && img.pixel(nx as u32, ny as u32) == color {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        out.push(DecodedMarker { x: sx / n as f64, y: sy / n as f64, kind, pixel_count: n });
    }
    out
}

/// Normalized time stored at a curve pixel, `None` for background, marker
/// pixels or out-of-bounds coordinates.
pub fn read_curve_time(img: &SketchImage, x: i64, y: i64) -> Option<f64> {
    let [r, _, _] = img.get(x, y)?;
    (r >= 1).then(|| r as f64 / 255.0)
}
