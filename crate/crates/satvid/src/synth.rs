//! Synthetic panchromatic video with exact ground truth: moving
//! Gaussian-profile vehicles on textured background, per-frame ego-motion
//! jitter, static clutter, and sensor noise. Every output is a pure
//! function of the scenario seed.

use crate::dataio::annotations::{AnnotationRecord, PointAnnotations};
use crate::dataio::convert::downscale;
use crate::dataio::{DatasetManifest, save_annotations, save_frame_png, save_homographies};
use crate::error::{Error, Result};
use crate::frame::GrayFrame;
use crate::register::Homography;
use crate::seeds;
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::path::Path;

/// A straight road segment vehicles drive along. Brightness is the road
/// surface gray level painted into the background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadSegment {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub brightness: f64,
}

impl RoadSegment {
    fn length(&self) -> f64 {
        ((self.x1 - self.x0).powi(2) + (self.y1 - self.y0).powi(2)).sqrt()
    }

    /// Position at arc-length parameter `s` from the segment start.
    fn at(&self, s: f64) -> (f64, f64) {
        let len = self.length();
        let t = s / len;
        (self.x0 + t * (self.x1 - self.x0), self.y0 + t * (self.y1 - self.y0))
    }

    fn distance_to(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (self.x1 - self.x0, self.y1 - self.y0);
        let len2 = dx * dx + dy * dy;
        let t = (((x - self.x0) * dx + (y - self.y0) * dy) / len2).clamp(0.0, 1.0);
        let (px, py) = (self.x0 + t * dx, self.y0 + t * dy);
        ((x - px).powi(2) + (y - py).powi(2)).sqrt()
    }
}

/// Full description of a synthetic scene. Generation is bit-reproducible
/// from `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub seed: u64,
    pub vehicle_count: usize,
    /// Blob diameter range in pixels; the intensity profile is Gaussian
    /// with sigma = size / 3.
    pub size_range: (f64, f64),
    /// Speed range in pixels per frame.
    pub speed_range: (f64, f64),
    /// Contrast range in gray levels, added (bright) or subtracted (dark).
    pub contrast_range: (f64, f64),
    /// Fraction of vehicles rendered darker than the background.
    pub dark_fraction: f64,
    pub roads: Vec<RoadSegment>,
    /// Static clutter spots per 1000 square pixels.
    pub clutter_density: f64,
    /// Max |tx|, |ty| of per-frame jitter, pixels.
    pub ego_translation: f64,
    /// Max |rotation| of per-frame jitter, degrees.
    pub ego_rotation_deg: f64,
    /// Additive Gaussian noise sigma, gray levels.
    pub noise_sigma: f64,
    /// Background gray-level range for the value-noise texture.
    pub background_range: (f64, f64),
    /// Value-noise lattice spacing, pixels.
    pub background_grid: usize,
    /// Fraction of vehicles spawned as close leader/follower pairs.
    pub convoy_fraction: f64,
    /// Leader/follower spacing range, pixels.
    pub convoy_gap: (f64, f64),
    /// Render-scale multiplier used by [`domain_pair`] for the
    /// coarse-resolution domain; plain [`generate`] ignores it.
    pub gsd_scale: f64,
}

impl ScenarioSpec {
    /// Mid-density scene used for training-at-desk-scale runs.
    pub fn default_scene(seed: u64) -> Self {
        ScenarioSpec {
            width: 192,
            height: 192,
            frame_count: 46,
            seed,
            vehicle_count: 14,
            size_range: (2.5, 6.0),
            speed_range: (0.7, 1.8),
            contrast_range: (45.0, 90.0),
            dark_fraction: 0.25,
            roads: vec![
                RoadSegment { x0: 16.0, y0: 48.0, x1: 176.0, y1: 48.0, brightness: 55.0 },
                RoadSegment { x0: 96.0, y0: 16.0, x1: 96.0, y1: 176.0, brightness: 60.0 },
                RoadSegment { x0: 24.0, y0: 160.0, x1: 168.0, y1: 104.0, brightness: 50.0 },
            ],
            clutter_density: 1.5,
            ego_translation: 2.0,
            ego_rotation_deg: 0.3,
            noise_sigma: 2.0,
            background_range: (70.0, 110.0),
            background_grid: 16,
            convoy_fraction: 0.0,
            convoy_gap: (3.0, 5.0),
            gsd_scale: 1.0,
        }
    }

    /// Close leader/follower pairs at 3 to 5 px spacing: the regime where
    /// thresholded blob extraction merges neighbours.
    pub fn dense_traffic(seed: u64) -> Self {
        let mut spec = Self::default_scene(seed);
        spec.vehicle_count = 16;
        spec.convoy_fraction = 1.0;
        spec.convoy_gap = (3.0, 5.0);
        spec.size_range = (2.5, 4.5);
        spec
    }

    /// Coarse-resolution source domain: rendered `gsd_scale` times larger,
    /// then downscaled by `1 / gsd_scale` via [`domain_pair`]. Distinct
    /// background statistics and layout from [`ScenarioSpec::domain_b`].
    pub fn domain_a(seed: u64) -> Self {
        let s = 5.0;
        ScenarioSpec {
            width: 192 * 5,
            height: 192 * 5,
            frame_count: 46,
            seed,
            vehicle_count: 14,
            size_range: (2.5 * s, 6.0 * s),
            speed_range: (0.7 * s, 1.8 * s),
            contrast_range: (50.0, 95.0),
            dark_fraction: 0.15,
            roads: vec![
                RoadSegment { x0: 80.0, y0: 240.0, x1: 880.0, y1: 240.0, brightness: 45.0 },
                RoadSegment { x0: 480.0, y0: 80.0, x1: 480.0, y1: 880.0, brightness: 50.0 },
                RoadSegment { x0: 120.0, y0: 800.0, x1: 840.0, y1: 520.0, brightness: 42.0 },
            ],
            clutter_density: 0.8,
            ego_translation: 2.0 * s,
            ego_rotation_deg: 0.3,
            noise_sigma: 2.0,
            background_range: (40.0, 85.0),
            background_grid: 64,
            convoy_fraction: 0.0,
            convoy_gap: (3.0 * s, 5.0 * s),
            gsd_scale: s,
        }
    }

    /// Target domain for transfer runs: different background, clutter, and
    /// traffic pattern from [`ScenarioSpec::domain_a`].
    pub fn domain_b(seed: u64) -> Self {
        ScenarioSpec {
            width: 192,
            height: 192,
            frame_count: 46,
            seed,
            vehicle_count: 12,
            size_range: (2.5, 5.0),
            speed_range: (0.8, 1.6),
            contrast_range: (40.0, 80.0),
            dark_fraction: 0.35,
            roads: vec![
                RoadSegment { x0: 16.0, y0: 140.0, x1: 176.0, y1: 140.0, brightness: 135.0 },
                RoadSegment { x0: 48.0, y0: 16.0, x1: 48.0, y1: 176.0, brightness: 140.0 },
                RoadSegment { x0: 30.0, y0: 30.0, x1: 170.0, y1: 90.0, brightness: 130.0 },
            ],
            clutter_density: 2.5,
            ego_translation: 2.0,
            ego_rotation_deg: 0.3,
            noise_sigma: 3.0,
            background_range: (100.0, 150.0),
            background_grid: 10,
            convoy_fraction: 0.0,
            convoy_gap: (3.0, 5.0),
            gsd_scale: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.width < 32 || self.height < 32 {
            return Err(Error::data("ScenarioSpec", "frame size below 32x32"));
        }
        if self.frame_count == 0 {
            return Err(Error::data("ScenarioSpec", "frame count must be positive"));
        }
        if self.vehicle_count > 0 && self.roads.is_empty() {
            return Err(Error::data("ScenarioSpec", "vehicles need at least one road"));
        }
        let ranges = [self.size_range, self.speed_range, self.contrast_range, self.convoy_gap];
        if ranges.iter().any(|&(lo, hi)| !(lo <= hi) || lo < 0.0) {
            return Err(Error::data("ScenarioSpec", "malformed range (lo > hi or negative)"));
        }
        if self.vehicle_count > 0 && self.speed_range.0 <= 0.0 {
            return Err(Error::data("ScenarioSpec", "speeds must be positive"));
        }
        if self.ego_translation > 3.0 * self.gsd_scale.max(1.0) || self.ego_rotation_deg > 0.5 {
            return Err(Error::data("ScenarioSpec", "ego-motion amplitude out of range"));
        }
        if !(0.0..=1.0).contains(&self.dark_fraction) || !(0.0..=1.0).contains(&self.convoy_fraction) {
            return Err(Error::data("ScenarioSpec", "fractions must be in [0, 1]"));
        }
        if self.noise_sigma < 0.0 || self.clutter_density < 0.0 {
            return Err(Error::data("ScenarioSpec", "negative noise or clutter density"));
        }
        if self.background_grid == 0 {
            return Err(Error::data("ScenarioSpec", "background grid spacing must be positive"));
        }
        Ok(())
    }
}

/// Generated scene: observed (jittered, noisy) frames, the exact per-frame
/// homographies in frame-to-reference convention, and vehicle-center
/// annotations in stabilized reference coordinates.
#[derive(Debug, Clone)]
pub struct SceneDataset {
    pub frames: Vec<GrayFrame>,
    pub homographies: Vec<Homography>,
    pub annotations: PointAnnotations,
}

struct Vehicle {
    road: usize,
    /// Arc-length offset at frame 0, quantized to 1/1024 px so per-frame
    /// positions stay exactly representable.
    s0: f64,
    /// Signed speed, px/frame (direction folded in).
    v: f64,
    /// None: runway mode (never reflects); Some(margin): triangle-wave
    /// reflection between `margin` and `len - margin`.
    reflect_margin: Option<f64>,
    sigma: f64,
    amplitude: f64,
}

impl Vehicle {
    fn position(&self, roads: &[RoadSegment], t: usize) -> (f64, f64) {
        let road = &roads[self.road];
        let s = self.s0 + self.v * t as f64;
        let s = match self.reflect_margin {
            None => s,
            Some(margin) => {
                let span = road.length() - 2.0 * margin;
                let period = 2.0 * span;
                let mut r = (s - margin).rem_euclid(period);
                if r > span {
                    r = period - r;
                }
                margin + r
            }
        };
        road.at(s)
    }
}

const VEHICLE_SUPPORT_SIGMAS: f64 = 4.0;
const ROAD_HALF_WIDTH: f64 = 2.0;
const SPAWN_MARGIN: f64 = 10.0;

fn quantize(v: f64) -> f64 {
    (v * 1024.0).round() / 1024.0
}

/// Rigid jitter transform mapping frame coordinates to reference
/// coordinates: rotate by `deg` about the frame center, then translate.
fn jitter_homography(w: usize, h: usize, deg: f64, tx: f64, ty: f64) -> Homography {
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let (s, c) = deg.to_radians().sin_cos();
    let m = Matrix3::new(
        c,
        -s,
        cx - c * cx + s * cy + tx,
        s,
        c,
        cy - s * cx - c * cy + ty,
        0.0,
        0.0,
        1.0,
    );
    Homography::from_matrix(m).expect("rigid transforms are invertible")
}

/// Static scene layers (background texture, roads, clutter) on a canvas
/// extended by `margin` on every side, in gray levels.
struct Canvas {
    margin: usize,
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Canvas {
    fn sample(&self, x: f64, y: f64) -> f64 {
        let x = (x + self.margin as f64).clamp(0.0, (self.width - 1) as f64);
        let y = (y + self.margin as f64).clamp(0.0, (self.height - 1) as f64);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let (fx, fy) = (x - x0 as f64, y - y0 as f64);
        let at = |xx: usize, yy: usize| self.data[yy * self.width + xx];
        at(x0, y0) * (1.0 - fx) * (1.0 - fy)
            + at(x1, y0) * fx * (1.0 - fy)
            + at(x0, y1) * (1.0 - fx) * fy
            + at(x1, y1) * fx * fy
    }
}

fn render_static_canvas(spec: &ScenarioSpec, margin: usize) -> Canvas {
    let width = spec.width + 2 * margin;
    let height = spec.height + 2 * margin;
    let mut data = vec![0.0f64; width * height];

    // Low-pass value noise: random lattice values, bilinear between nodes.
    let g = spec.background_grid;
    let nodes_x = width / g + 2;
    let nodes_y = height / g + 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(spec.seed, "background"));
    let (lo, hi) = spec.background_range;
    let lattice: Vec<f64> = (0..nodes_x * nodes_y).map(|_| rng.gen_range(lo..=hi)).collect();
    for y in 0..height {
        for x in 0..width {
            let gx = x as f64 / g as f64;
            let gy = y as f64 / g as f64;
            let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
            let (fx, fy) = (gx - ix as f64, gy - iy as f64);
            let at = |xx: usize, yy: usize| lattice[yy * nodes_x + xx];
            data[y * width + x] = at(ix, iy) * (1.0 - fx) * (1.0 - fy)
                + at(ix + 1, iy) * fx * (1.0 - fy)
                + at(ix, iy + 1) * (1.0 - fx) * fy
                + at(ix + 1, iy + 1) * fx * fy;
        }
    }

    // Roads: soft-edged constant-albedo bands.
    for road in &spec.roads {
        for y in 0..height {
            for x in 0..width {
                let sx = x as f64 - margin as f64;
                let sy = y as f64 - margin as f64;
                let d = road.distance_to(sx, sy);
                let w = (ROAD_HALF_WIDTH + 0.5 - d).clamp(0.0, 1.0);
                if w > 0.0 {
                    let v = &mut data[y * width + x];
                    *v = *v * (1.0 - w) + road.brightness * w;
                }
            }
        }
    }

    // Static clutter: compact Gaussian spots of either contrast sign; a
    // fraction sits on roads as parked vehicle look-alikes.
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(spec.seed, "clutter"));
    let count = (spec.clutter_density * (spec.width * spec.height) as f64 / 1000.0).round() as usize;
    for _ in 0..count {
        let on_road = !spec.roads.is_empty() && rng.gen_bool(0.3);
        let (cx, cy) = if on_road {
            let road = &spec.roads[rng.gen_range(0..spec.roads.len())];
            let s = rng.gen_range(0.0..=road.length());
            road.at(s)
        } else {
            (rng.gen_range(0.0..spec.width as f64), rng.gen_range(0.0..spec.height as f64))
        };
        let sigma = rng.gen_range(0.5..=spec.size_range.1 / 3.0);
        let amp = rng.gen_range(25.0..=70.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let r = (VEHICLE_SUPPORT_SIGMAS * sigma).ceil() as i64;
        let (ccx, ccy) = (cx + margin as f64, cy + margin as f64);
        for dy in -r..=r {
            for dx in -r..=r {
                let px = ccx.round() as i64 + dx;
                let py = ccy.round() as i64 + dy;
                if px < 0 || py < 0 || px >= width as i64 || py >= height as i64 {
                    continue;
                }
                let d2 = (px as f64 - ccx).powi(2) + (py as f64 - ccy).powi(2);
                data[py as usize * width + px as usize] += amp * (-d2 / (2.0 * sigma * sigma)).exp();
            }
        }
    }

    Canvas { margin, width, height, data }
}

fn spawn_vehicles(spec: &ScenarioSpec) -> Vec<Vehicle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(spec.seed, "vehicles"));
    let travel = |v: f64| v * (spec.frame_count - 1) as f64;
    let mut vehicles = Vec::with_capacity(spec.vehicle_count);
    while vehicles.len() < spec.vehicle_count {
        let paired = vehicles.len() + 1 < spec.vehicle_count && rng.gen_bool(spec.convoy_fraction);
        let road_idx = rng.gen_range(0..spec.roads.len());
        let road = &spec.roads[road_idx];
        let len = road.length();
        let v = rng.gen_range(spec.speed_range.0..=spec.speed_range.1);
        let gap = rng.gen_range(spec.convoy_gap.0..=spec.convoy_gap.1);
        let dir: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        // Runway spawn when the segment is long enough for the whole clip;
        // otherwise bounce between the margins.
        let extra = if paired { gap } else { 0.0 };
        let usable = len - 2.0 * SPAWN_MARGIN - travel(v) - extra;
        let make = |s0: f64, v: f64, reflect: Option<f64>, rng: &mut ChaCha8Rng| {
            let size = rng.gen_range(spec.size_range.0..=spec.size_range.1);
            let contrast = rng.gen_range(spec.contrast_range.0..=spec.contrast_range.1);
            let dark = rng.gen_bool(spec.dark_fraction);
            Vehicle {
                road: road_idx,
                s0: quantize(s0),
                v,
                reflect_margin: reflect,
                sigma: size / 3.0,
                amplitude: if dark { -contrast } else { contrast },
            }
        };
        if usable > 0.0 {
            let lead_lo = SPAWN_MARGIN + extra.max(0.0) * if dir > 0.0 { 1.0 } else { 0.0 };
            let s0 = rng.gen_range(lead_lo..=lead_lo + usable);
            let s0 = if dir > 0.0 { s0 } else { len - s0 };
            vehicles.push(make(s0, dir * v, None, &mut rng));
            if paired {
                vehicles.push(make(s0 - dir * gap, dir * v, None, &mut rng));
            }
        } else {
            let s0 = rng.gen_range(SPAWN_MARGIN..=len - SPAWN_MARGIN);
            vehicles.push(make(s0, dir * v, Some(SPAWN_MARGIN), &mut rng));
            if paired {
                vehicles.push(make(s0 - dir * gap, dir * v, Some(SPAWN_MARGIN), &mut rng));
            }
        }
    }
    vehicles
}

/// Renders the full scene per the spec. Frame 0 is the reference frame
/// (identity homography); later frames carry random rigid jitter.
pub fn generate(spec: &ScenarioSpec) -> Result<SceneDataset> {
    spec.validate()?;
    let reach = spec.ego_translation
        + (spec.ego_rotation_deg.to_radians().sin().abs())
            * 0.5
            * ((spec.width * spec.width + spec.height * spec.height) as f64).sqrt()
        + 2.0;
    let margin = reach.ceil() as usize;
    let canvas = render_static_canvas(spec, margin);
    let vehicles = spawn_vehicles(spec);

    let mut jitter_rng = ChaCha8Rng::seed_from_u64(seeds::derive(spec.seed, "jitter"));
    let mut frames = Vec::with_capacity(spec.frame_count);
    let mut homographies = Vec::with_capacity(spec.frame_count);
    let mut records = Vec::new();

    for t in 0..spec.frame_count {
        let h = if t == 0 {
            Homography::identity()
        } else {
            let deg = jitter_rng.gen_range(-spec.ego_rotation_deg..=spec.ego_rotation_deg);
            let tx = jitter_rng.gen_range(-spec.ego_translation..=spec.ego_translation);
            let ty = jitter_rng.gen_range(-spec.ego_translation..=spec.ego_translation);
            jitter_homography(spec.width, spec.height, deg, tx, ty)
        };

        let centers: Vec<(f64, f64)> = vehicles.iter().map(|v| v.position(&spec.roads, t)).collect();
        for (id, &(cx, cy)) in centers.iter().enumerate() {
            records.push(AnnotationRecord {
                frame_index: t,
                x: cx as f32,
                y: cy as f32,
                track_id: Some(id as u64),
            });
        }

        // Static layers: inverse-map every frame pixel through the jitter.
        let mut pixels = vec![0.0f64; spec.width * spec.height];
        for y in 0..spec.height {
            for x in 0..spec.width {
                let (sx, sy) = h.apply(x as f64, y as f64);
                pixels[y * spec.width + x] = canvas.sample(sx, sy);
            }
        }
        // Vehicles: analytic Gaussian profiles evaluated in scene
        // coordinates, iterated over the frame-space bounding box.
        let inv = h.inverse().expect("jitter transforms are invertible");
        for (vehicle, &(cx, cy)) in vehicles.iter().zip(&centers) {
            let (fx, fy) = inv.apply(cx, cy);
            let r = (VEHICLE_SUPPORT_SIGMAS * vehicle.sigma).ceil() as i64 + 1;
            let (ix, iy) = (fx.round() as i64, fy.round() as i64);
            for py in (iy - r).max(0)..=(iy + r).min(spec.height as i64 - 1) {
                for px in (ix - r).max(0)..=(ix + r).min(spec.width as i64 - 1) {
                    let (sx, sy) = h.apply(px as f64, py as f64);
                    let d2 = (sx - cx).powi(2) + (sy - cy).powi(2);
                    if d2 <= (VEHICLE_SUPPORT_SIGMAS * vehicle.sigma).powi(2) {
                        pixels[py as usize * spec.width + px as usize] +=
                            vehicle.amplitude * (-d2 / (2.0 * vehicle.sigma * vehicle.sigma)).exp();
                    }
                }
            }
        }

        // Sensor noise, then quantization, so the dynamic range matches
        // converted real footage.
        let mut frame = GrayFrame::new(spec.width, spec.height);
        if spec.noise_sigma > 0.0 {
            let mut noise_rng =
                ChaCha8Rng::seed_from_u64(seeds::derive_indexed(spec.seed, "noise", t as u64));
            let normal = Normal::new(0.0, spec.noise_sigma)
                .map_err(|e| Error::numeric("generate", format!("noise sigma: {e}")))?;
            for (dst, &v) in frame.data_mut().iter_mut().zip(&pixels) {
                *dst = (v + normal.sample(&mut noise_rng)).round().clamp(0.0, 255.0) as u8;
            }
        } else {
            for (dst, &v) in frame.data_mut().iter_mut().zip(&pixels) {
                *dst = v.round().clamp(0.0, 255.0) as u8;
            }
        }
        frames.push(frame);
        homographies.push(h);
    }

    Ok(SceneDataset { frames, homographies, annotations: PointAnnotations::new(records)? })
}

/// Generates the coarse source domain (A) and the target domain (B) from
/// disjoint seed streams. A is rendered at `gsd_scale` times the target
/// resolution, downscaled by the reciprocal factor; its annotations and
/// homographies are mapped into the downscaled coordinate system.
pub fn domain_pair(seed: u64) -> Result<(SceneDataset, SceneDataset)> {
    let spec_a = ScenarioSpec::domain_a(seeds::derive(seed, "domain-a"));
    let spec_b = ScenarioSpec::domain_b(seeds::derive(seed, "domain-b"));
    let big = generate(&spec_a)?;
    let factor = 1.0 / spec_a.gsd_scale;

    let mut frames = Vec::with_capacity(big.frames.len());
    for f in &big.frames {
        frames.push(downscale(f, factor)?);
    }
    let (out_w, out_h) = (frames[0].width() as f64, frames[0].height() as f64);
    // Area-average pixel-center alignment: x_small = (x_big + 0.5) * f' - 0.5
    // with f' the exact realized ratio.
    let ax = out_w / spec_a.width as f64;
    let ay = out_h / spec_a.height as f64;
    let scale = Matrix3::new(ax, 0.0, 0.5 * ax - 0.5, 0.0, ay, 0.5 * ay - 0.5, 0.0, 0.0, 1.0);
    let scale_inv = scale.try_inverse().expect("scale transform is invertible");

    let homographies: Vec<Homography> = big
        .homographies
        .iter()
        .map(|h| Homography::from_matrix(scale * h.matrix() * scale_inv))
        .collect::<Result<_>>()?;
    let records = big
        .annotations
        .records()
        .iter()
        .map(|r| AnnotationRecord {
            frame_index: r.frame_index,
            x: ((f64::from(r.x) + 0.5) * ax - 0.5) as f32,
            y: ((f64::from(r.y) + 0.5) * ay - 0.5) as f32,
            track_id: r.track_id,
        })
        .collect();
    let a = SceneDataset { frames, homographies, annotations: PointAnnotations::new(records)? };
    let b = generate(&spec_b)?;
    Ok((a, b))
}

/// Writes the on-disk dataset layout: `frames/NNNNNN.png`,
/// `annotations.csv`, `homographies.txt`, and `manifest.txt`. Returns the
/// manifest path.
pub fn write_dataset(
    dir: impl AsRef<Path>,
    data: &SceneDataset,
    channels: usize,
    skip: usize,
    roobi_size: usize,
    theta: f64,
    split_seed: u64,
) -> Result<std::path::PathBuf> {
    let dir = dir.as_ref();
    let frames_dir = dir.join("frames");
    std::fs::create_dir_all(&frames_dir).map_err(|e| Error::io(&frames_dir, e))?;
    for (i, frame) in data.frames.iter().enumerate() {
        save_frame_png(frame, frames_dir.join(crate::dataio::frame_file_name(i)))?;
    }
    save_annotations(dir.join("annotations.csv"), &data.annotations)?;
    save_homographies(dir.join("homographies.txt"), &data.homographies)?;
    let manifest = DatasetManifest {
        frames_dir: "frames".into(),
        annotations: "annotations.csv".into(),
        homographies: Some("homographies.txt".into()),
        channels,
        skip,
        roobi_size,
        theta,
        split_seed,
    };
    let path = dir.join("manifest.txt");
    manifest.save(&path)?;
    Ok(path)
}
