//! Point annotations: vehicle center points per frame, with optional track
//! ids, stored as CSV.

use crate::error::{Error, Result};
use std::collections::HashSet;
use std::path::Path;

/// One annotated vehicle center in one frame. Coordinates are continuous
/// pixel positions in stabilized (reference) frame coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationRecord {
    pub frame_index: usize,
    pub x: f32,
    pub y: f32,
    pub track_id: Option<u64>,
}

/// The annotation set of a sequence. `(frame, track_id)` pairs are unique.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointAnnotations {
    records: Vec<AnnotationRecord>,
}

impl PointAnnotations {
    /// Wraps records, enforcing the per-frame track-id uniqueness invariant.
    pub fn new(records: Vec<AnnotationRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &records {
            if let Some(id) = r.track_id {
                if !seen.insert((r.frame_index, id)) {
                    return Err(Error::data(
                        "PointAnnotations",
                        format!("duplicate track id {id} in frame {}", r.frame_index),
                    ));
                }
            }
        }
        Ok(PointAnnotations { records })
    }

    pub fn records(&self) -> &[AnnotationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Points of one frame, in record order.
    pub fn points_in_frame(&self, frame_index: usize) -> Vec<(f32, f32)> {
        self.records
            .iter()
            .filter(|r| r.frame_index == frame_index)
            .map(|r| (r.x, r.y))
            .collect()
    }

    pub fn max_frame_index(&self) -> Option<usize> {
        self.records.iter().map(|r| r.frame_index).max()
    }

    /// Validates that every coordinate lies in `[0, width) x [0, height)`.
    pub fn check_bounds(&self, width: usize, height: usize) -> Result<()> {
        for (i, r) in self.records.iter().enumerate() {
            let ok = r.x >= 0.0 && (r.x as f64) < width as f64 && r.y >= 0.0 && (r.y as f64) < height as f64;
            if !ok {
                return Err(Error::data(
                    "PointAnnotations",
                    format!("record {i} (frame {}) at ({}, {}) outside {width}x{height}", r.frame_index, r.x, r.y),
                ));
            }
        }
        Ok(())
    }
}

const HEADER_PLAIN: &str = "frame,x,y";
const HEADER_TRACKED: &str = "frame,x,y,track_id";

/// Parses annotation CSV. Line numbers in errors are 1-based and include
/// the header.
pub fn parse_annotations(text: &str) -> Result<PointAnnotations> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::data("annotations", "empty file, expected a header line"))?;
    let tracked = match header.trim_end() {
        HEADER_PLAIN => false,
        HEADER_TRACKED => true,
        other => {
            return Err(Error::data(
                "annotations",
                format!("line 1: expected header `{HEADER_PLAIN}` or `{HEADER_TRACKED}`, got `{other}`"),
            ))
        }
    };
    let mut records = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = if tracked { 4 } else { 3 };
        if fields.len() != expected {
            return Err(Error::data(
                "annotations",
                format!("line {line_no}: expected {expected} fields, got {}", fields.len()),
            ));
        }
        let frame_index = fields[0].trim().parse::<usize>().map_err(|_| {
            Error::data("annotations", format!("line {line_no}: bad frame index `{}`", fields[0]))
        })?;
        let parse_coord = |s: &str, name: &str| -> Result<f32> {
            let v = s.trim().parse::<f32>().map_err(|_| {
                Error::data("annotations", format!("line {line_no}: bad {name} coordinate `{s}`"))
            })?;
            if !v.is_finite() {
                return Err(Error::data("annotations", format!("line {line_no}: non-finite {name} coordinate")));
            }
            Ok(v)
        };
        let x = parse_coord(fields[1], "x")?;
        let y = parse_coord(fields[2], "y")?;
        let track_id = if tracked && !fields[3].trim().is_empty() {
            Some(fields[3].trim().parse::<u64>().map_err(|_| {
                Error::data("annotations", format!("line {line_no}: bad track id `{}`", fields[3]))
            })?)
        } else {
            None
        };
        records.push(AnnotationRecord { frame_index, x, y, track_id });
    }
    PointAnnotations::new(records)
}

/// Serializes annotations; emits the track-id column when any record has
/// one. Float formatting uses the shortest round-trippable form.
pub fn format_annotations(annotations: &PointAnnotations) -> String {
    let tracked = annotations.records().iter().any(|r| r.track_id.is_some());
    let mut out = String::from(if tracked { HEADER_TRACKED } else { HEADER_PLAIN });
    out.push('\n');
    for r in annotations.records() {
        if tracked {
            match r.track_id {
                Some(id) => out.push_str(&format!("{},{},{},{}\n", r.frame_index, r.x, r.y, id)),
                None => out.push_str(&format!("{},{},{},\n", r.frame_index, r.x, r.y)),
            }
        } else {
            out.push_str(&format!("{},{},{}\n", r.frame_index, r.x, r.y));
        }
    }
    out
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<PointAnnotations> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(&text)
}

pub fn save_annotations(path: impl AsRef<Path>, annotations: &PointAnnotations) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_annotations(annotations)).map_err(|e| Error::io(path, e))
}

pub const DEFAULT_MIN_DISPLACEMENT: f64 = 3.0;
pub const DEFAULT_MOTION_WINDOW: usize = 5;

/// Keeps a record iff its track reaches a net Euclidean displacement of at
/// least `min_disp` pixels between this frame and some frame at most
/// `window` frames away (either direction). Requires track ids on every
/// record.
pub fn filter_moving(
    annotations: &PointAnnotations,
    min_disp: f64,
    window: usize,
) -> Result<PointAnnotations> {
    if annotations.records().iter().any(|r| r.track_id.is_none()) {
        return Err(Error::data(
            "filter_moving",
            "records without track ids; disable the motion filter for untracked annotations",
        ));
    }
    let records = annotations.records();
    let mut by_track: std::collections::HashMap<u64, Vec<usize>> = std::collections::HashMap::new();
    for (i, r) in records.iter().enumerate() {
        by_track.entry(r.track_id.unwrap()).or_default().push(i);
    }
    let mut keep = vec![false; records.len()];
    for indices in by_track.values() {
        for &i in indices {
            let a = &records[i];
            for &j in indices {
                let b = &records[j];
                if a.frame_index.abs_diff(b.frame_index) > window {
                    continue;
                }
                let d = ((f64::from(a.x) - f64::from(b.x)).powi(2)
                    + (f64::from(a.y) - f64::from(b.y)).powi(2))
                .sqrt();
                if d >= min_disp {
                    keep[i] = true;
                    break;
                }
            }
        }
    }
    let kept = records.iter().zip(&keep).filter(|(_, &k)| k).map(|(r, _)| r.clone()).collect();
    PointAnnotations::new(kept)
}
