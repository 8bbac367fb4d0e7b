//! Dataset ingest and sample assembly: annotation CSV, bit-depth
//! conversion, tiling, frame stacks, motion filtering, and augmentation.

pub mod annotations;
pub mod augment;
pub mod convert;
pub mod files;
pub mod stacks;
pub mod tiles;

pub use annotations::{
    filter_moving, format_annotations, load_annotations, parse_annotations, save_annotations, AnnotationRecord,
    PointAnnotations, DEFAULT_MIN_DISPLACEMENT, DEFAULT_MOTION_WINDOW,
};
pub use augment::{augment, random_op, AugmentOp};
pub use convert::{convert_16_to_8, downscale};
pub use files::{
    frame_file_name, list_frame_files, load_frame16_png, load_frame_png, load_homographies, save_frame_png,
    save_homographies,
};
pub use stacks::{make_stacks, FrameStack, StackSummary};
pub use tiles::{extract_tile, reassemble_tiles, tile_roobis, Roobi, Split};

use crate::error::{Error, Result};
use std::path::Path;

/// Dataset descriptor, stored as `key=value` lines next to the frames.
/// Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub frames_dir: String,
    pub annotations: String,
    /// True-homography sidecar (present for synthetic datasets).
    pub homographies: Option<String>,
    pub channels: usize,
    pub skip: usize,
    pub roobi_size: usize,
    pub theta: f64,
    pub split_seed: u64,
}

impl DatasetManifest {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("frames_dir={}\n", self.frames_dir));
        out.push_str(&format!("annotations={}\n", self.annotations));
        if let Some(h) = &self.homographies {
            out.push_str(&format!("homographies={h}\n"));
        }
        out.push_str(&format!("channels={}\n", self.channels));
        out.push_str(&format!("skip={}\n", self.skip));
        out.push_str(&format!("roobi_size={}\n", self.roobi_size));
        out.push_str(&format!("theta={}\n", self.theta));
        out.push_str(&format!("split_seed={}\n", self.split_seed));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut map = std::collections::HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::data("DatasetManifest", format!("line {}: expected key=value", i + 1)))?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        let take = |key: &str| -> Result<String> {
            map.get(key).cloned().ok_or_else(|| Error::data("DatasetManifest", format!("missing key `{key}`")))
        };
        let parse_num = |key: &str| -> Result<usize> {
            take(key)?
                .parse::<usize>()
                .map_err(|_| Error::data("DatasetManifest", format!("key `{key}` is not an integer")))
        };
        Ok(DatasetManifest {
            frames_dir: take("frames_dir")?,
            annotations: take("annotations")?,
            homographies: map.get("homographies").cloned(),
            channels: parse_num("channels")?,
            skip: parse_num("skip")?,
            roobi_size: parse_num("roobi_size")?,
            theta: take("theta")?
                .parse::<f64>()
                .map_err(|_| Error::data("DatasetManifest", "key `theta` is not a number"))?,
            split_seed: take("split_seed")?
                .parse::<u64>()
                .map_err(|_| Error::data("DatasetManifest", "key `split_seed` is not an integer"))?,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> DatasetManifest {
        DatasetManifest {
            frames_dir: "frames".into(),
            annotations: "annotations.csv".into(),
            homographies: Some("homographies.txt".into()),
            channels: 5,
            skip: 1,
            roobi_size: 64,
            theta: 4.0,
            split_seed: 11,
        }
    }

    #[test]
    fn manifest_text_roundtrip() {
        let m = manifest();
        assert_eq!(DatasetManifest::from_text(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn manifest_without_homographies_roundtrips() {
        let mut m = manifest();
        m.homographies = None;
        assert_eq!(DatasetManifest::from_text(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn missing_key_is_reported() {
        let err = DatasetManifest::from_text("frames_dir=frames\n").unwrap_err();
        assert!(err.to_string().contains("missing key"));
    }
}
