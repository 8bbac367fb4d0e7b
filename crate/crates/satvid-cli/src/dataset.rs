//! Loading the on-disk dataset layout produced by `satvid synth` (or
//! arranged by hand to match it): a manifest, a frame directory, point
//! annotations, and optionally the true homographies.

use satvid::dataio::{list_frame_files, load_annotations, load_frame_png, load_homographies, DatasetManifest, PointAnnotations};
use satvid::register::Homography;
use satvid::{Error, GrayFrame, Result};
use std::path::Path;

pub struct Dataset {
    pub manifest: DatasetManifest,
    pub frames: Vec<GrayFrame>,
    pub annotations: PointAnnotations,
    /// Frame-to-reference homographies; identity for every frame when the
    /// dataset ships none (already-stabilized footage).
    pub homographies: Vec<Homography>,
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let manifest = DatasetManifest::load(dir.join("manifest.txt"))?;
    let frames = load_frames_dir(&dir.join(&manifest.frames_dir))?;
    let annotations = load_annotations(dir.join(&manifest.annotations))?;
    let homographies = match &manifest.homographies {
        Some(rel) => {
            let h = load_homographies(dir.join(rel))?;
            if h.len() != frames.len() {
                return Err(Error::data(
                    "load_dataset",
                    format!("{} homographies for {} frames", h.len(), frames.len()),
                ));
            }
            h
        }
        None => vec![Homography::identity(); frames.len()],
    };
    Ok(Dataset { manifest, frames, annotations, homographies })
}

/// Loads every numbered PNG in `dir`, in frame order.
pub fn load_frames_dir(dir: &Path) -> Result<Vec<GrayFrame>> {
    let files = list_frame_files(dir)?;
    if files.is_empty() {
        return Err(Error::data("load_frames_dir", format!("no numbered .png frames in {}", dir.display())));
    }
    files.iter().map(load_frame_png).collect()
}
