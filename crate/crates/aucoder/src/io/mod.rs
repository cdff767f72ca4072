//! Dataset ingestion: keypoint files, template maps, manifests and the
//! matrix CSV interchange format.
//!
//! Native keypoint files carry one `x,y` row per keypoint in the dataset's
//! own indexing. A [`TemplateMap`] lifts them onto the shared 68-slot
//! template; unmapped slots hold `(0, 0)` and are masked out so downstream
//! stages can tell "absent" from "did not move".

mod manifest;
mod matrix_csv;
mod template;

pub use manifest::{DatasetManifest, SubjectEntry};
pub use matrix_csv::{read_matrix_csv, write_matrix_csv};
pub use template::TemplateMap;

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{AuDictionary, DictionaryKind};
use crate::geometry::{AnchorSet, Point};
use crate::TEMPLATE_POINTS;

/// One face at one point in time, on the 68-slot template.
///
/// `mask[i] == false` means slot `i` is not annotated by the source dataset;
/// such slots always hold `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointFrame {
    pub subject_id: String,
    pub frame_index: usize,
    pub points: [Point; TEMPLATE_POINTS],
    pub mask: [bool; TEMPLATE_POINTS],
}

impl KeypointFrame {
    /// Frame with every slot annotated, from a full 68-point list.
    pub fn full(subject_id: impl Into<String>, frame_index: usize, points: [Point; 68]) -> Self {
        KeypointFrame {
            subject_id: subject_id.into(),
            frame_index,
            points,
            mask: [true; TEMPLATE_POINTS],
        }
    }
}

/// Parse a keypoint CSV: one `x,y` row per keypoint.
pub fn read_keypoint_file(path: &Path) -> Result<Vec<Point>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let x = fields.next().unwrap_or("");
        let y = fields
            .next()
            .ok_or_else(|| Error::parse(path, lineno + 1, "expected two fields `x,y`"))?;
        if fields.next().is_some() {
            return Err(Error::parse(path, lineno + 1, "expected two fields `x,y`"));
        }
        let x: f64 = x
            .trim()
            .parse()
            .map_err(|e| Error::parse(path, lineno + 1, format!("bad x coordinate: {e}")))?;
        let y: f64 = y
            .trim()
            .parse()
            .map_err(|e| Error::parse(path, lineno + 1, format!("bad y coordinate: {e}")))?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::parse(path, lineno + 1, "non-finite coordinate"));
        }
        points.push(Point::new(x, y));
    }
    Ok(points)
}

/// Write a keypoint CSV (inverse of [`read_keypoint_file`]).
pub fn write_keypoint_file(points: &[Point], path: &Path) -> Result<()> {
    let mut out = String::new();
    for p in points {
        out.push_str(&format!("{},{}\n", p.x, p.y));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Load every frame named by the manifest, remapped onto the 68-slot template.
///
/// Frame indices are positions within each subject's frame list. Loading is
/// deterministic: subjects and frames come out in manifest order.
pub fn load_frames(
    manifest: &DatasetManifest,
    template_map: &TemplateMap,
) -> Result<Vec<KeypointFrame>> {
    let mask = template_map.template_mask();
    let mut seen: HashSet<(String, usize)> = HashSet::new();
    let mut frames = Vec::new();
    for subject in &manifest.subjects {
        for (frame_index, file) in subject.frames.iter().enumerate() {
            if !seen.insert((subject.id.clone(), frame_index)) {
                return Err(Error::InvalidInput(format!(
                    "duplicate frame ({}, {frame_index})",
                    subject.id
                )));
            }
            let native = read_keypoint_file(file)?;
            if native.len() != template_map.native_count() {
                return Err(Error::Shape(format!(
                    "{}: expected {} keypoints, found {}",
                    file.display(),
                    template_map.native_count(),
                    native.len()
                )));
            }
            let mut points = [Point::new(0.0, 0.0); TEMPLATE_POINTS];
            for &(source, template) in template_map.pairs() {
                points[template] = native[source];
            }
            frames.push(KeypointFrame {
                subject_id: subject.id.clone(),
                frame_index,
                points,
                mask,
            });
        }
    }
    Ok(frames)
}

/// Load apex keypoint files plus a neutral file and build a displacement
/// dictionary with one column per apex file.
///
/// Every file must hold a full 68-point list. Columns keep the input order;
/// labels are the file stems. The frames run through the same registration
/// and neutral-subtraction pipeline as dataset features.
pub fn load_au_dictionary(
    paths: &[impl AsRef<Path>],
    neutral_path: &Path,
    anchors: &AnchorSet,
    kind: DictionaryKind,
) -> Result<AuDictionary> {
    if paths.is_empty() {
        return Err(Error::InvalidInput("empty dictionary: no apex files".into()));
    }
    let neutral = read_full_frame(neutral_path, 0)?;
    let mut labels = Vec::with_capacity(paths.len());
    let mut apex_frames = Vec::with_capacity(paths.len());
    for (i, path) in paths.iter().enumerate() {
        let path = path.as_ref();
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| format!("au{i}"));
        apex_frames.push(read_full_frame(path, i + 1)?);
        labels.push(label);
    }
    crate::features::build_au_dictionary(&apex_frames, &neutral, anchors, kind, labels)
}

fn read_full_frame(path: &Path, frame_index: usize) -> Result<KeypointFrame> {
    let points = read_keypoint_file(path)?;
    let points: [Point; TEMPLATE_POINTS] = points.try_into().map_err(|v: Vec<Point>| {
        Error::Shape(format!(
            "{}: expected {TEMPLATE_POINTS} keypoints, found {}",
            path.display(),
            v.len()
        ))
    })?;
    Ok(KeypointFrame::full("au", frame_index, points))
}
