use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One subject's recording: an ordered list of frame files plus the index of
/// the neutral (expressionless) frame within that list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubjectEntry {
    pub id: String,
    pub neutral_frame: usize,
    pub frames: Vec<PathBuf>,
}

/// Description of a keypoint dataset on disk.
///
/// `template_map` and `anchor_set` name either a built-in id or a JSON file
/// (resolved relative to the manifest's directory, like the frame paths).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dataset_id: String,
    pub template_map: String,
    pub anchor_set: String,
    pub subjects: Vec<SubjectEntry>,
}

impl DatasetManifest {
    /// Load and validate a manifest, resolving relative frame paths against
    /// the manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: DatasetManifest = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for subject in &mut manifest.subjects {
            for frame in &mut subject.frames {
                if frame.is_relative() {
                    *frame = base.join(&*frame);
                }
            }
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.subjects.is_empty() {
            return Err(Error::Manifest("no subjects".into()));
        }
        let mut ids = HashSet::new();
        for subject in &self.subjects {
            if !ids.insert(&subject.id) {
                return Err(Error::Manifest(format!("duplicate subject id `{}`", subject.id)));
            }
            if subject.frames.is_empty() {
                return Err(Error::Manifest(format!("subject `{}` has no frames", subject.id)));
            }
            if subject.neutral_frame >= subject.frames.len() {
                return Err(Error::Manifest(format!(
                    "subject `{}`: neutral frame {} not among its {} frame files",
                    subject.id,
                    subject.neutral_frame,
                    subject.frames.len()
                )));
            }
        }
        Ok(())
    }

    /// Convenience constructor for a one-subject dataset.
    pub fn single_subject(
        dataset_id: impl Into<String>,
        template_map: impl Into<String>,
        anchor_set: impl Into<String>,
        subject_id: impl Into<String>,
        neutral_frame: usize,
        frames: Vec<PathBuf>,
    ) -> Self {
        DatasetManifest {
            dataset_id: dataset_id.into(),
            template_map: template_map.into(),
            anchor_set: anchor_set.into(),
            subjects: vec![SubjectEntry {
                id: subject_id.into(),
                neutral_frame,
                frames,
            }],
        }
    }

    /// Neutral frame index for a subject, if present.
    pub fn neutral_frame_of(&self, subject_id: &str) -> Option<usize> {
        self.subjects
            .iter()
            .find(|s| s.id == subject_id)
            .map(|s| s.neutral_frame)
    }
}
