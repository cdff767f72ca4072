//! Displacement features: registered frames minus the subject's neutral
//! frame, stacked into a `136 x m` matrix (x and y interleaved, so template
//! slot `k` occupies rows `2k` and `2k + 1`).

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{register_frame, AnchorSet};
use crate::io::{read_matrix_csv, write_matrix_csv, KeypointFrame};
use crate::{FEATURE_DIM, TEMPLATE_POINTS};

/// Identifies which frame a feature column came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub subject_id: String,
    pub frame_index: usize,
}

/// A `136 x m` matrix of neutral-relative displacements.
///
/// `row_mask` rows that are false are exactly zero in every column; both
/// rows of a keypoint share its presence bit.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub data: Array2<f64>,
    pub row_mask: [bool; FEATURE_DIM],
    pub column_meta: Vec<ColumnMeta>,
    pub dataset_id: String,
    /// Seed used by [`subsample_columns`], if this matrix is a subsample.
    pub subsample_seed: Option<u64>,
}

impl FeatureMatrix {
    pub fn new(
        data: Array2<f64>,
        row_mask: [bool; FEATURE_DIM],
        column_meta: Vec<ColumnMeta>,
        dataset_id: impl Into<String>,
    ) -> Result<Self> {
        if data.nrows() != FEATURE_DIM {
            return Err(Error::Shape(format!(
                "feature matrix must have {FEATURE_DIM} rows, got {}",
                data.nrows()
            )));
        }
        if data.ncols() == 0 {
            return Err(Error::InvalidInput("feature matrix with zero columns".into()));
        }
        if column_meta.len() != data.ncols() {
            return Err(Error::Shape(format!(
                "{} columns but {} column descriptors",
                data.ncols(),
                column_meta.len()
            )));
        }
        for (r, &present) in row_mask.iter().enumerate() {
            if !present && data.row(r).iter().any(|&v| v != 0.0) {
                return Err(Error::Mask(format!("masked-out row {r} holds nonzero values")));
            }
        }
        Ok(FeatureMatrix {
            data,
            row_mask,
            column_meta,
            dataset_id: dataset_id.into(),
            subsample_seed: None,
        })
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    /// Persist as a matrix CSV plus a `.meta.json` sidecar.
    pub fn save(&self, csv_path: &Path) -> Result<()> {
        write_matrix_csv(&self.data, csv_path)?;
        let sidecar = FeatureSidecar {
            dataset_id: self.dataset_id.clone(),
            row_mask: self.row_mask.to_vec(),
            columns: self.column_meta.clone(),
            subsample_seed: self.subsample_seed,
        };
        let text = serde_json::to_string_pretty(&sidecar)?;
        std::fs::write(sidecar_path(csv_path), text)
            .map_err(|e| Error::io(sidecar_path(csv_path), e))
    }

    pub fn load(csv_path: &Path) -> Result<Self> {
        let data = read_matrix_csv(csv_path)?;
        let sidecar_path = sidecar_path(csv_path);
        let text =
            std::fs::read_to_string(&sidecar_path).map_err(|e| Error::io(&sidecar_path, e))?;
        let sidecar: FeatureSidecar = serde_json::from_str(&text)?;
        let row_mask: [bool; FEATURE_DIM] = sidecar.row_mask.try_into().map_err(|v: Vec<bool>| {
            Error::Mask(format!("sidecar row mask has {} entries", v.len()))
        })?;
        let mut matrix = FeatureMatrix::new(data, row_mask, sidecar.columns, sidecar.dataset_id)?;
        matrix.subsample_seed = sidecar.subsample_seed;
        Ok(matrix)
    }
}

fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_os_string();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Serialize, Deserialize)]
struct FeatureSidecar {
    dataset_id: String,
    row_mask: Vec<bool>,
    columns: Vec<ColumnMeta>,
    subsample_seed: Option<u64>,
}

/// What an AU dictionary was compiled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DictionaryKind {
    /// Single action units (26 in the canonical manual set).
    Pure,
    /// Action units plus their combinations (113 in the canonical set).
    Comb,
    /// Anything user supplied.
    Custom,
}

/// A displacement dictionary: one column per action unit, same row layout
/// and masking rules as [`FeatureMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct AuDictionary {
    pub columns: Array2<f64>,
    pub labels: Vec<String>,
    pub row_mask: [bool; FEATURE_DIM],
    pub kind: DictionaryKind,
}

impl AuDictionary {
    pub fn len(&self) -> usize {
        self.columns.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.ncols() == 0
    }

    pub fn save(&self, csv_path: &Path) -> Result<()> {
        write_matrix_csv(&self.columns, csv_path)?;
        let sidecar = DictionarySidecar {
            labels: self.labels.clone(),
            row_mask: self.row_mask.to_vec(),
            kind: self.kind,
        };
        let text = serde_json::to_string_pretty(&sidecar)?;
        std::fs::write(sidecar_path(csv_path), text)
            .map_err(|e| Error::io(sidecar_path(csv_path), e))
    }

    pub fn load(csv_path: &Path) -> Result<Self> {
        let columns = read_matrix_csv(csv_path)?;
        if columns.nrows() != FEATURE_DIM {
            return Err(Error::Shape(format!(
                "dictionary must have {FEATURE_DIM} rows, got {}",
                columns.nrows()
            )));
        }
        let sidecar_path = sidecar_path(csv_path);
        let text =
            std::fs::read_to_string(&sidecar_path).map_err(|e| Error::io(&sidecar_path, e))?;
        let sidecar: DictionarySidecar = serde_json::from_str(&text)?;
        let row_mask: [bool; FEATURE_DIM] = sidecar.row_mask.try_into().map_err(|v: Vec<bool>| {
            Error::Mask(format!("sidecar row mask has {} entries", v.len()))
        })?;
        Ok(AuDictionary {
            columns,
            labels: sidecar.labels,
            row_mask,
            kind: sidecar.kind,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct DictionarySidecar {
    labels: Vec<String>,
    row_mask: Vec<bool>,
    kind: DictionaryKind,
}

/// Expand a 68-slot keypoint mask to the interleaved 136-row mask.
pub fn row_mask_from_keypoint_mask(mask: &[bool; TEMPLATE_POINTS]) -> [bool; FEATURE_DIM] {
    let mut rows = [false; FEATURE_DIM];
    for (k, &m) in mask.iter().enumerate() {
        rows[2 * k] = m;
        rows[2 * k + 1] = m;
    }
    rows
}

fn displacement_column(frame: &KeypointFrame, neutral: &KeypointFrame) -> Vec<f64> {
    let mut column = vec![0.0; FEATURE_DIM];
    for k in 0..TEMPLATE_POINTS {
        if frame.mask[k] {
            let d = frame.points[k] - neutral.points[k];
            column[2 * k] = d.x;
            column[2 * k + 1] = d.y;
        }
    }
    column
}

/// Assemble the feature matrix from registered frames.
///
/// Column `j` holds `frame - neutral` for one non-neutral frame; neutral
/// frames never contribute columns. Columns are ordered by
/// `(subject_id, frame_index)` regardless of input order.
pub fn build_features(
    frames: &[KeypointFrame],
    manifest: &crate::io::DatasetManifest,
) -> Result<FeatureMatrix> {
    if frames.is_empty() {
        return Err(Error::InvalidInput("no frames".into()));
    }
    let mask = frames[0].mask;
    let mut by_subject: BTreeMap<&str, Vec<&KeypointFrame>> = BTreeMap::new();
    for frame in frames {
        if frame.mask != mask {
            return Err(Error::Mask(format!(
                "subject `{}` frame {} has a different keypoint mask",
                frame.subject_id, frame.frame_index
            )));
        }
        by_subject.entry(&frame.subject_id).or_default().push(frame);
    }

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut column_meta = Vec::new();
    for (subject, mut subject_frames) in by_subject {
        let neutral_idx = manifest.neutral_frame_of(subject).ok_or_else(|| {
            Error::Manifest(format!("subject `{subject}` is not in the manifest"))
        })?;
        subject_frames.sort_by_key(|f| f.frame_index);
        let neutral = subject_frames
            .iter()
            .find(|f| f.frame_index == neutral_idx)
            .ok_or_else(|| Error::InvalidInput(format!("subject `{subject}` has no neutral frame")))?
            .to_owned();
        let mut seen = HashSet::new();
        for frame in &subject_frames {
            if frame.frame_index == neutral_idx {
                continue;
            }
            if !seen.insert(frame.frame_index) {
                return Err(Error::InvalidInput(format!(
                    "duplicate frame ({subject}, {})",
                    frame.frame_index
                )));
            }
            columns.push(displacement_column(frame, neutral));
            column_meta.push(ColumnMeta {
                subject_id: subject.to_string(),
                frame_index: frame.frame_index,
            });
        }
    }
    if columns.is_empty() {
        return Err(Error::InvalidInput(
            "no feature columns: every frame is a neutral frame".into(),
        ));
    }
    let m = columns.len();
    let mut data = Array2::zeros((FEATURE_DIM, m));
    for (j, column) in columns.iter().enumerate() {
        for (r, &v) in column.iter().enumerate() {
            data[(r, j)] = v;
        }
    }
    FeatureMatrix::new(data, row_mask_from_keypoint_mask(&mask), column_meta, &manifest.dataset_id)
}

/// Register apex and neutral frames, then compile apex-minus-neutral
/// displacement columns into a dictionary.
pub fn build_au_dictionary(
    apex_frames: &[KeypointFrame],
    neutral_frame: &KeypointFrame,
    anchors: &AnchorSet,
    kind: DictionaryKind,
    labels: Vec<String>,
) -> Result<AuDictionary> {
    if apex_frames.is_empty() {
        return Err(Error::InvalidInput("empty dictionary: no apex frames".into()));
    }
    if labels.len() != apex_frames.len() {
        return Err(Error::Shape(format!(
            "{} apex frames but {} labels",
            apex_frames.len(),
            labels.len()
        )));
    }
    let mask = neutral_frame.mask;
    for frame in apex_frames {
        if frame.subject_id != neutral_frame.subject_id {
            return Err(Error::InvalidInput(format!(
                "apex frames must share the neutral frame's subject, got `{}` vs `{}`",
                frame.subject_id, neutral_frame.subject_id
            )));
        }
        if frame.mask != mask {
            return Err(Error::Mask("apex frame mask differs from neutral".into()));
        }
    }
    let neutral_reg = register_frame(neutral_frame, anchors)?;
    let c = apex_frames.len();
    let mut columns = Array2::zeros((FEATURE_DIM, c));
    for (j, apex) in apex_frames.iter().enumerate() {
        let apex_reg = register_frame(apex, anchors)?;
        let column = displacement_column(&apex_reg, &neutral_reg);
        for (r, &v) in column.iter().enumerate() {
            columns[(r, j)] = v;
        }
    }
    Ok(AuDictionary {
        columns,
        labels,
        row_mask: row_mask_from_keypoint_mask(&mask),
        kind,
    })
}

/// Uniform sample of `count` columns without replacement.
///
/// Reproducible by construction: indices come from a partial Fisher-Yates
/// shuffle of `0..m` driven by `ChaCha8Rng::seed_from_u64(seed)`, where the
/// swap partner at position `i` is `i + (next_u64() % (m - i))`. The first
/// `count` positions of the shuffle are the sample, in shuffle order.
pub fn subsample_columns(x: &FeatureMatrix, count: usize, seed: u64) -> Result<FeatureMatrix> {
    let m = x.ncols();
    if count == 0 {
        return Err(Error::InvalidInput("subsample of zero columns".into()));
    }
    if count > m {
        return Err(Error::InvalidInput(format!(
            "cannot sample {count} columns from {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..m).collect();
    for i in 0..count {
        let j = i + (rng.next_u64() % (m - i) as u64) as usize;
        indices.swap(i, j);
    }
    let chosen = &indices[..count];
    let mut data = Array2::zeros((FEATURE_DIM, count));
    let mut column_meta = Vec::with_capacity(count);
    for (out_j, &src_j) in chosen.iter().enumerate() {
        data.column_mut(out_j).assign(&x.data.column(src_j));
        column_meta.push(x.column_meta[src_j].clone());
    }
    let mut out = FeatureMatrix::new(data, x.row_mask, column_meta, &x.dataset_id)?;
    out.subsample_seed = Some(seed);
    Ok(out)
}
