use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TEMPLATE_POINTS;

/// Mapping from a dataset's native keypoint indices onto the 68-slot template.
///
/// Three maps ship built in:
///
/// * `"ck"` — identity, 68 native points;
/// * `"disfa"` — 66 native points; the two inner-lip corner slots (60, 64)
///   are absent;
/// * `"bp4d"` — 49 native points; the jawline slots (0..=16) and the two
///   inner-lip corners are absent.
///
/// Custom layouts load from JSON via [`TemplateMap::from_json_file`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateMap {
    dataset_id: String,
    /// `(source_index, template_index)` pairs.
    index_map: Vec<(usize, usize)>,
}

impl TemplateMap {
    /// Build a map from explicit `(source_index, template_index)` pairs.
    pub fn new(dataset_id: impl Into<String>, index_map: Vec<(usize, usize)>) -> Result<Self> {
        let map = TemplateMap {
            dataset_id: dataset_id.into(),
            index_map,
        };
        map.validate()?;
        Ok(map)
    }

    /// One of the built-in maps: `"ck"`, `"disfa"` or `"bp4d"`.
    pub fn builtin(id: &str) -> Result<Self> {
        let slots: Vec<usize> = match id {
            "ck" => (0..TEMPLATE_POINTS).collect(),
            "disfa" => (0..TEMPLATE_POINTS).filter(|&t| t != 60 && t != 64).collect(),
            "bp4d" => (17..TEMPLATE_POINTS).filter(|&t| t != 60 && t != 64).collect(),
            other => {
                return Err(Error::TemplateMap(format!(
                    "unknown built-in template map `{other}` (expected ck, disfa or bp4d)"
                )))
            }
        };
        let index_map = slots.into_iter().enumerate().collect();
        TemplateMap::new(id, index_map)
    }

    /// Resolve a manifest's `template_map` field: a built-in id or a path to
    /// a JSON map file.
    pub fn resolve(spec: &str, base_dir: &Path) -> Result<Self> {
        match spec {
            "ck" | "disfa" | "bp4d" => TemplateMap::builtin(spec),
            other => {
                let path = base_dir.join(other);
                TemplateMap::from_json_file(&path)
            }
        }
    }

    /// Load a custom map from a JSON file with fields `dataset_id` and
    /// `index_map` (a list of `[source_index, template_index]` pairs).
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let map: TemplateMap = serde_json::from_str(&text)?;
        map.validate()?;
        Ok(map)
    }

    fn validate(&self) -> Result<()> {
        if self.index_map.is_empty() {
            return Err(Error::TemplateMap("empty index map".into()));
        }
        let mut sources = HashSet::new();
        let mut templates = HashSet::new();
        for &(source, template) in &self.index_map {
            if template >= TEMPLATE_POINTS {
                return Err(Error::TemplateMap(format!(
                    "template index {template} out of range 0..{TEMPLATE_POINTS}"
                )));
            }
            if !sources.insert(source) {
                return Err(Error::TemplateMap(format!("duplicate source index {source}")));
            }
            if !templates.insert(template) {
                return Err(Error::TemplateMap(format!(
                    "duplicate template index {template}"
                )));
            }
        }
        if !sources.iter().all(|&s| s < self.index_map.len()) {
            return Err(Error::TemplateMap(format!(
                "source indices must cover 0..{} exactly",
                self.index_map.len()
            )));
        }
        Ok(())
    }

    pub fn dataset_id(&self) -> &str {
        &self.dataset_id
    }

    /// Number of keypoints in the native layout.
    pub fn native_count(&self) -> usize {
        self.index_map.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.index_map
    }

    /// Template-slot presence mask implied by this map.
    pub fn template_mask(&self) -> [bool; TEMPLATE_POINTS] {
        let mut mask = [false; TEMPLATE_POINTS];
        for &(_, template) in &self.index_map {
            mask[template] = true;
        }
        mask
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_ids_resolve() {
        assert!(TemplateMap::builtin("ck").is_ok());
        assert!(TemplateMap::builtin("disfa").is_ok());
        assert!(TemplateMap::builtin("bp4d").is_ok());
        assert!(TemplateMap::builtin("nope").is_err());
    }

    #[test]
    fn duplicate_template_index_rejected() {
        let err = TemplateMap::new("x", vec![(0, 5), (1, 5)]).unwrap_err();
        assert!(err.to_string().contains("duplicate template index"));
    }

    #[test]
    fn out_of_range_template_index_rejected() {
        let err = TemplateMap::new("x", vec![(0, 68)]).unwrap_err();
        assert!(err.to_string().contains("out of range"));
    }

    #[test]
    fn custom_map_round_trips_through_json() {
        let map = TemplateMap::new("tiny", vec![(0, 10), (1, 20), (2, 30)]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.json");
        std::fs::write(&path, serde_json::to_string(&map).unwrap()).unwrap();
        let loaded = TemplateMap::from_json_file(&path).unwrap();
        assert_eq!(loaded, map);
        assert_eq!(loaded.native_count(), 3);
    }
}
