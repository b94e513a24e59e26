//! Index of the files written into an output directory.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::table::write_json;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub command: String,
    pub profile: String,
    pub seed: u64,
    pub replicates: usize,
    pub config: String,
}

/// `manifest.json`: output file name → provenance. Entries from earlier
/// commands writing into the same directory are kept.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: BTreeMap<String, ManifestEntry>,
}

impl Manifest {
    pub const FILE: &'static str = "manifest.json";

    pub fn load_or_default(dir: &Path) -> Result<Self> {
        let path = dir.join(Self::FILE);
        if path.exists() {
            Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
        } else {
            Ok(Self::default())
        }
    }

    pub fn insert(&mut self, file: impl Into<String>, entry: ManifestEntry) {
        self.files.insert(file.into(), entry);
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_json(self, &dir.join(Self::FILE))
    }
}
