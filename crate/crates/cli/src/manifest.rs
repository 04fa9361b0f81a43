use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Enough to replay a run: the arguments, the effective configuration and
/// digests of everything read.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub catalog_sha256: Option<String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<String>,
    pub elapsed_secs: f64,
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(argv: &[String], seed: u64) -> Self {
        Self {
            command: String::new(),
            argv: argv.to_vec(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            config: serde_json::Value::Null,
            catalog_sha256: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            elapsed_secs: 0.0,
        }
    }

    pub fn add_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(FileDigest { path: path.display().to_string(), sha256: sha256(bytes) });
    }

    /// Digests of the files making up a dataset directory.
    pub fn add_dataset(&mut self, dir: &Path) {
        for f in ["graphs.gdoc", "labels.tsv"] {
            let p = dir.join(f);
            if let Ok(bytes) = fs::read(&p) {
                self.add_input(&p, &bytes);
            }
        }
    }

    pub fn set_catalog(&mut self, text: &str) {
        self.catalog_sha256 = Some(sha256(text.as_bytes()));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises") + "\n"
    }
}

/// Writes to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
