//! Artifact directory: atomic writes and the provenance manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.txt";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

impl OutputDir {
    pub fn create(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        log::info!("wrote {}", path.display());
        self.artifacts.retain(|a| a.name != name);
        self.artifacts.push(Artifact {
            name: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    /// Lists every artifact with its hash, after the run metadata.
    pub fn write_manifest(&self, header: &[(&str, String)]) -> std::io::Result<()> {
        let mut text = String::new();
        for (k, v) in header {
            text.push_str(&format!("{k} = {v}\n"));
        }
        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        text.push_str(&format!("created_unix = {created}\n"));
        for a in &self.artifacts {
            text.push_str(&format!(
                "artifact = {} bytes={} sha256={}\n",
                a.name, a.bytes, a.sha256
            ));
        }
        write_atomic(&self.dir.join(MANIFEST), text.as_bytes())
    }
}
