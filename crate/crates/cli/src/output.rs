//! Output directory bookkeeping and the hash manifest.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use spinbox::error::{Error, Result};
use spinbox::record_io::write_text;

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageFormats {
    pub csv: bool,
    pub pgm: bool,
}

/// Files produced by a run, relative to the output root.
#[derive(Debug, Default)]
pub struct Outputs {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::Io { path: root.display().to_string(), msg: e.to_string() })?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, rel: impl AsRef<Path>, text: &str) -> Result<()> {
        let path = self.root.join(rel.as_ref());
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::Io { path: parent.display().to_string(), msg: e.to_string() })?;
        }
        write_text(&path, text)?;
        self.files.push(rel.as_ref().to_path_buf());
        Ok(())
    }

    /// Registers files already written below the root.
    pub fn record(&mut self, absolute: &[PathBuf]) {
        for p in absolute {
            if let Ok(rel) = p.strip_prefix(&self.root) {
                self.files.push(rel.to_path_buf());
            }
        }
    }

    /// Writes `manifest.txt`: one `sha256  path` line per file, sorted by
    /// path, with `/` separators.
    pub fn finish(mut self) -> Result<PathBuf> {
        self.files.sort();
        self.files.dedup();
        let mut text = String::new();
        for rel in &self.files {
            let path = self.root.join(rel);
            let bytes = fs::read(&path).map_err(|e| Error::Io { path: path.display().to_string(), msg: e.to_string() })?;
            let name: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            text.push_str(&format!("{}  {}\n", hex::encode(Sha256::digest(&bytes)), name.join("/")));
        }
        let path = self.root.join(MANIFEST_FILE);
        write_text(&path, &text)?;
        Ok(path)
    }
}
