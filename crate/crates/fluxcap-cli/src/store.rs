//! On-disk spectrum cache behind `--cache`.
//!
//! Solves are keyed by an exact-bit fingerprint of their inputs, so a hit
//! returns bit-identical energies and amplitudes; caching can change
//! runtime but never output bytes. Files are written via a temp-and-rename
//! so a crash never leaves a truncated entry.

use std::fs;
use std::path::PathBuf;

use fluxcap::spectrum::{SpectrumStore, StoredSpectrum};

use crate::output::sha256_hex;

pub struct FsStore {
    dir: PathBuf,
}

impl FsStore {
    pub fn new(dir: PathBuf) -> std::io::Result<Self> {
        fs::create_dir_all(&dir)?;
        Ok(FsStore { dir })
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.json", sha256_hex(key.as_bytes())))
    }
}

impl SpectrumStore for FsStore {
    fn load(&self, key: &str) -> Option<StoredSpectrum> {
        let text = fs::read_to_string(self.path_for(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    fn save(&self, key: &str, value: &StoredSpectrum) {
        let path = self.path_for(key);
        let tmp = path.with_extension("tmp");
        let text = match serde_json::to_string(value) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("warning: cache entry not serializable: {e}");
                return;
            }
        };
        if let Err(e) = fs::write(&tmp, text).and_then(|_| fs::rename(&tmp, &path)) {
            eprintln!("warning: cache write failed for {}: {e}", path.display());
        }
    }
}
