//! Run manifests: every artifact directory gets a `manifest.json` holding
//! the command, the fully resolved configuration, and a SHA-256 digest of
//! each input file. No timestamps or host details — two runs with the same
//! manifest produce bit-identical artifacts.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use topogcl_core::Result;

use crate::config::Settings;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    /// Input path → SHA-256 of the file bytes.
    pub inputs: BTreeMap<String, String>,
}

/// Streaming SHA-256 of a file, hex-encoded.
pub fn file_sha256(path: &Path) -> Result<String> {
    let mut file = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

pub fn build_manifest(command: &str, settings: &Settings, inputs: &[PathBuf]) -> Result<Manifest> {
    let mut hashed = BTreeMap::new();
    for path in inputs {
        hashed.insert(path.display().to_string(), file_sha256(path)?);
    }
    Ok(Manifest {
        command: command.to_string(),
        config: settings.entries().clone(),
        inputs: hashed,
    })
}

/// Writes `manifest.json` into `dir`, creating the directory if needed.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    settings: &Settings,
    inputs: &[PathBuf],
) -> Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    let manifest = build_manifest(command, settings, inputs)?;
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(dir.join("manifest.json"), json + "\n")?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashes_are_stable_and_content_sensitive() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.txt");
        std::fs::write(&a, b"abc").unwrap();
        // Known SHA-256 of "abc".
        assert_eq!(
            file_sha256(&a).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        std::fs::write(&a, b"abd").unwrap();
        assert_ne!(
            file_sha256(&a).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_roundtrips_and_has_no_volatile_fields() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        std::fs::write(&input, b"payload").unwrap();
        let mut settings = Settings::new();
        settings.set("train.tau", "0.4");

        let out = dir.path().join("run");
        let written =
            write_manifest(&out, "train", &settings, std::slice::from_ref(&input)).unwrap();
        let text = std::fs::read_to_string(out.join("manifest.json")).unwrap();
        let parsed: Manifest = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, written);
        assert_eq!(parsed.command, "train");
        assert_eq!(parsed.config["train.tau"], "0.4");
        assert_eq!(parsed.inputs.len(), 1);

        // Deterministic: a second write produces identical bytes.
        write_manifest(&out, "train", &settings, &[input]).unwrap();
        assert_eq!(std::fs::read_to_string(out.join("manifest.json")).unwrap(), text);
    }
}
