//! `manifest.txt`: what was run, how long it took and what it wrote.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::error::{LabError, Result};
use crate::io::{read_kv, write_kv};

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    /// Relative to the manifest directory.
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub version: String,
    pub seed: u64,
    pub created_unix: u64,
    pub wall_clock: f64,
    pub work: u64,
    pub files: Vec<OutputFile>,
    /// Directory holding the manifest and its outputs.
    pub dir: PathBuf,
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(LabError::io(path))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn path(&self) -> PathBuf {
        self.dir.join(MANIFEST_FILE)
    }

    /// Hash over the output files, names included.
    pub fn outputs_hash(&self) -> String {
        let mut h = Sha256::new();
        for f in &self.files {
            h.update(f.name.as_bytes());
            h.update(b"\0");
            h.update(f.sha256.as_bytes());
            h.update(b"\n");
        }
        hex(&h.finalize())
    }

    pub fn write(&self) -> Result<()> {
        let mut kv = vec![
            ("experiment".to_string(), self.experiment.clone()),
            ("config_hash".to_string(), self.config_hash.clone()),
            ("version".to_string(), self.version.clone()),
            ("seed".to_string(), self.seed.to_string()),
            ("created_unix".to_string(), self.created_unix.to_string()),
            (
                "wall_clock_s".to_string(),
                format!("{:.3}", self.wall_clock),
            ),
            ("work".to_string(), self.work.to_string()),
            ("outputs_hash".to_string(), self.outputs_hash()),
        ];
        for f in &self.files {
            kv.push(("file".to_string(), format!("{} {}", f.name, f.sha256)));
        }
        write_kv(&self.path(), &kv)
    }

    /// Reads `path`, which is either a manifest file or the directory holding one.
    pub fn read(path: &Path) -> Result<Self> {
        let file = if path.is_dir() {
            path.join(MANIFEST_FILE)
        } else {
            path.to_path_buf()
        };
        let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
        let kv = read_kv(&file)?;
        let get = |key: &str| -> Result<String> {
            kv.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| LabError::Parse {
                    what: "manifest",
                    detail: format!("{} lacks `{key}`", file.display()),
                })
        };
        let num = |key: &str| -> Result<u64> {
            let v = get(key)?;
            v.parse().map_err(|_| LabError::Parse {
                what: "manifest number",
                detail: format!("{key} = {v}"),
            })
        };
        let files = kv
            .iter()
            .filter(|(k, _)| k == "file")
            .map(|(_, v)| {
                let (name, sha) = v.rsplit_once(' ').ok_or_else(|| LabError::Parse {
                    what: "manifest file entry",
                    detail: v.clone(),
                })?;
                Ok(OutputFile {
                    name: name.to_string(),
                    sha256: sha.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let wall = get("wall_clock_s")?;
        Ok(RunManifest {
            experiment: get("experiment")?,
            config_hash: get("config_hash")?,
            version: get("version")?,
            seed: num("seed")?,
            created_unix: num("created_unix")?,
            wall_clock: wall.parse().map_err(|_| LabError::Parse {
                what: "manifest number",
                detail: format!("wall_clock_s = {wall}"),
            })?,
            work: num("work")?,
            files,
            dir,
        })
    }

    /// Checks that every listed output exists.
    pub fn check_files(&self) -> Result<()> {
        for f in &self.files {
            let p = self.dir.join(&f.name);
            if !p.is_file() {
                return Err(LabError::Missing(p));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = std::env::temp_dir().join(format!("geolorenz-manifest-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let m = RunManifest {
            experiment: "spectrum".into(),
            config_hash: "ab".into(),
            version: "0.1.0".into(),
            seed: 7,
            created_unix: 12,
            wall_clock: 0.5,
            work: 3,
            files: vec![OutputFile {
                name: "report with space.txt".into(),
                sha256: "cd".into(),
            }],
            dir: dir.clone(),
        };
        m.write().unwrap();
        assert_eq!(RunManifest::read(&dir).unwrap(), m);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
