use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ehpseq::resolution::{BGComplex, FileError, Tower};

use crate::error::CliError;

/// Resolution files keyed by `(t, s_max)`.
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: &Path) -> Result<Cache, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Cache { dir: dir.to_path_buf() })
    }

    pub fn path(&self, t: u32, s_max: usize) -> PathBuf {
        self.dir.join(format!("bg-t{t}-s{s_max}.json"))
    }

    pub fn load(&self, t: u32, s_max: usize) -> Result<Option<BGComplex>, CliError> {
        let path = self.path(t, s_max);
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(CliError::io(&path, e)),
        };
        let c = BGComplex::from_json(&text).map_err(|e| stale(&path, e.to_string()))?;
        if c.t() != t || c.s_max() != s_max {
            return Err(stale(&path, format!("file holds t={} s_max={}", c.t(), c.s_max())));
        }
        Ok(Some(c))
    }

    /// Writes through a temporary file so readers never see a partial file.
    pub fn store(&self, c: &BGComplex) -> Result<(), CliError> {
        let path = self.path(c.t(), c.s_max());
        let mut tmp = tempfile_in(&self.dir, &path)?;
        tmp.1
            .write_all(c.to_json().as_bytes())
            .map_err(|e| CliError::io(&tmp.0, e))?;
        drop(tmp.1);
        fs::rename(&tmp.0, &path).map_err(|e| CliError::io(&path, e))
    }
}

fn tempfile_in(dir: &Path, target: &Path) -> Result<(PathBuf, fs::File), CliError> {
    let name = target.file_name().and_then(|n| n.to_str()).unwrap_or("bg");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let file = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    Ok((tmp, file))
}

fn stale(path: &Path, reason: String) -> CliError {
    CliError::StaleCache {
        path: path.to_path_buf(),
        reason,
    }
}

/// `BG(1), ..., BG(t_max)` through page `s_max`, from the cache when every
/// file is present and freshly computed otherwise.
pub fn resolutions(t_max: u32, s_max: usize, cache: Option<&Cache>) -> Result<Vec<BGComplex>, CliError> {
    let mut cached = Vec::new();
    if let Some(cache) = cache {
        for t in 1..=t_max {
            cached.push(cache.load(t, s_max)?);
        }
        if cached.iter().all(Option::is_some) {
            return Ok(cached.into_iter().flatten().collect());
        }
    }
    let tower = Tower::build(t_max, s_max)?;
    let mut out = Vec::new();
    for t in 1..=t_max {
        let bg = tower.bg(t).expect("tower reaches t_max").truncate(s_max)?;
        if let Some(cache) = cache {
            match &cached[t as usize - 1] {
                Some(old) if old != &bg => {
                    return Err(stale(&cache.path(t, s_max), "contents differ from a fresh computation".into()))
                }
                Some(_) => {}
                None => cache.store(&bg)?,
            }
        }
        out.push(bg);
    }
    Ok(out)
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        CliError::Internal(e.to_string())
    }
}
