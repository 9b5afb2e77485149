use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use super::{OperatorMatrix, OperatorRole};
use crate::clipio::{read_lut, write_lut};
use crate::error::Result;
use crate::magnify::MagnifyParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct OperatorKey {
    role: OperatorRole,
    t_in: usize,
    t_out: usize,
    // bit patterns, so the key is exact
    alpha: u64,
    w1: u64,
    w2: u64,
}

impl OperatorKey {
    fn new(role: OperatorRole, t_in: usize, t_out: usize, p: Option<&MagnifyParams>) -> Self {
        let (alpha, w1, w2) = p.map_or((0, 0, 0), |p| {
            (p.alpha().to_bits(), p.w1().to_bits(), p.w2().to_bits())
        });
        Self {
            role,
            t_in,
            t_out,
            alpha,
            w1,
            w2,
        }
    }

    fn file_name(&self) -> String {
        format!(
            "{}_{}x{}_{:016x}_{:016x}_{:016x}.mebw",
            self.role, self.t_in, self.t_out, self.alpha, self.w1, self.w2
        )
    }

    fn matches(&self, w: &OperatorMatrix<f64>) -> bool {
        *self == OperatorKey::new(w.role(), w.t_in(), w.t_out(), w.magnify_params())
    }
}

/// Memoizes operators by their exact parameters, optionally persisting fused
/// operators as LUT files in a directory.
#[derive(Debug, Default)]
pub struct OperatorCache {
    entries: RwLock<HashMap<OperatorKey, Arc<OperatorMatrix<f64>>>>,
    lut_dir: Option<PathBuf>,
    builds: AtomicUsize,
    loads: AtomicUsize,
}

impl OperatorCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_lut_dir(dir: impl Into<PathBuf>) -> Self {
        Self {
            lut_dir: Some(dir.into()),
            ..Self::default()
        }
    }

    pub fn lut_dir(&self) -> Option<&Path> {
        self.lut_dir.as_deref()
    }

    /// Operators computed from scratch so far.
    pub fn builds(&self) -> usize {
        self.builds.load(Ordering::Relaxed)
    }

    /// Operators read back from the LUT directory so far.
    pub fn loads(&self) -> usize {
        self.loads.load(Ordering::Relaxed)
    }

    fn lookup(&self, key: &OperatorKey) -> Option<Arc<OperatorMatrix<f64>>> {
        self.entries.read().expect("cache lock").get(key).cloned()
    }

    fn insert(&self, key: OperatorKey, w: OperatorMatrix<f64>) -> Arc<OperatorMatrix<f64>> {
        let w = Arc::new(w);
        self.entries
            .write()
            .expect("cache lock")
            .entry(key)
            .or_insert(w)
            .clone()
    }

    pub fn interpolation(&self, t_in: usize, t_out: usize) -> Result<Arc<OperatorMatrix<f64>>> {
        let key = OperatorKey::new(OperatorRole::Interpolate, t_in, t_out, None);
        if let Some(w) = self.lookup(&key) {
            return Ok(w);
        }
        let w = OperatorMatrix::interpolation(t_in, t_out)?;
        self.builds.fetch_add(1, Ordering::Relaxed);
        Ok(self.insert(key, w))
    }

    pub fn fused(
        &self,
        p: &MagnifyParams,
        t_in: usize,
        t_out: usize,
    ) -> Result<Arc<OperatorMatrix<f64>>> {
        let key = OperatorKey::new(OperatorRole::Fused, t_in, t_out, Some(p));
        if let Some(w) = self.lookup(&key) {
            return Ok(w);
        }
        let path = self.lut_dir.as_ref().map(|d| d.join(key.file_name()));
        if let Some(path) = path.as_ref().filter(|p| p.is_file()) {
            // unreadable or mismatching files are rebuilt and overwritten
            if let Ok(w) = read_lut(path) {
                if key.matches(&w) {
                    self.loads.fetch_add(1, Ordering::Relaxed);
                    return Ok(self.insert(key, w));
                }
            }
        }
        let wi = self.interpolation(t_in, t_out)?;
        let wm = OperatorMatrix::magnification(p, t_in)?;
        let w = super::fuse(&wm, &wi)?;
        self.builds.fetch_add(1, Ordering::Relaxed);
        if let Some(path) = path {
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)
                    .map_err(|e| crate::Error::io(format!("creating {}", dir.display()), e))?;
            }
            write_lut(&w, &path)?;
        }
        Ok(self.insert(key, w))
    }
}
