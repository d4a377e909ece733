//! Parallel per-entry processing with isolated failures and atomic writes.

use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;

use crate::manifest::Entry;

/// Runs `job` over every entry on a pool of `workers` threads. Results come
/// back in manifest order whatever the scheduling was.
pub fn run<T, F>(entries: &[Entry], workers: usize, job: F) -> Result<Vec<Result<T>>>
where
    T: Send,
    F: Fn(&Entry) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("starting worker pool")?;
    Ok(pool.install(|| {
        entries
            .par_iter()
            .map(|entry| job(entry).with_context(|| format!("{} ({})", entry.id, entry.input.display())))
            .collect()
    }))
}

/// Logs each failure and reports whether every entry succeeded.
pub fn report<T>(results: &[Result<T>]) -> bool {
    let mut failed = 0;
    for result in results {
        if let Err(err) = result {
            log::error!("{err:#}");
            failed += 1;
        }
    }
    if failed > 0 {
        log::error!("{failed} of {} entries failed", results.len());
    } else {
        log::info!("processed {} entries", results.len());
    }
    failed == 0
}

/// Writes `path` through a temporary file in the same directory followed by
/// a rename, so readers never observe a partial file.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let dir = match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => dir,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temporary file in {}", dir.display()))?;
    {
        let mut out = BufWriter::new(tmp.as_file());
        write(&mut out).and_then(|()| out.flush()).with_context(|| format!("writing {}", path.display()))?;
    }
    tmp.persist(path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}
