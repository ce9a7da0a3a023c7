//! Parallel per-clip execution with failure isolation: one broken clip never
//! aborts the batch, it is reported at the end and flips the exit code to 1.

use anyhow::Context;
use rayon::prelude::*;

use crate::manifest::{Manifest, ManifestEntry};

/// Apply `f` to every manifest entry, up to `jobs` clips at a time, and
/// return per-entry outcomes in manifest order.
pub fn run_clips<T, F>(
    manifest: &Manifest,
    jobs: Option<usize>,
    f: F,
) -> anyhow::Result<Vec<Result<T, String>>>
where
    T: Send,
    F: Fn(&ManifestEntry) -> anyhow::Result<T> + Sync,
{
    let exec = || {
        manifest
            .entries
            .par_iter()
            .map(|entry| f(entry).map_err(|err| format!("{err:#}")))
            .collect()
    };
    match jobs {
        Some(0) => anyhow::bail!("--jobs must be at least 1"),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("cannot build worker pool")?
            .install(exec)),
        None => Ok(exec()),
    }
}

/// Print the end-of-run error table and return how many clips failed.
pub fn report_failures<T>(manifest: &Manifest, results: &[Result<T, String>]) -> usize {
    let failures: Vec<(&str, &str)> = manifest
        .entries
        .iter()
        .zip(results)
        .filter_map(|(e, r)| r.as_ref().err().map(|m| (e.clip_id.as_str(), m.as_str())))
        .collect();
    if !failures.is_empty() {
        eprintln!("{} of {} clips failed:", failures.len(), results.len());
        for (clip_id, message) in &failures {
            eprintln!("  {clip_id}: {message}");
        }
    }
    failures.len()
}
