use std::collections::BTreeMap;
use std::path::Path;

use super::{run, Scale, Verdict};
use crate::commands::{cmd_analyze, cmd_simulate, cmd_thermometry};
use crate::error::Error;
use crate::io::{file_sha256, RunConfig};
use crate::Result;

/// Small two-pair configuration exercising the whole pipeline.
pub fn determinism_config(scale: Scale) -> RunConfig {
    let mut cfg = RunConfig {
        cooperativity: 0.1,
        duration: scale.pick(0.1, 0.05),
        phi_min: -0.02,
        phi_max: 0.02,
        phi_step: 0.004,
        repeats: 2,
        seed: 17,
        ..Default::default()
    };
    cfg.probe.t_bath = 22.0;
    cfg.probe.nbar = cfg.device.nbar_for_cooperativity(cfg.cooperativity);
    cfg
}

pub fn run_pipeline(cfg: &RunConfig, root: &Path) -> Result<()> {
    cmd_simulate(cfg, root)?;
    cmd_analyze(cfg, &root.join("records"), root, false)?;
    cmd_thermometry(cfg, &root.join("spectra"), root)?;
    Ok(())
}

/// SHA-256 of every file below `root`, keyed by relative path.
pub fn tree_hashes(root: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let path = e.map_err(|e| Error::io(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().into_owned();
                out.insert(rel, file_sha256(&path)?.1);
            }
        }
    }
    Ok(out)
}

fn scratch() -> Result<tempfile::TempDir> {
    tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))
}

pub fn check_determinism(scale: Scale) -> Verdict {
    run("8", "byte-identical reruns", |v| {
        let cfg = determinism_config(scale);
        v.note(format!("config hash {}", cfg.hash()));
        let a = scratch()?;
        run_pipeline(&cfg, a.path())?;
        let b = scratch()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .map_err(|e| Error::validation("threads", e.to_string()))?;
        pool.install(|| run_pipeline(&cfg, b.path()))?;
        let ha = tree_hashes(a.path())?;
        let hb = tree_hashes(b.path())?;
        let differ: Vec<&String> = ha.keys().chain(hb.keys()).filter(|k| ha.get(*k) != hb.get(*k)).collect();
        let count = |pre: &str| ha.keys().filter(|k| k.starts_with(pre)).count();
        v.check(
            ha.len() == hb.len() && differ.is_empty(),
            format!(
                "{} files ({} records, {} spectra, {} report) identical across a rerun on a 3-thread pool; differing: {differ:?}",
                ha.len(),
                count("records"),
                count("spectra"),
                count("report")
            ),
        );
        Ok(())
    })
}
