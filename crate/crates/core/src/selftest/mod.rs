//! End-to-end checks of the physics and the pipeline, at full or reduced
//! scale. Each check returns a verdict with the measured numbers; the
//! `acceptance` test target runs them at full scale and `omthermo selftest`
//! at reduced scale.

mod analytic;
mod artifact;
mod determinism;
mod nulls;
mod oracles;
mod thermometry;

use std::fmt;

pub use analytic::{check_identities, check_magnitudes};
pub use artifact::check_artifact_rejection;
pub use determinism::{check_determinism, determinism_config, run_pipeline, tree_hashes};
pub use nulls::check_null_scan;
pub use oracles::check_physics_oracles;
pub use thermometry::{check_allan, check_thermometry, spectral_chain, ChainPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Full,
    Reduced,
}

impl Scale {
    pub fn pick<T>(self, full: T, reduced: T) -> T {
        match self {
            Scale::Full => full,
            Scale::Reduced => reduced,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: &'static str,
    pub title: &'static str,
    pub pass: bool,
    /// One line per measured quantity.
    pub details: Vec<String>,
}

impl Verdict {
    pub fn new(id: &'static str, title: &'static str) -> Self {
        Verdict {
            id,
            title,
            pass: true,
            details: vec![],
        }
    }

    /// Records a sub-check; the verdict passes only if all do.
    pub fn check(&mut self, ok: bool, what: String) {
        self.pass &= ok;
        self.details.push(format!("[{}] {what}", if ok { "ok" } else { "FAIL" }));
    }

    pub fn note(&mut self, what: String) {
        self.details.push(format!("[info] {what}"));
    }

    pub fn fail_with(id: &'static str, title: &'static str, err: impl fmt::Display) -> Self {
        let mut v = Verdict::new(id, title);
        v.check(false, format!("error: {err}"));
        v
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} criterion {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.id, self.title)?;
        for d in &self.details {
            writeln!(f, "    {d}")?;
        }
        Ok(())
    }
}

/// Turns a fallible check into a verdict, reporting errors as failures.
pub fn run(id: &'static str, title: &'static str, f: impl FnOnce(&mut Verdict) -> crate::Result<()>) -> Verdict {
    let mut v = Verdict::new(id, title);
    if let Err(e) = f(&mut v) {
        v.check(false, format!("error: {e}"));
    }
    v
}

pub fn run_all(scale: Scale) -> Vec<Verdict> {
    vec![
        check_identities(),
        check_magnitudes(),
        check_null_scan(scale),
        check_thermometry(scale),
        check_allan(scale),
        check_artifact_rejection(scale),
        check_physics_oracles(scale),
        check_determinism(scale),
    ]
}
