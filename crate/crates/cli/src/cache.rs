//! On-disk cache of constants documents.
//!
//! Enabled by pointing `STEPWISE_CACHE_DIR` at a directory. A cached file is
//! used only if its family, ρ, k, α, kind, solver tolerances and schema
//! version all equal the request; anything else is recomputed and replaced.

use std::fs;
use std::path::{Path, PathBuf};

use stepwise::constants::{LadderKind, RESIDUAL_TOL, SOLVER_XTOL};
use stepwise::models::ModelSpec;

use crate::docs::{ConstantsDoc, ModelDoc, SCHEMA_VERSION};

pub const CACHE_ENV: &str = "STEPWISE_CACHE_DIR";

#[derive(Debug, Clone)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn from_env(disabled: bool) -> Self {
        let dir = if disabled { None } else { std::env::var_os(CACHE_ENV).map(PathBuf::from) };
        Self { dir }
    }

    fn path(&self, kind: LadderKind, model: &ModelSpec<f64>, alpha: f64) -> Option<PathBuf> {
        let m = ModelDoc::from(model);
        self.dir.as_ref().map(|d| {
            d.join(format!(
                "{}-{}-{:016x}-{}-{:016x}.json",
                kind.name(),
                m.family,
                m.rho.to_bits(),
                m.k,
                alpha.to_bits()
            ))
        })
    }

    pub fn load(&self, kind: LadderKind, model: &ModelSpec<f64>, alpha: f64) -> Option<ConstantsDoc> {
        let text = fs::read_to_string(self.path(kind, model, alpha)?).ok()?;
        let doc: ConstantsDoc = serde_json::from_str(&text).ok()?;
        let want = ModelDoc::from(model);
        let matches = doc.schema_version == SCHEMA_VERSION
            && doc.kind == kind.name()
            && doc.alpha.to_bits() == alpha.to_bits()
            && doc.model.family == want.family
            && doc.model.rho.to_bits() == want.rho.to_bits()
            && doc.model.k == want.k
            && doc.solver_metadata.xtol == SOLVER_XTOL
            && doc.solver_metadata.residual_tol == RESIDUAL_TOL
            && doc.values.len() == want.k;
        matches.then_some(doc)
    }

    /// Best effort: a cache that cannot be written is reported and skipped.
    pub fn store(&self, kind: LadderKind, model: &ModelSpec<f64>, alpha: f64, doc: &ConstantsDoc) {
        let Some(path) = self.path(kind, model, alpha) else { return };
        let tmp = path.with_extension("tmp");
        let written = fs::create_dir_all(path.parent().unwrap_or(Path::new(".")))
            .and_then(|_| fs::write(&tmp, serde_json::to_string_pretty(doc).unwrap_or_default()))
            .and_then(|_| fs::rename(&tmp, &path));
        if let Err(e) = written {
            eprintln!("warning: could not write cache file {}: {e}", path.display());
        }
    }
}
