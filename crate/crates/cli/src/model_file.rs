//! Versioned JSON document wrapping a fitted model.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use jointrisk::{Dataset, FittedModel, Method};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub method: Method,
    pub covariates: Vec<String>,
    pub training_rows: usize,
    pub model: FittedModel,
}

impl ModelFile {
    pub fn new(model: FittedModel, data: &Dataset) -> Self {
        Self {
            version: FORMAT_VERSION,
            method: model.method(),
            covariates: data.covariate_names.clone(),
            training_rows: data.n(),
            model,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read model file {}", path.display()))?;
        let file: ModelFile = serde_json::from_str(&text)
            .with_context(|| format!("{} is not a valid model file", path.display()))?;
        if file.version != FORMAT_VERSION {
            bail!(
                "model file version {} is not supported (expected {FORMAT_VERSION})",
                file.version
            );
        }
        if file.method != file.model.method() {
            bail!("model file declares method `{}` but holds a `{}` model", file.method, file.model.method());
        }
        if file.covariates.len() != file.model.n_covariates() {
            bail!(
                "model file lists {} covariates but the model expects {}",
                file.covariates.len(),
                file.model.n_covariates()
            );
        }
        Ok(file)
    }

    /// Check that `data` has this model's covariates in the same order.
    pub fn check_schema(&self, data: &Dataset) -> Result<()> {
        for (k, name) in self.covariates.iter().enumerate() {
            match data.covariate_names.get(k) {
                Some(found) if found == name => {}
                Some(found) => {
                    if data.covariate_names.contains(name) {
                        bail!("covariate column `{name}` is out of order (found `{found}` in its place)");
                    }
                    bail!("missing covariate column `{name}`");
                }
                None => bail!("missing covariate column `{name}`"),
            }
        }
        if let Some(extra) = data.covariate_names.get(self.covariates.len()) {
            bail!("unexpected covariate column `{extra}` not used by the model");
        }
        Ok(())
    }
}
