//! Covariates plus two binary outcomes.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::glm::Category;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Row-per-observation covariate matrix, without an intercept column.
    pub x: DMatrix<f64>,
    pub y1: Vec<bool>,
    pub y2: Vec<bool>,
    pub covariate_names: Vec<String>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y1: Vec<bool>, y2: Vec<bool>) -> Result<Self> {
        let names = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        Self::with_names(x, y1, y2, names)
    }

    pub fn with_names(
        x: DMatrix<f64>,
        y1: Vec<bool>,
        y2: Vec<bool>,
        covariate_names: Vec<String>,
    ) -> Result<Self> {
        if y1.len() != x.nrows() || y2.len() != x.nrows() {
            return Err(Error::Dimension(format!(
                "{} covariate rows but outcome lengths {} and {}",
                x.nrows(),
                y1.len(),
                y2.len()
            )));
        }
        if covariate_names.len() != x.ncols() {
            return Err(Error::Dimension(format!(
                "{} covariate names for {} columns",
                covariate_names.len(),
                x.ncols()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("covariates must be finite".into()));
        }
        Ok(Self { x, y1, y2, covariate_names })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.x.row(i).iter().copied().collect()
    }

    pub fn categories(&self) -> Vec<Category> {
        self.y1
            .iter()
            .zip(&self.y2)
            .map(|(&a, &b)| Category::from_outcomes(a, b))
            .collect()
    }

    /// Rows at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(idx),
            y1: idx.iter().map(|&i| self.y1[i]).collect(),
            y2: idx.iter().map(|&i| self.y2[i]).collect(),
            covariate_names: self.covariate_names.clone(),
        }
    }
}
