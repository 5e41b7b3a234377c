//! Dual pairs of hyperplane arrangements: exact matroid and geometric
//! duality checks, and numerical verification of determinant formulas for
//! their period matrices.

pub mod check;
pub mod exactla;
pub mod matroid;
pub mod dualpair;
pub mod geometry;
pub mod polyhedra;
pub mod betakbc;
pub mod quadrature;
pub mod periods;
pub mod verify;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dualpair::DualPair;
use crate::exactla::{format_rational, parse_rational, ExactMatrix};
use crate::periods::WeightSystem;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    LinAlg(#[from] exactla::LinAlgError),
    #[error(transparent)]
    Matroid(#[from] matroid::MatroidError),
    #[error(transparent)]
    Pair(#[from] dualpair::PairError),
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Basis(#[from] betakbc::BasisError),
    #[error(transparent)]
    Period(#[from] periods::PeriodError),
    #[error("invalid input: {0}")]
    Input(String),
}

/// On-disk description of an instance: the `(k+1) x (N+1)` matrix `B` with
/// rational entries written as strings, and optional weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairInput {
    pub k: usize,
    #[serde(rename = "B")]
    pub b: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<String>>,
}

impl PairInput {
    pub fn from_json(text: &str) -> Result<PairInput, Error> {
        serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))
    }

    pub fn from_pair(d: &DualPair, w: Option<&WeightSystem>) -> PairInput {
        PairInput {
            k: d.dim(dualpair::Side::Primal),
            b: d.primal().b().to_strings(),
            alpha: w.map(|w| w.alphas().iter().map(format_rational).collect()),
        }
    }

    pub fn pair(&self) -> Result<DualPair, Error> {
        let b = ExactMatrix::from_strings(&self.b)?;
        Ok(DualPair::from_matrix(b, self.k)?)
    }

    /// The given weights, or all ones.
    pub fn weights(&self, num_hyperplanes: usize) -> Result<WeightSystem, Error> {
        let alphas = match &self.alpha {
            Some(a) => a.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?,
            None => vec![exactla::rat(1); num_hyperplanes],
        };
        if alphas.len() != num_hyperplanes {
            return Err(Error::Input(format!("expected {num_hyperplanes} weights, got {}", alphas.len())));
        }
        Ok(WeightSystem::new(alphas)?)
    }
}
