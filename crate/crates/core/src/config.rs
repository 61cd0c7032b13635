//! Experiment configuration: one JSON document with `domain`, `group` and
//! `experiment` sections fully reproduces a run.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::group::{self, GroupElement, GroupError, Presentation};
use crate::numerics::fnv1a64;

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Config {
    pub domain: Option<DomainSpec>,
    pub group: Option<GroupSpec>,
    #[serde(default)]
    pub experiment: ExperimentSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GroupSpec {
    /// Deformed triangle reflection group with dihedral orders (p,q,r).
    TriangleReflection { orders: [u32; 3], s: f64 },
    /// Rotation subgroup of the symmetric family, in the round-disk model.
    TriangleRotation { orders: [u32; 3] },
    /// Literal generator matrices, row-major.
    Matrices {
        matrices: Vec<Vec<Vec<f64>>>,
        #[serde(default)]
        involutions: Option<Vec<bool>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ExperimentSpec {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub horizon: Option<f64>,
    pub max_len: Option<usize>,
    pub r_max: Option<f64>,
    pub steps: Option<usize>,
    /// Points consumed by the point-wise commands (distance, norm, flow...).
    pub points: Option<Vec<Vec<f64>>>,
    /// Directions paired with the points where a command needs them.
    pub directions: Option<Vec<Vec<f64>>>,
}

impl Config {
    /// Parse a config file; returns the config and the FNV fingerprint of the
    /// raw bytes, which output headers record.
    pub fn load(path: &Path) -> Result<(Config, u64), String> {
        let bytes = fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let hash = fnv1a64(&bytes);
        let config: Config = serde_json::from_slice(&bytes)
            .map_err(|e| format!("cannot parse {}: {e}", path.display()))?;
        Ok((config, hash))
    }

    pub fn build_group(&self) -> Result<(Vec<GroupElement>, Presentation), GroupError> {
        match &self.group {
            None => Err(GroupError::InvalidParameter(
                "config has no group section".into(),
            )),
            Some(GroupSpec::TriangleReflection { orders, s }) => {
                let family =
                    group::triangle_reflection_family(orders[0], orders[1], orders[2], *s)?;
                Ok((family.generators, family.presentation))
            }
            Some(GroupSpec::TriangleRotation { orders }) => {
                let gens = group::triangle_rotation_disk(orders[0], orders[1], orders[2])?;
                let rank = gens.len();
                Ok((gens, Presentation::free(rank)))
            }
            Some(GroupSpec::Matrices {
                matrices,
                involutions,
            }) => {
                let mut gens = Vec::with_capacity(matrices.len());
                for rows in matrices {
                    let n = rows.len();
                    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                    if flat.len() != n * n {
                        return Err(GroupError::InvalidParameter(
                            "generator matrix is not square".into(),
                        ));
                    }
                    gens.push(GroupElement::new(nalgebra::DMatrix::from_row_slice(
                        n, n, &flat,
                    ))?);
                }
                let invol = involutions
                    .clone()
                    .unwrap_or_else(|| vec![false; gens.len()]);
                if invol.len() != gens.len() {
                    return Err(GroupError::InvalidParameter(
                        "involution flags do not match the generator count".into(),
                    ));
                }
                Ok((
                    gens,
                    Presentation {
                        involutions: invol,
                        pair_orders: None,
                    },
                ))
            }
        }
    }
}
