use serde::{Deserialize, Serialize};

use crate::PopError;

/// The attribute vector the partitioners and similarity metrics look at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityFeatures {
    pub id: u64,
    pub features: Vec<f64>,
}

impl EntityFeatures {
    pub fn new(id: u64, features: Vec<f64>) -> Self {
        Self { id, features }
    }
}

/// Checks that `entities` is non-empty, uniformly dimensioned and finite.
/// Returns the feature dimension.
pub fn validate_features(entities: &[EntityFeatures]) -> Result<usize, PopError> {
    let first = entities.first().ok_or(PopError::NoEntities)?;
    let dims = first.features.len();
    for (entity, e) in entities.iter().enumerate() {
        if e.features.len() != dims {
            return Err(PopError::FeatureDimension {
                entity,
                expected: dims,
                found: e.features.len(),
            });
        }
        if e.features.iter().any(|v| !v.is_finite()) {
            return Err(PopError::NonFiniteFeature { entity });
        }
    }
    Ok(dims)
}
