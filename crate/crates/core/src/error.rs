use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PopError {
    #[error("no entities to partition")]
    NoEntities,
    #[error("cannot split {entities} entities into {k} non-empty sub-problems")]
    InvalidK { k: usize, entities: usize },
    #[error("entity {entity} has {found} features, expected {expected}")]
    FeatureDimension {
        entity: usize,
        expected: usize,
        found: usize,
    },
    #[error("entity {entity} has a non-finite feature")]
    NonFiniteFeature { entity: usize },
    #[error("feature index {index} out of range for {dims}-dimensional entities")]
    FeatureIndex { index: usize, dims: usize },
    #[error("only {groups} distinct groups for {k} sub-problems")]
    TooFewGroups { groups: usize, k: usize },
    #[error("resource {resource} has capacity {capacity}, which cannot be dealt in whole units")]
    FractionalUnits { resource: usize, capacity: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("sub-problem {index} is infeasible{hint}")]
    SubproblemInfeasible { index: usize, hint: String },
    #[error("sub-problem {index} failed: {message}")]
    SubproblemFailed { index: usize, message: String },
    #[error("{0}")]
    Domain(String),
}
