use thiserror::Error;

use crate::model::Itemset;

/// Errors shared by all engine modules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Input violates a structural requirement (bad index, dimension
    /// mismatch, duplicate member, value out of range, ...).
    #[error("malformed input: {0}")]
    MalformedInput(String),

    /// A family operation required closure under subsets and the family
    /// does not have it.
    #[error("family is not antimonotonic: member {member} is missing subset {missing}")]
    NotAntimonotonic { member: Itemset, missing: Itemset },

    /// The queried itemset is not a member of the family.
    #[error("itemset {0} is not a member of the family")]
    UnknownItemset(Itemset),

    /// No distribution satisfies the given frequencies.
    #[error("the frequencies are inconsistent: no distribution satisfies them")]
    Inconsistent,

    /// The instance is too large for the requested operation.
    #[error("instance requires {needed} attributes, over the limit of {limit}")]
    ResourceLimit { needed: usize, limit: usize },

    /// The operation is only defined for exact-mode distributions.
    #[error("operation requires an exact-mode distribution")]
    ExactModeRequired,

    /// A solver reached a state that should be unreachable.
    #[error("internal solver failure: {0}")]
    Internal(String),
}
