pub mod embed;
pub mod entropy;
pub mod equivalence;
pub mod homogeneity;
pub mod identities;
pub mod multiplier;
pub mod norm;
