pub mod counterexample;
pub mod error;
pub mod freeness;
pub mod groups;
pub mod identities;
pub mod ncpartitions;
pub mod scalar;
pub mod scenario;
pub mod spaces;
pub mod starwords;
pub mod tensor;
pub mod tfc;
