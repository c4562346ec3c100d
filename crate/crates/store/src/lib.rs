//! Refactoring proposals on disk and the local review service.

pub mod proposal;
pub mod service;
pub mod store;

pub use proposal::{ProposalStatus, ProposalSummary, RefactoringProposal};
pub use store::{ApplyResult, Filter, Store, StoreError, StoreSummary};
