//! State-vector simulation of the query model.

pub mod exec;
pub mod grover;
pub mod oracle;
pub mod psi;
pub mod register;

pub use exec::{exact_paths, ExactPath, Exec};
pub use grover::{
    attempts_for, binary_grover_comparator, grover_equality_test, grover_search,
    multi_target_grover, search, search_any, Comparison, GroverOutcome,
};
pub use oracle::{
    apply_oracle, apply_view, query_entry, Oracle, OracleMode, OracleView, QueryCounter,
};
pub use psi::{inner_product_psi, prepare_psi_state};
pub use register::SimRegister;
