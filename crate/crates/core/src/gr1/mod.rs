mod oracle;
mod solve;
mod strategy;

pub use oracle::{brute_force_oracle, OracleError, OracleResult, ORACLE_STATE_LIMIT};
pub use solve::{is_realizable, solve, solve_spec, SynthesisResult, UNRANKED};
pub use strategy::{extract_strategy, InitialNode, Strategy, StrategyEdge, StrategyError, StrategyNode};
