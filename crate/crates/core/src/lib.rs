//! Compile two-sided counter machines into robust multidimensional
//! mean-payoff games, play the prescribed strategies on the result, and
//! monitor the correctness invariants with exact arithmetic.

pub mod condition;
pub mod engine;
pub mod expr;
pub mod export;
pub mod game;
pub mod linpred;
pub mod machine;
pub mod minsky;
pub mod monitor;
pub mod num;
pub mod reduction;
pub mod strategy;
pub mod trace;
