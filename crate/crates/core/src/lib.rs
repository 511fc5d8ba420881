//! Reference interpreter and runtime capability checker for a small
//! calculus with three assignment operators: alias (`&-`), copy (`:=`) and
//! move (`<-`).

pub mod context;
pub mod corpus;
pub mod diagnostics;
pub mod driver;
pub mod eval;
pub mod matrix;
pub mod syntax;
pub mod typesys;
