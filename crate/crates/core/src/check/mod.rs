//! Type checking: the algorithmic checker, a declarative reference oracle,
//! whole programs, processes and eta-expansion.

pub mod declarative;
pub mod eta;
pub mod process;
pub mod program;
pub mod synth;

pub use process::{check_process, Process};
pub use program::{check_program, check_source, CheckedDecl, CheckedProgram};
pub use synth::{synth_closed, CResult, Checker, Synth};
pub use declarative::{declarative_type, declarative_typable, OracleError, ORACLE_CAP};
