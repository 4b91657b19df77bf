pub mod domain;
pub mod error;
pub mod field;
pub mod bernoulli;
pub mod dirichlet;
mod linalg;
pub mod tolerance;
pub mod audit;
pub mod evolution;
pub mod onedim;
pub mod io;
pub mod cli;
