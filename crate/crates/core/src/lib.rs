pub mod bipartite;
pub mod cli;
pub mod constructions;
pub mod dependence;
pub mod experiments;
pub mod hypergraph;
pub mod rng;
pub mod solvers;
pub mod square;
