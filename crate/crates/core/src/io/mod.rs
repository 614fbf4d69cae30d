//! Instance and solution files.

mod instance;
mod solution;

pub use instance::{
    duplicate_system, parse_instance, parse_instance_str, read_instance_file, render_instance, write_instance,
    InstanceFile, Metadata,
};
pub use solution::{parse_solution, read_solution, render_solution, write_solution, SolutionFile, SolveMetadata};
