pub mod commands;
pub mod problem_file;
