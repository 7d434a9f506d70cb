pub mod capacity;
pub mod cli;
pub mod dp;
pub mod error;
pub mod ldf;
pub mod matrix;
pub mod model;
pub mod objectives;
pub mod oracle;
pub mod generate;
pub mod greedy;
pub mod io;
