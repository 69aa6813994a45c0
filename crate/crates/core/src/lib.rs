pub mod ast;
pub mod diff;
pub mod gen;
pub mod log;
pub mod mining;
pub mod pilang;
pub mod pipeline;
pub mod synth;
