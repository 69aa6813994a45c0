#![allow(dead_code)]

pub mod components;
pub mod pil_oracle;
pub mod synth_oracle;
pub mod trees;
