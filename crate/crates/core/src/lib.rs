//! Pasting diagrams, computads and invertibility synthesis for weak
//! omega-categories.

pub mod cli;
pub mod computad;
pub mod invert;
pub mod pasting;
pub mod stdops;
pub mod surface;
