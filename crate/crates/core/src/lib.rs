//! SACRO-extended CycloneDX 1.5 AIBOM toolkit.

pub mod canonical;
pub mod model;
mod util;
