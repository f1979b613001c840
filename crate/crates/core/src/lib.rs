//! Exact value-set statistics for polynomial families over finite fields.

pub mod gf;
pub mod linalg;
pub mod upoly;
pub mod mpoly;
pub mod family;
pub mod scan;
pub mod counting;
pub mod moments;
pub mod report;
pub mod bounds;
pub mod appendix;
