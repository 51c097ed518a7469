//! Exact p-adic toolkit for certifying canonical subgroups of formal groups
//! given by Dieudonne displays.

pub mod canon;
pub mod display;
pub mod error;
pub mod fgl;
pub mod fglog;
pub mod matrix;
pub mod rat;
pub mod sample;
pub mod series;
pub mod tropical;
pub mod ring;
pub mod witt;

pub use canon::{certify, count_roots, structure_certificate, BoundMode, Certificate, CertifyOptions};
pub use display::{DisplayData, DisplayFile, HasseValue};
pub use error::{Error, Result};
pub use fglog::{check_hypotheses, compute_log, HypothesisReport, LogTable, Threshold};
pub use rat::Rat;
pub use series::TruncatedSeries;
pub use tropical::{HeightGraph, NewtonPolygon, Properness};
pub use ring::{Base, LocalFieldElem, Valuation};
pub use witt::WittVec;
