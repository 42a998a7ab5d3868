use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} outside window [{n_min}, {n_max}]")]
    Index { index: i64, n_min: i64, n_max: i64 },

    #[error("kernel window exceeded: need base indices [{need_lo}, {need_hi}], have [{have_lo}, {have_hi}]")]
    WindowExceeded { need_lo: i64, need_hi: i64, have_lo: i64, have_hi: i64 },

    #[error("harmonic cutoff too small: need {required}, have {available}")]
    CutoffTooSmall { required: usize, available: usize },

    #[error("negative index {0} in a physical-space formula")]
    Domain(i64),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("not a density matrix: {}", .0.join(", "))]
    NotDensity(Vec<String>),

    #[error("window mismatch: operator on [{a_min}, {a_max}], expected [{b_min}, {b_max}]")]
    WindowMismatch { a_min: i64, a_max: i64, b_min: i64, b_max: i64 },

    #[error("n-range [{have_lo}, {have_hi}] too small, need at least [{need_lo}, {need_hi}]")]
    NRange { need_lo: i64, need_hi: i64, have_lo: i64, have_hi: i64 },

    #[error("theta grid too coarse: {nodes} nodes cannot resolve harmonics up to {harmonic} (need {required})")]
    Aliasing { nodes: usize, harmonic: usize, required: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
