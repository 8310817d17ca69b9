use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value at lattice index {index}")]
    NonFinite { index: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grids of the operands differ")]
    GridMismatch,
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("field is not compactly supported on open axis {axis} (edge amplitude {ratio:e} of max)")]
    NotCompact { axis: usize, ratio: f64 },
    #[error("gauge ambiguity: k = 0 component of relative size {relative:e}")]
    GaugeAmbiguity { relative: f64 },
    #[error("field is not divergence-free (relative divergence {relative:e})")]
    NotDivergenceFree { relative: f64 },
    #[error("packet width {width:e} is narrower than the wavelength {wavelength:e}")]
    SubWavelength { width: f64, wavelength: f64 },
    #[error("aliasing: {0}")]
    Aliasing(String),
    #[error("carrier is not commensurate with the periodic lattice: {0}")]
    Incommensurate(String),
    #[error("packet support too close to the boundary: {0}")]
    SupportTooClose(String),
    #[error("total spin is zero; energy/spin and momentum/spin ratios are undefined")]
    UndefinedRatio,
    #[error("cannot normalize a packet with zero total spin")]
    CannotNormalize,
    #[error("invalid mode: {0}")]
    InvalidMode(String),
    #[error("speed {speed} is not below the speed of light {c}")]
    Superluminal { speed: f64, c: f64 },
    #[error("de Broglie wavelength is infinite at zero speed")]
    InfiniteWavelength,
    #[error("invalid boost: |beta| = {beta} must be below 1")]
    InvalidBoost { beta: f64 },
    #[error("split-step stability guard violated: potential phase per step {phase:e} >= 0.1")]
    StepTooLarge { phase: f64 },
    #[error("sampling: {0}")]
    Sampling(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
