use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("residual Y-part after E2hat rewrite: {0}")]
    ResidualY(String),
    #[error("invalid index: {0}")]
    InvalidIndex(String),
    #[error("expansion window too small: need power {need}, window starts at {lo}")]
    WindowTooSmall { lo: i32, need: i32 },
    #[error("truncation order {order} below recommended bound {recommended}")]
    TruncationInconclusive { order: i32, recommended: i32 },
    #[error("input is not almost-elliptic")]
    NotAlmostElliptic,
    #[error("input is not elliptic: {0}")]
    NotElliptic(String),
    #[error("input is not quasi-elliptic in z{0}")]
    NotQuasiElliptic(u8),
    #[error("unsupported input: {0}")]
    UnsupportedInput(String),
    #[error("integration left a non-constant remainder: {0}")]
    NonConstantRemainder(String),
    #[error("arity {0} too small")]
    ArityTooSmall(usize),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("generator has no Fourier expansion: {0}")]
    UnsupportedGenerator(String),
    #[error("q-series truncation overflow: {0}")]
    TruncationOverflow(String),
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("index error: {0}")]
    IndexError(String),
}

impl Error {
    /// Stable module-qualified identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ResidualY(_) => "coeff_ring::ResidualY",
            Error::InvalidIndex(_) => "laurent::InvalidIndex",
            Error::WindowTooSmall { .. } => "laurent::WindowTooSmall",
            Error::TruncationInconclusive { .. } => "expr::TruncationInconclusive",
            Error::NotAlmostElliptic => "reg_integral::NotAlmostElliptic",
            Error::NotElliptic(_) => "reg_integral::NotElliptic",
            Error::NotQuasiElliptic(_) => "acycle::NotQuasiElliptic",
            Error::UnsupportedInput(_) => "reg_integral::UnsupportedInput",
            Error::NonConstantRemainder(_) => "reg_integral::NonConstantRemainder",
            Error::ArityTooSmall(_) => "forests::ArityTooSmall",
            Error::InvalidChain(_) => "forests::InvalidChain",
            Error::UnsupportedGenerator(_) => "q_oracle::UnsupportedGenerator",
            Error::TruncationOverflow(_) => "q_oracle::TruncationOverflow",
            Error::Syntax { .. } => "cli::SyntaxError",
            Error::IndexError(_) => "cli::IndexError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
