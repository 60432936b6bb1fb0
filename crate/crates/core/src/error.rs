use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Two operands that must agree in size do not.
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// A plane buffer does not hold `width * height` samples.
    BadPlaneLength { expected: usize, found: usize },
    InvalidIntraPeriod(u32),
    /// `frame_count - 1` is not a multiple of the intra period.
    PartialGop { frame_count: usize, intra_period: u32 },
    InvalidScale(u32),
    /// Reference distances are undefined for intra frames.
    NotBFrame(usize),
    /// Reader ran past the end of a payload.
    BitstreamExhausted,
    /// More than 64 coefficients addressed in one block.
    ZigzagOverrun,
    /// Decoded motion vector exceeds the representable bound.
    MotionOutOfRange { value: i32, limit: i32 },
    BadMagic,
    UnsupportedVersion(u8),
    Corrupt(&'static str),
    InvalidConfig(&'static str),
    /// Estimator pyramid does not fit the frame at this scale.
    ScaleInfeasible { scale: u32, width: usize, height: usize },
    EmptyCandidates,
    /// RD curve is not strictly increasing in rate / non-decreasing in quality.
    NonMonotoneCurve,
    WrongPointCount(usize),
    NoOverlap,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => write!(
                f,
                "dimension mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::BadPlaneLength { expected, found } => {
                write!(f, "plane holds {found} samples, expected {expected}")
            }
            Error::InvalidIntraPeriod(p) => {
                write!(f, "intra period {p} is not one of 2, 4, 8, 16, 32, 64")
            }
            Error::PartialGop { frame_count, intra_period } => write!(
                f,
                "frame count {frame_count} is not 1 + a multiple of intra period {intra_period}"
            ),
            Error::InvalidScale(s) => write!(f, "scale factor {s} is not one of 1, 2, 4, 8"),
            Error::NotBFrame(i) => write!(f, "frame {i} is not a B frame"),
            Error::BitstreamExhausted => f.write_str("bitstream exhausted"),
            Error::ZigzagOverrun => f.write_str("coefficient run past index 63"),
            Error::MotionOutOfRange { value, limit } => {
                write!(f, "motion component {value} exceeds limit {limit}")
            }
            Error::BadMagic => f.write_str("bad magic"),
            Error::UnsupportedVersion(v) => write!(f, "unsupported bitstream version {v}"),
            Error::Corrupt(what) => write!(f, "corrupt bitstream: {what}"),
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::ScaleInfeasible { scale, width, height } => write!(
                f,
                "scale {scale} leaves a {width}x{height} frame too small for the estimator pyramid"
            ),
            Error::EmptyCandidates => f.write_str("no RD candidates"),
            Error::NonMonotoneCurve => f.write_str("RD curve is not monotone"),
            Error::WrongPointCount(n) => write!(f, "RD curve has {n} points, expected 4"),
            Error::NoOverlap => f.write_str("RD curves do not overlap in PSNR"),
        }
    }
}

impl core::error::Error for Error {}
