use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("frame {index}: {}: {source}", path.display())]
    FrameIo { index: usize, path: PathBuf, source: io::Error },
    #[error("frame {index}: {source}")]
    Png { index: usize, source: image::ImageError },
    #[error("frame {index}: expected {}x{}, found {}x{}", expected.0, expected.1, found.0, found.1)]
    FrameSize { index: usize, expected: (usize, usize), found: (usize, usize) },
    #[error("frame {index}: raw file holds {found} bytes, {needed} needed")]
    TruncatedRaw { index: usize, needed: usize, found: usize },
    #[error("flow dump: {0}")]
    BadFlowDump(&'static str),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Parse(String),
    /// Failure while encoding or evaluating.
    #[error("{0}")]
    Codec(omra_core::Error),
    /// Failure while parsing or decoding a bitstream.
    #[error("bitstream: {0}")]
    Bitstream(omra_core::Error),
}

impl Error {
    /// Process exit status: 3 for bitstream errors, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Bitstream(_) => 3,
            _ => 2,
        }
    }
}

impl From<omra_core::Error> for Error {
    fn from(e: omra_core::Error) -> Error {
        Error::Codec(e)
    }
}
