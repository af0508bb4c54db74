// SPDX-License-Identifier: Apache-2.0

//! File formats, configuration and the sweep harness around `rqd-core`.

pub mod cli;
pub mod config;
pub mod formats;
pub mod harness;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] rqd_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status: `1` for bad configuration or input, `2` for
    /// failures while computing.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Format(_) => 1,
            Self::Core(
                rqd_core::Error::InvalidConfig(_) | rqd_core::Error::InvalidNoiseParams(_),
            ) => 1,
            Self::Core(_) | Self::Io(_) => 2,
        }
    }
}
