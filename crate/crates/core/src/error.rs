use thiserror::Error;

/// Configuration and argument errors shared by the library modules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("word width {0} is not supported (must be even and within 4..=64)")]
    InvalidWidth(u32),
    #[error("column {column} is out of range for width {width}")]
    ColumnOutOfRange { column: u32, width: u32 },
    #[error("value {value:#x} exceeds the {width}-bit mask")]
    ValueOutOfRange { value: u64, width: u32 },
    #[error("prefix has {have} columns but at least {need} are required")]
    InsufficientColumns { have: u32, need: u32 },
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
