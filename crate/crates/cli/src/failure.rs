use std::fmt::Display;

/// A failed command: either the caller's fault (exit 2) or the
/// environment's (exit 1).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    pub fn usage(msg: impl Display) -> Self {
        Failure::Usage(msg.to_string())
    }

    pub fn runtime(msg: impl Display) -> Self {
        Failure::Runtime(msg.to_string())
    }

    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<spataudio::Error> for Failure {
    fn from(e: spataudio::Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}
