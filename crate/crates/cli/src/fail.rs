//! Failures carry the process exit code: 2 for bad input, 3 for
//! requests that exceed capacity bounds. (0/1 are reserved for clean
//! runs with matching/mismatching expectations.)

use judgebench_core::avnet::AvNetError;
use judgebench_core::kripke::KripkeError;
use judgebench_core::mck::MckError;
use judgebench_core::protocols::ProtocolError;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn capacity(message: impl Into<String>) -> Failure {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ProtocolError> for Failure {
    fn from(e: ProtocolError) -> Failure {
        match e {
            ProtocolError::RunSpaceTooLarge { .. } => Failure::capacity(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}

impl From<KripkeError> for Failure {
    fn from(e: KripkeError) -> Failure {
        match e {
            KripkeError::StateCap { .. } => Failure::capacity(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}

impl From<MckError> for Failure {
    fn from(e: MckError) -> Failure {
        Failure::input(e.to_string())
    }
}

impl From<AvNetError> for Failure {
    fn from(e: AvNetError) -> Failure {
        Failure::input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::input(e.to_string())
    }
}
