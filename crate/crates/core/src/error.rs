use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The photon is never detected at the output port, so the conditional
    /// state (and therefore its fidelity) is undefined.
    #[error("no herald: success probability {success_probability:e} (p_loss = {p_loss}, p_reject = {p_reject})")]
    NoHerald {
        success_probability: f64,
        p_loss: f64,
        p_reject: f64,
    },

    #[error("unknown optical path `{0}`")]
    UnknownPath(String),

    #[error("optical path `{0}` is declared twice")]
    DuplicatePath(String),

    #[error("output port `{path}` ({polarization}) already carries amplitude")]
    PortOccupied {
        path: String,
        polarization: &'static str,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }

    pub fn is_no_herald(&self) -> bool {
        matches!(self, Error::NoHerald { .. })
    }
}
