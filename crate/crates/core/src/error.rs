use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("no sign change over bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    Convergence {
        what: &'static str,
        iterations: usize,
    },

    #[error(
        "near resonance: levels {from}->{to} detuned {detuning_ghz:.4} GHz from the cavity, \
         coupling {coupling_ghz:.4} GHz"
    )]
    NearResonance {
        from: usize,
        to: usize,
        detuning_ghz: f64,
        coupling_ghz: f64,
    },

    #[error("underdetermined: {0}")]
    Underdetermined(String),

    #[error("frequency grid [{grid_min_ghz}, {grid_max_ghz}] GHz does not cover {needed_ghz} GHz")]
    Coverage {
        grid_min_ghz: f64,
        grid_max_ghz: f64,
        needed_ghz: f64,
    },

    #[error("normal equations are rank deficient")]
    RankDeficient,

    /// Iteration cap reached; `best` holds the best parameters seen.
    #[error("fit did not converge after {iterations} iterations (cost {cost:e})")]
    FitNonConvergence {
        iterations: usize,
        best: Vec<f64>,
        cost: f64,
    },

    #[error("numerical error: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. }
                | Error::RankDeficient
                | Error::FitNonConvergence { .. }
                | Error::Numerical(_)
        )
    }
}

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($fmt:tt)+) => {
        if !($cond) {
            return Err($crate::error::Error::$variant(alloc::format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
