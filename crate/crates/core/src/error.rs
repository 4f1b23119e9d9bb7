use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Antenna coordinate outside the waveguide span `[0, L]`.
    #[error("antenna position {x} m outside waveguide span [0, {len} m]")]
    AntennaOutOfRange { x: f64, len: f64 },

    /// A private power exceeded its interference cap, so the conservative
    /// rate form is undefined.
    #[error("private power {power} W is not below its interference cap {cap} W")]
    InfeasiblePower { power: f64, cap: f64 },

    /// Exhaustive state enumeration would exceed the configured budget.
    #[error("enumeration of {states} request states exceeds budget {budget}")]
    EnumerationBudget { states: u128, budget: u128 },

    /// No power allocation satisfies the SIC feasibility interval.
    #[error("state infeasible: {context}")]
    Infeasible { context: String },

    /// A metric was requested from an infeasible solution.
    #[error("solution is infeasible; {context}")]
    InfeasibleSolution { context: String },

    /// Configuration field failed validation.
    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// Configuration file could not be parsed.
    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
