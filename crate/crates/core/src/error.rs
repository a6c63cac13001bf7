use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which sum of a shift tuple failed its constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    FiberSum,
    BaseSum,
    FiberSquareSum,
}

impl std::fmt::Display for Constraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Constraint::FiberSum => "sum of fiber shifts",
            Constraint::BaseSum => "sum of base shifts",
            Constraint::FiberSquareSum => "sum of squared fiber shifts",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid tau: imaginary part {im} is below the floor {floor}")]
    InvalidTau { im: f64, floor: f64 },

    #[error("invalid truncation policy: {0}")]
    InvalidPolicy(String),

    #[error("series did not converge within {max_terms} terms (last tail bound {tail_bound:e})")]
    NonConvergent { max_terms: usize, tail_bound: f64 },

    #[error("modular matrix ({a}, {b}; {c}, {d}) has determinant {det}, expected 1")]
    InvalidModularMatrix { a: i64, b: i64, c: i64, d: i64, det: i64 },

    #[error("sample z = {re} + {im}i sits at a zero of theta")]
    SampleAtZero { re: f64, im: f64 },

    #[error("contour passes within {min_abs:e} of a zero of theta")]
    ContourThroughZero { min_abs: f64 },

    #[error("adaptive quadrature did not reach tolerance")]
    QuadratureFailed,

    #[error("invalid monodromy pair: {0}")]
    InvalidPair(String),

    #[error("monodromy pair matches no row of the classification table: {0}")]
    Unclassified(String),

    #[error("no real power of {matrix} at exponent {exponent}")]
    NonRealPower { matrix: &'static str, exponent: f64 },

    #[error("|theta_M(p)| = {magnitude:e} is too small to divide by")]
    NearZeroBase { magnitude: f64 },

    #[error("constraint violated: {which} has magnitude {magnitude:e}")]
    ConstraintViolated { which: Constraint, magnitude: f64 },

    #[error("all sections vanish at ({x}, {y}, {s}, {t})")]
    AllSectionsVanish { x: f64, y: f64, s: f64, t: f64 },

    #[error("affine chart pivot has magnitude {magnitude:e}")]
    ChartDegenerate { magnitude: f64 },

    #[error("logarithm branch is ambiguous at this point")]
    BranchAmbiguous,

    #[error("invalid cycle: {0}")]
    InvalidCycle(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bundle file: {0}")]
    BundleFile(String),
}
