use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pencil: {0}")]
    InvalidPencil(String),
    #[error("precision exhausted at {digits} digits without meeting the residual target")]
    PrecisionExhausted { digits: u32 },
    #[error("curve is degenerate: discriminant vanishes identically")]
    DegenerateCurve,
    #[error("characteristic equation is degenerate (leading or constant coefficient vanishes)")]
    DegenerateCharEq,
    #[error("{0} is not an eigenvalue of the pencil at the requested degree")]
    NotAnEigenvalue(Complex64),
    #[error("resonant degree: diagonal entry for z^{m} vanishes")]
    ResonantDegree { m: usize },
    #[error("xi_{j} is a multiple root of the reciprocal characteristic equation")]
    MultipleXi { j: usize },
    #[error("path passes within clearance of branch point {branch_point} (at {z})")]
    BranchCollision { z: Complex64, branch_point: Complex64 },
    #[error("series order filtration violated at level {i}")]
    OrderViolation { i: usize },
    #[error("constant-term polynomial has degree below k")]
    RootDeficient,
    #[error("|lambda| = {lambda} is below the large-lambda threshold {threshold}")]
    LambdaBelowThreshold { lambda: f64, threshold: f64 },
    #[error("epsilon_1 does not annihilate the constant term (residual {residual:e})")]
    NotACandidate { residual: f64 },
    #[error("Phi_0 vanishes at order {m}")]
    ResonantPhi0 { m: usize },
    #[error("evaluation point coincides with an atom")]
    AtomCollision,
    #[error("adaptive quadrature did not reach tolerance")]
    QuadratureFail,
    #[error("level-curve corrector lost track at {z}")]
    LostTrack { z: Complex64 },
    #[error("no density window contains enough atoms")]
    SparseWindow,
    #[error("points b1, b2, b3 are collinear")]
    CollinearB,
    #[error("invalid rectangle: {0}")]
    InvalidRect(String),
    #[error("invalid branch pair or family: {0}")]
    InvalidPair(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
