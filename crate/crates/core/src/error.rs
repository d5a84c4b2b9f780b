use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("q-binomial index out of range: [{n} choose {i}]")]
    BinomialRange { n: u32, i: u32 },

    #[error("negative time t = {0}")]
    NegativeTime(f64),

    #[error("modular group needs q > 0 (got q = {0}); the q < 0 phase has no branch choice")]
    NegativeQModular(f64),

    #[error("q = {0} is outside (-1, 1) \\ {{0}}")]
    InvalidQ(f64),

    #[error("invalid half-integer label: {0}")]
    HalfInteger(String),

    #[error("corepresentation expansion produced second-leg monomial {0} outside the degree-2l span")]
    UnexpectedSecondLeg(String),

    #[error("eigenvalue law violated at entry ({i}, {j}) of u^({l})")]
    EigenvalueMismatch { l: String, i: String, j: String },

    #[error("label l = {0} exceeds the exact-mode budget (l <= {1})")]
    LabelBudget(String, String),

    #[error("exponents incompatible: {0}")]
    Exponent(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("density matrix is not faithful: smallest eigenvalue {0:e} below floor")]
    NotFaithful(f64),

    #[error("subalgebra is not invariant under the modular group (defect {0:e}); no state-preserving expectation exists")]
    NotModularInvariant(f64),

    #[error("semigroup does not leave the subalgebra invariant (defect {0:e})")]
    SemigroupNotInvariant(f64),

    #[error("order precondition violated: {0}")]
    Order(String),

    #[error("element is not in the mean-zero subspace (fixed-point component norm {0:e}); project it first")]
    NotCirc(f64),

    #[error("invalid semigroup: {0}")]
    Semigroup(String),

    #[error("field of torus degree {degree} aliases on {samples} samples")]
    Aliasing { degree: i64, samples: usize },

    #[error("kernel is not positive definite: min eigenvalue {0:e}")]
    KernelNotPositive(f64),

    #[error("dilation depth exceeded: requested {requested}, available {depth}")]
    DepthExceeded { requested: usize, depth: usize },

    #[error("dilation size {0} exceeds the memory cap {1}")]
    Budget(usize, usize),

    #[error("coefficient is not real: {0}")]
    NotReal(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
