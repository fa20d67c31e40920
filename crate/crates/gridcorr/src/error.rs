use thiserror::Error;

/// Errors surfaced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} is not a unit modulo {1}")]
    NotAUnit(u64, u64),
    #[error("division by zero in Q(xi_{0})")]
    DivisionByZero(u64),
    #[error("cyclotomic context mismatch: conductor {0} vs {1}")]
    ContextMismatch(u64, u64),
    #[error("value is not rational")]
    NotRational,
    #[error("sequence does not sum to zero")]
    NotZeroSum,
    #[error("moment order {order} exceeds cap {cap}")]
    OrderExceeded { order: usize, cap: usize },
    #[error("moment table has no order-{0} data")]
    MissingTableOrder(usize),
    #[error("support does not generate the group modulo the given subgroup")]
    NotGenerating,
    #[error("element is not in the span of the generators modulo the subgroup")]
    NotInSpan,
    #[error("root recovery failed after exhausting the precision schedule")]
    RootRecoveryFailed,
    #[error("power-recovery exponent 2^{0} exceeds the configured budget")]
    ExponentBudget(u32),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("enumeration budget of {0} operations exceeded")]
    BudgetExceeded(u64),
    #[error("no assembly recipe over the correction family (conductor {0})")]
    NoAssemblyRecipe(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
