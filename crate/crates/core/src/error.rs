use core::fmt;

/// Errors raised by rule steps and oracles. All of these indicate either a
/// bug in a transition rule or an out-of-contract call, never a statistical
/// outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleError {
    /// A stack exceeded the proven `2n` bound; the rule is broken.
    StackHardCap { site: i64, value: u32, cap: u32 },
    /// A stack exceeded the configured soft cap (default 255).
    StackSoftCap { site: i64, value: u32, cap: u32 },
    /// A register value was about to be written outside a window lattice.
    WindowEscape { t: u64 },
    /// The two defect registers of a symmetric run stopped agreeing.
    MirrorDiverged { t: u64 },
    /// Parameter outside its documented range.
    InvalidParam(&'static str),
    /// An exhaustive-enumeration oracle was asked for more state than the
    /// size guard allows.
    SizeGuard(&'static str),
    /// A proven chunk-decomposition property failed to hold.
    ChunkInvariant(&'static str),
    /// Numerical routine could not proceed (degenerate input).
    Degenerate(&'static str),
}

impl fmt::Display for RuleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleError::StackHardCap { site, value, cap } => {
                write!(f, "stack at site {site} reached {value}, above hard cap {cap}")
            }
            RuleError::StackSoftCap { site, value, cap } => {
                write!(f, "stack at site {site} reached {value}, above soft cap {cap}")
            }
            RuleError::WindowEscape { t } => {
                write!(f, "write outside the window lattice at iteration {t}")
            }
            RuleError::MirrorDiverged { t } => {
                write!(f, "defect registers of the two directions diverged at iteration {t}")
            }
            RuleError::InvalidParam(what) => write!(f, "invalid parameter: {what}"),
            RuleError::SizeGuard(what) => write!(f, "size guard exceeded: {what}"),
            RuleError::ChunkInvariant(what) => write!(f, "chunk invariant violated: {what}"),
            RuleError::Degenerate(what) => write!(f, "degenerate input: {what}"),
        }
    }
}

#[cfg(test)]
impl std::error::Error for RuleError {}
