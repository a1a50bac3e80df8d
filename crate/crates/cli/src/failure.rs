use std::fmt;

/// Exit codes are a stable contract: 0 success/consistent/yes,
/// 1 inconsistent/below-threshold/no, 2 malformed input, 3 non-convergence
/// or indeterminate.
pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_UNRESOLVED: i32 = 3;

/// A command failure carrying its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn malformed(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_MALFORMED, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<entail_core::Error> for Failure {
    fn from(error: entail_core::Error) -> Failure {
        let code = match error {
            entail_core::Error::Inconsistent => EXIT_NEGATIVE,
            _ => EXIT_MALFORMED,
        };
        Failure { code, message: error.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(error: std::io::Error) -> Failure {
        Failure::malformed(error.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(error: serde_json::Error) -> Failure {
        Failure::malformed(format!("invalid JSON: {error}"))
    }
}
