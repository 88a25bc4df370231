pub mod diagnose;
pub mod fit;
pub mod predict;
pub mod simulate;
pub mod study;

use crate::error::{CliError, Result};

/// Worker-thread cap from the environment, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("INFLAQUANT_THREADS") {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| {
                CliError::validation(format!("INFLAQUANT_THREADS=`{v}` is not a positive integer"))
            })?;
            if n == 0 {
                return Err(CliError::validation("INFLAQUANT_THREADS must be at least 1"));
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}
