//! Up-front memory estimates.

use crate::error::{Error, Result};

/// Default cap on the estimated working set of one engine call.
pub const DEFAULT_BUDGET_MB: u64 = 3072;

const COMPLEX_BYTES: f64 = 16.0;

/// Megabytes used by `count` complex samples.
pub fn complex_mb(count: f64) -> f64 {
    count * COMPLEX_BYTES / (1024.0 * 1024.0)
}

/// Errors when `need_mb` exceeds `cap_mb`.
pub fn check(need_mb: f64, cap_mb: u64) -> Result<()> {
    if need_mb > cap_mb as f64 {
        return Err(Error::Budget { need_mb: need_mb.ceil() as u64, cap_mb });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_gate() {
        assert!(check(complex_mb(1e6), 100).is_ok());
        assert!(matches!(check(complex_mb(1e9), 100), Err(Error::Budget { cap_mb: 100, .. })));
    }
}
