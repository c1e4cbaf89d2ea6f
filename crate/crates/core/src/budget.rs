use crate::error::{Error, Result};

/// Environment variable overriding the global simplex budget.
pub const BUDGET_ENV: &str = "RELCAT_BUDGET";

pub const DEFAULT_SIMPLEX_BUDGET: usize = 16_000_000;

/// Cap on the number of simplices (or derived morphisms) a single construction may produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_items: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_items: DEFAULT_SIMPLEX_BUDGET,
        }
    }
}

impl Budget {
    pub fn new(max_items: usize) -> Self {
        Budget { max_items }
    }

    /// Default budget, overridden by `RELCAT_BUDGET` when it parses as an integer.
    pub fn from_env() -> Self {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(Budget::new)
            .unwrap_or_default()
    }

    pub fn check(&self, used: usize, context: impl FnOnce() -> String) -> Result<()> {
        if used > self.max_items {
            Err(Error::BudgetExceeded {
                budget: self.max_items,
                context: context(),
            })
        } else {
            Ok(())
        }
    }
}
