use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::IngestError;

/// Hard cap on live requests and minimum spacing between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FetchBudget {
    pub max_requests: u32,
    pub min_interval_ms: u64,
}

impl FetchBudget {
    /// Budget for authenticated use.
    pub fn authenticated() -> Self {
        FetchBudget {
            max_requests: 4000,
            min_interval_ms: 50,
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if self.max_requests == 0 {
            return Err(IngestError::InvalidBudget("maxRequests must be positive".into()));
        }
        Ok(())
    }

    /// Budget within the anonymous hourly allowance.
    pub fn anonymous() -> Self {
        FetchBudget {
            max_requests: 55,
            min_interval_ms: 200,
        }
    }
}

/// Counts requests against a [`FetchBudget`] and paces them.
#[derive(Debug)]
pub struct BudgetTracker {
    budget: FetchBudget,
    used: u32,
    last: Option<Instant>,
}

impl BudgetTracker {
    pub fn new(budget: FetchBudget) -> Self {
        BudgetTracker {
            budget,
            used: 0,
            last: None,
        }
    }

    pub fn used(&self) -> u32 {
        self.used
    }

    /// Reserves one request, sleeping as needed to keep the spacing.
    pub fn acquire(&mut self) -> Result<(), IngestError> {
        if self.used >= self.budget.max_requests {
            return Err(IngestError::BudgetExhausted { used: self.used });
        }
        let gap = Duration::from_millis(self.budget.min_interval_ms);
        if let Some(last) = self.last {
            let elapsed = last.elapsed();
            if elapsed < gap {
                thread::sleep(gap - elapsed);
            }
        }
        self.last = Some(Instant::now());
        self.used += 1;
        Ok(())
    }
}
