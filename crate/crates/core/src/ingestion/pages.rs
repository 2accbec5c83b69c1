use std::time::Duration;

use reqwest::blocking::Client;
use url::Url;

use super::{BudgetTracker, FetchBudget, IngestError};

/// Hosts whose pages may be cached: the Q&A site and the app store.
pub const ALLOWED_HOSTS: &[&str] = &["stackoverflow.com", "www.stackoverflow.com", "play.google.com"];

const USER_AGENT: &str = concat!("ethoscan/", env!("CARGO_PKG_VERSION"));

/// Retrieves pages from allowlisted hosts. With an origin override every
/// request is sent to that origin instead, keeping path and query.
#[derive(Debug, Clone)]
pub struct PageFetcher {
    client: Client,
    origin: Option<Url>,
}

impl PageFetcher {
    pub fn new() -> Result<Self, IngestError> {
        let client = Client::builder()
            .user_agent(USER_AGENT)
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| IngestError::Network {
                url: String::new(),
                message: e.to_string(),
            })?;
        Ok(PageFetcher { client, origin: None })
    }

    pub fn with_origin(mut self, origin: &str) -> Result<Self, IngestError> {
        self.origin = Some(Url::parse(origin).map_err(|_| IngestError::InvalidUrl(origin.to_string()))?);
        Ok(self)
    }

    /// `Ok(None)` when the page is unavailable (HTTP error status or a
    /// failed connection); a host outside [`ALLOWED_HOSTS`] is an error.
    pub fn fetch(&self, tracker: &mut BudgetTracker, url: &str) -> Result<Option<String>, IngestError> {
        let parsed = Url::parse(url).map_err(|_| IngestError::InvalidUrl(url.to_string()))?;
        let host = parsed.host_str().unwrap_or("").to_ascii_lowercase();
        if !matches!(parsed.scheme(), "http" | "https") || !ALLOWED_HOSTS.contains(&host.as_str()) {
            return Err(IngestError::DisallowedHost(host));
        }
        let target = match &self.origin {
            Some(origin) => {
                let mut t = origin.clone();
                t.set_path(parsed.path());
                t.set_query(parsed.query());
                t
            }
            None => parsed,
        };
        tracker.acquire()?;
        let response = match self.client.get(target.as_str()).send() {
            Ok(r) => r,
            Err(e) => {
                log::warn!("page {url} unavailable: {e}");
                return Ok(None);
            }
        };
        if !response.status().is_success() {
            log::warn!("page {url} unavailable: HTTP {}", response.status().as_u16());
            return Ok(None);
        }
        Ok(response.text().ok())
    }
}

/// Fetches one page under its own budget.
pub fn fetch_external_page(url: &str, budget: FetchBudget) -> Result<Option<String>, IngestError> {
    budget.validate()?;
    PageFetcher::new()?.fetch(&mut BudgetTracker::new(budget), url)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blog_is_disallowed() {
        let err = fetch_external_page("https://blog.example.com/post", FetchBudget::anonymous()).unwrap_err();
        assert!(matches!(err, IngestError::DisallowedHost(h) if h == "blog.example.com"));
    }

    #[test]
    fn disallowed_host_consumes_no_budget() {
        let mut tracker = BudgetTracker::new(FetchBudget::anonymous());
        let _ = PageFetcher::new().unwrap().fetch(&mut tracker, "ftp://play.google.com/x");
        assert_eq!(tracker.used(), 0);
    }
}
