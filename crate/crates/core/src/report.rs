//! JSON report envelope.
//!
//! Everything that varies between identical runs lives in `header`; the rest
//! of the document is a pure function of the configuration.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const TOOL: &str = "ideal-limits";

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub timestamp_unix: u64,
}

impl Header {
    pub fn now() -> Self {
        Header {
            tool: TOOL,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<C, R> {
    pub header: Header,
    pub version: &'static str,
    pub config: C,
    pub result: R,
}

#[derive(Serialize)]
struct Body<'a, C, R> {
    version: &'static str,
    config: &'a C,
    result: &'a R,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn new(config: C, result: R) -> Self {
        Report {
            header: Header::now(),
            version: VERSION,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// The report without its header, for byte-level comparisons.
    pub fn body_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&Body {
            version: self.version,
            config: &self.config,
            result: &self.result,
        })
    }
}

/// Drops the `header` member of a serialized report.
pub fn strip_header(json: &str) -> serde_json::Result<String> {
    let mut value: serde_json::Value = serde_json::from_str(json)?;
    if let Some(map) = value.as_object_mut() {
        map.remove("header");
    }
    serde_json::to_string_pretty(&value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_isolated() {
        let a = Report::new("cfg", vec![1, 2]);
        let mut b = Report::new("cfg", vec![1, 2]);
        b.header.timestamp_unix += 1000;
        assert_ne!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(
            strip_header(&a.to_json().unwrap()).unwrap(),
            strip_header(&b.to_json().unwrap()).unwrap()
        );
        assert_eq!(a.body_json().unwrap(), b.body_json().unwrap());
    }
}
