//! Shared blocking HTTP plumbing for the REST drivers.
//!
//! One mapping from transport outcomes to driver errors lives here so both
//! drivers behave identically:
//!
//! * connection, DNS, and timeout failures become [`DriverError::Unreachable`];
//! * a 401 status becomes [`DriverError::AuthFailed`], always;
//! * every other status is handed back to the caller, which knows whether a
//!   404 means a missing resource or a broken endpoint.

use std::time::Duration;

use serde::de::DeserializeOwned;
use umbrella_core::driver::{DriverConfig, DriverError};

/// Thin wrapper over a blocking HTTP client with Basic auth and a base URL.
pub(crate) struct HttpClient {
    client: reqwest::blocking::Client,
    base: String,
    username: String,
    password: String,
}

/// A non-401 response: status, optional Location header, and the body text.
pub(crate) struct HttpResponse {
    pub status: u16,
    pub location: Option<String>,
    pub body: String,
}

impl HttpResponse {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

impl HttpClient {
    pub fn new(config: &DriverConfig) -> Result<Self, DriverError> {
        let base = config.endpoint.trim_end_matches('/').to_string();
        if base.is_empty() {
            return Err(DriverError::Rejected("endpoint URL is empty".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.request_timeout_ms))
            .build()
            .map_err(|e| DriverError::Rejected(format!("building HTTP client: {e}")))?;
        Ok(HttpClient {
            client,
            base,
            username: config.username.clone(),
            password: config.password.clone(),
        })
    }

    pub fn get(&self, path: &str) -> Result<HttpResponse, DriverError> {
        self.send(reqwest::Method::GET, path, None)
    }

    pub fn post_json(&self, path: &str, body: String) -> Result<HttpResponse, DriverError> {
        self.send(reqwest::Method::POST, path, Some(body))
    }

    pub fn put_json(&self, path: &str, body: String) -> Result<HttpResponse, DriverError> {
        self.send(reqwest::Method::PUT, path, Some(body))
    }

    pub fn delete(&self, path: &str) -> Result<HttpResponse, DriverError> {
        self.send(reqwest::Method::DELETE, path, None)
    }

    fn send(
        &self,
        method: reqwest::Method,
        path: &str,
        body: Option<String>,
    ) -> Result<HttpResponse, DriverError> {
        let url = format!("{}{}", self.base, path);
        let mut request = self.client.request(method, &url);
        if !self.username.is_empty() || !self.password.is_empty() {
            request = request.basic_auth(&self.username, Some(&self.password));
        }
        if let Some(body) = body {
            request = request
                .header(reqwest::header::CONTENT_TYPE, "application/json")
                .body(body);
        }
        let response = request
            .send()
            .map_err(|e| DriverError::Unreachable(e.to_string()))?;
        let status = response.status().as_u16();
        if status == 401 {
            return Err(DriverError::AuthFailed);
        }
        let location = response
            .headers()
            .get(reqwest::header::LOCATION)
            .and_then(|v| v.to_str().ok())
            .map(String::from);
        let body = response
            .text()
            .map_err(|e| DriverError::ProtocolError(format!("reading response body: {e}")))?;
        Ok(HttpResponse { status, location, body })
    }
}

/// Decodes a JSON body, naming `what` in the error.
pub(crate) fn parse_json<T: DeserializeOwned>(body: &str, what: &str) -> Result<T, DriverError> {
    serde_json::from_str(body)
        .map_err(|e| DriverError::ProtocolError(format!("malformed {what} body: {e}")))
}

/// The error for a response whose status the operation cannot handle.
pub(crate) fn unexpected_status(op: &str, response: &HttpResponse) -> DriverError {
    let snippet: String = response.body.chars().take(200).collect();
    DriverError::Rejected(format!("{op}: HTTP {}: {snippet}", response.status))
}
