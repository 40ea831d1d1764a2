//! Remote chat-endpoint client.
//!
//! Standard chat-completion request shape `{model, messages:[{role,
//! content}]}`; the credential comes from an environment variable and is
//! never logged.

use std::time::Duration;

use camp_core::{ContextMessage, UpstreamClient, UpstreamError};
use serde_json::json;

pub struct HttpUpstreamClient {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpUpstreamClient {
    /// Reads the credential from `credential_env` at construction time.
    pub fn new(
        endpoint: impl Into<String>,
        model: impl Into<String>,
        credential_env: &str,
        timeout: Duration,
    ) -> Result<Self, UpstreamError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| UpstreamError::Request(e.to_string()))?;
        Ok(HttpUpstreamClient {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: std::env::var(credential_env).ok(),
            client,
        })
    }
}

impl std::fmt::Debug for HttpUpstreamClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpUpstreamClient")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl UpstreamClient for HttpUpstreamClient {
    fn complete(&self, context: &[ContextMessage]) -> Result<String, UpstreamError> {
        let body = json!({ "model": self.model, "messages": context });
        let mut request = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|e| UpstreamError::Request(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(UpstreamError::Request(format!("upstream returned {status}")));
        }
        let payload: serde_json::Value =
            response.json().map_err(|e| UpstreamError::Request(e.to_string()))?;
        payload["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| {
                UpstreamError::Request("response missing choices[0].message.content".to_string())
            })
    }
}
