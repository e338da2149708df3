//! Generic JSON-over-HTTP translation adapter.
//!
//! Request: `POST endpoint` with a JSON object holding the text, language
//! codes and any passthrough parameters under configurable field names.
//! Response: a JSON document; the translation is read at a JSON pointer.

use std::collections::BTreeMap;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::header::RETRY_AFTER;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{BackendError, Translator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpAdapter {
    pub text_field: String,
    pub source_field: String,
    pub target_field: String,
    /// JSON pointer to the translated string in the response body.
    pub response_pointer: String,
    /// Send the key as this query parameter instead of a bearer token.
    pub api_key_param: Option<String>,
    pub timeout_secs: u64,
    /// Extra request fields passed through verbatim (model variant, format, ...).
    pub params: BTreeMap<String, Value>,
}

impl Default for HttpAdapter {
    fn default() -> Self {
        HttpAdapter {
            text_field: "text".into(),
            source_field: "source".into(),
            target_field: "target".into(),
            response_pointer: "/translation".into(),
            api_key_param: None,
            timeout_secs: 30,
            params: BTreeMap::new(),
        }
    }
}

pub struct HttpTranslator {
    client: Client,
    endpoint: String,
    api_key: String,
    source_lang: String,
    target_lang: String,
    adapter: HttpAdapter,
}

impl HttpTranslator {
    pub fn new(
        endpoint: &str,
        api_key: String,
        source_lang: &str,
        target_lang: &str,
        adapter: HttpAdapter,
    ) -> Result<Self, BackendError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(adapter.timeout_secs))
            .build()
            .map_err(|e| BackendError::Network(e.to_string()))?;
        Ok(HttpTranslator {
            client,
            endpoint: endpoint.to_string(),
            api_key,
            source_lang: source_lang.to_string(),
            target_lang: target_lang.to_string(),
            adapter,
        })
    }

    fn body(&self, text: &str) -> Value {
        let mut body = Map::new();
        for (k, v) in &self.adapter.params {
            body.insert(k.clone(), v.clone());
        }
        body.insert(self.adapter.text_field.clone(), Value::from(text));
        body.insert(
            self.adapter.source_field.clone(),
            Value::from(self.source_lang.as_str()),
        );
        body.insert(
            self.adapter.target_field.clone(),
            Value::from(self.target_lang.as_str()),
        );
        Value::Object(body)
    }
}

impl Translator for HttpTranslator {
    fn translate(&self, text: &str) -> Result<String, BackendError> {
        let mut request = self.client.post(&self.endpoint).json(&self.body(text));
        request = match &self.adapter.api_key_param {
            Some(param) => request.query(&[(param.as_str(), self.api_key.as_str())]),
            None => request.bearer_auth(&self.api_key),
        };
        let response = request
            .send()
            .map_err(|e| BackendError::Network(e.to_string()))?;
        let status = response.status();
        if status == StatusCode::UNAUTHORIZED || status == StatusCode::FORBIDDEN {
            return Err(BackendError::Auth(format!("server answered {status}")));
        }
        if status == StatusCode::TOO_MANY_REQUESTS {
            let retry_after = response
                .headers()
                .get(RETRY_AFTER)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse::<u64>().ok())
                .map(Duration::from_secs);
            return Err(BackendError::Quota { retry_after });
        }
        if status.is_server_error() {
            return Err(BackendError::Network(format!("server answered {status}")));
        }
        if !status.is_success() {
            return Err(BackendError::Protocol(format!("server answered {status}")));
        }
        let body: Value = response
            .json()
            .map_err(|e| BackendError::Protocol(format!("invalid JSON response: {e}")))?;
        body.pointer(&self.adapter.response_pointer)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| {
                BackendError::Protocol(format!(
                    "no string at `{}` in response",
                    self.adapter.response_pointer
                ))
            })
    }
}
