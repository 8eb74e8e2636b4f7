//! OpenAI-compatible chat-completions adapter (blocking).

use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::{CompletionRequest, Provider, ProviderError, ProviderReply};

#[derive(Debug, Clone)]
pub struct OpenAiProvider {
    id: String,
    base_url: String,
    model: String,
    api_key: String,
    agent: ureq::Agent,
}

impl OpenAiProvider {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>, api_key: impl Into<String>, timeout: Duration) -> Self {
        let model = model.into();
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        OpenAiProvider {
            id: format!("openai:{model}"),
            base_url: base_url.into().trim_end_matches('/').to_string(),
            model,
            api_key: api_key.into(),
            agent,
        }
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url)
    }

    pub fn request_body(&self, req: &CompletionRequest) -> Value {
        json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": req.system_prompt},
                {"role": "user", "content": req.user_message},
            ],
            "max_tokens": req.max_tokens,
            "temperature": req.temperature,
        })
    }
}

/// Pulls text and usage out of a chat-completions response body.
pub fn parse_response(body: &Value) -> Result<ProviderReply, String> {
    let text = body
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| "response has no choices[0].message.content".to_string())?;
    let usage = |key: &str| body.pointer(&format!("/usage/{key}")).and_then(Value::as_u64).unwrap_or(0);
    Ok(ProviderReply {
        text: text.to_string(),
        prompt_tokens: usage("prompt_tokens"),
        completion_tokens: usage("completion_tokens"),
        latency_s: None,
    })
}

impl Provider for OpenAiProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, req: &CompletionRequest) -> Result<ProviderReply, ProviderError> {
        let started = Instant::now();
        let fail = |message: String| ProviderError {
            message,
            latency_s: Some(started.elapsed().as_secs_f64()),
        };
        let mut response = self
            .agent
            .post(&self.endpoint())
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(self.request_body(req))
            .map_err(|e| fail(format!("transport: {e}")))?;
        let status = response.status().as_u16();
        let body: Value = response
            .body_mut()
            .read_json()
            .map_err(|e| fail(format!("HTTP {status}: unreadable body: {e}")))?;
        if !(200..300).contains(&status) {
            let detail = body.pointer("/error/message").and_then(Value::as_str).unwrap_or("no detail");
            return Err(fail(format!("HTTP {status}: {detail}")));
        }
        let mut reply = parse_response(&body).map_err(fail)?;
        reply.latency_s = Some(started.elapsed().as_secs_f64());
        Ok(reply)
    }
}
