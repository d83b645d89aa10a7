//! JSON-over-HTTP provider clients.
//!
//! Every kind is a `POST` to the configured URL with a bearer token when
//! one is set. Request and response bodies:
//!
//! | kind        | request                                   | response                              |
//! |-------------|-------------------------------------------|---------------------------------------|
//! | transcriber | `{file_name, audio_base64}`               | transcript artifact                   |
//! | coreference | `{text, tokens}`                          | `{clusters: [[[start, end], ...]]}`   |
//! | summarizer  | `{text, max_output_words}`                | `{summary}`                           |
//! | embedder    | `{text}`                                  | `{embedding: [f64]}`                  |
//! | scorer      | `{reference, candidate}`                  | `{score}`                             |
//!
//! Coreference indices refer to `tokens`, the whitespace tokens of `text`.

use std::path::Path;
use std::thread;
use std::time::Duration;

use base64::Engine;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{
    CorefResolver, Embedder, Endpoint, LocalClusters, ProviderDescriptor, ProviderKind, Scorer,
    Summarizer, Transcriber,
};
use crate::error::ProviderError;
use crate::model::TranscriptArtifact;

#[derive(Debug, Clone)]
pub struct RemoteOptions {
    pub timeout: Duration,
    /// Retries after the first attempt.
    pub retries: u32,
    pub backoff_base: Duration,
}

impl Default for RemoteOptions {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(60),
            retries: 2,
            backoff_base: Duration::from_millis(250),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RemoteClient {
    descriptor: ProviderDescriptor,
    url: String,
    token: Option<String>,
    options: RemoteOptions,
    http: reqwest::blocking::Client,
}

enum Attempt {
    Retry(String),
    Fatal(ProviderError),
}

impl RemoteClient {
    pub fn new(
        kind: ProviderKind,
        url: &str,
        token: Option<String>,
        model_identifier: String,
        options: RemoteOptions,
    ) -> Result<Self, ProviderError> {
        let name = format!("remote-{}", kind.env_prefix().trim_start_matches("DS_").to_lowercase());
        let http = reqwest::blocking::Client::builder()
            .timeout(options.timeout)
            .build()
            .map_err(|e| ProviderError::Unavailable { provider: name.clone(), message: e.to_string() })?;
        Ok(Self {
            descriptor: ProviderDescriptor {
                kind,
                name,
                endpoint: Endpoint::Url(url.to_string()),
                model_identifier,
            },
            url: url.to_string(),
            token,
            options,
            http,
        })
    }

    pub fn descriptor(&self) -> &ProviderDescriptor {
        &self.descriptor
    }

    fn attempt<Req: Serialize, Resp: DeserializeOwned>(&self, body: &Req) -> Result<Resp, Attempt> {
        let mut req = self.http.post(&self.url).json(body);
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        let resp = req.send().map_err(|e| Attempt::Retry(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(Attempt::Retry(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(Attempt::Fatal(ProviderError::Unavailable {
                provider: self.descriptor.name.clone(),
                message: format!("HTTP {status}"),
            }));
        }
        let bytes = resp.bytes().map_err(|e| Attempt::Retry(e.to_string()))?;
        serde_json::from_slice(&bytes).map_err(|e| {
            Attempt::Fatal(ProviderError::malformed(&self.descriptor.name, e.to_string()))
        })
    }

    /// POSTs `body`, retrying transport failures, 5xx and 429 with
    /// exponential backoff.
    pub fn post_json<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        body: &Req,
    ) -> Result<Resp, ProviderError> {
        let mut last = String::new();
        for attempt in 0..=self.options.retries {
            if attempt > 0 {
                thread::sleep(self.options.backoff_base * 2u32.pow(attempt - 1));
            }
            match self.attempt(body) {
                Ok(r) => return Ok(r),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(msg)) => {
                    log::warn!("{} attempt {} failed: {msg}", self.descriptor.name, attempt + 1);
                    last = msg;
                }
            }
        }
        Err(ProviderError::Unavailable {
            provider: self.descriptor.name.clone(),
            message: format!("gave up after {} attempts: {last}", self.options.retries + 1),
        })
    }
}

macro_rules! remote_provider {
    ($name:ident) => {
        #[derive(Debug, Clone)]
        pub struct $name {
            client: RemoteClient,
        }

        impl $name {
            pub fn new(client: RemoteClient) -> Self {
                Self { client }
            }
        }
    };
}

remote_provider!(RemoteTranscriber);
remote_provider!(RemoteCoref);
remote_provider!(RemoteSummarizer);
remote_provider!(RemoteEmbedder);
remote_provider!(RemoteScorer);

#[derive(Serialize)]
struct TranscribeRequest<'a> {
    file_name: &'a str,
    audio_base64: String,
}

impl Transcriber for RemoteTranscriber {
    fn descriptor(&self) -> &ProviderDescriptor {
        self.client.descriptor()
    }

    fn transcribe(&self, audio: &Path) -> Result<TranscriptArtifact, ProviderError> {
        let bytes = std::fs::read(audio)
            .map_err(|e| ProviderError::InvalidInput(format!("{}: {e}", audio.display())))?;
        let file_name = audio.file_name().and_then(|n| n.to_str()).unwrap_or("audio");
        self.client.post_json(&TranscribeRequest {
            file_name,
            audio_base64: base64::engine::general_purpose::STANDARD.encode(bytes),
        })
    }
}

#[derive(Serialize)]
struct CorefRequest<'a> {
    text: &'a str,
    tokens: Vec<&'a str>,
}

#[derive(Deserialize)]
struct CorefResponse {
    clusters: LocalClusters,
}

impl CorefResolver for RemoteCoref {
    fn descriptor(&self) -> &ProviderDescriptor {
        self.client.descriptor()
    }

    fn resolve(&self, turn_text: &str) -> Result<LocalClusters, ProviderError> {
        let req = CorefRequest { text: turn_text, tokens: turn_text.split_whitespace().collect() };
        let resp: CorefResponse = self.client.post_json(&req)?;
        Ok(resp.clusters)
    }
}

#[derive(Serialize)]
struct SummarizeRequest<'a> {
    text: &'a str,
    max_output_words: usize,
}

#[derive(Deserialize)]
struct SummarizeResponse {
    summary: String,
}

impl Summarizer for RemoteSummarizer {
    fn descriptor(&self) -> &ProviderDescriptor {
        self.client.descriptor()
    }

    fn summarize(&self, text: &str, max_output_words: usize) -> Result<String, ProviderError> {
        let resp: SummarizeResponse =
            self.client.post_json(&SummarizeRequest { text, max_output_words })?;
        Ok(resp.summary)
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct EmbedResponse {
    embedding: Vec<f64>,
}

impl Embedder for RemoteEmbedder {
    fn descriptor(&self) -> &ProviderDescriptor {
        self.client.descriptor()
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let resp: EmbedResponse = self.client.post_json(&EmbedRequest { text })?;
        Ok(resp.embedding)
    }
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    reference: &'a str,
    candidate: &'a str,
}

#[derive(Deserialize)]
struct ScoreResponse {
    score: f64,
}

impl Scorer for RemoteScorer {
    fn descriptor(&self) -> &ProviderDescriptor {
        self.client.descriptor()
    }

    fn score(&self, reference: &str, candidate: &str) -> Result<f64, ProviderError> {
        let resp: ScoreResponse = self.client.post_json(&ScoreRequest { reference, candidate })?;
        Ok(resp.score)
    }
}
