//! Embedding providers built from configuration, including the HTTP client
//! for an external embedding service.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use variety_core::distance::{
    DistanceError, EmbedItem, EmbeddingProvider, EmbeddingVector, HashedBagOfWords,
};

use crate::config::ProviderConfig;
use crate::io::{load_vectors, IoError};

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    input: Vec<&'a str>,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

/// Client for `POST {"model", "input": [...]}` → `{"vectors": [[...], ...]}`.
pub struct HttpEmbeddingClient {
    endpoint: String,
    model: String,
    token: Option<String>,
    batch_size: usize,
    client: reqwest::blocking::Client,
}

impl HttpEmbeddingClient {
    pub fn new(
        endpoint: impl Into<String>,
        model: impl Into<String>,
        token: Option<String>,
        batch_size: usize,
        timeout: Duration,
    ) -> Result<Self, DistanceError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| DistanceError::ProviderUnavailable(e.to_string()))?;
        Ok(Self {
            endpoint: endpoint.into(),
            model: model.into(),
            token,
            batch_size: batch_size.max(1),
            client,
        })
    }

    fn call(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, DistanceError> {
        let mut request = self.client.post(&self.endpoint).json(&EmbedRequest {
            model: &self.model,
            input: texts.to_vec(),
        });
        if let Some(token) = &self.token {
            request = request.bearer_auth(token);
        }
        let response = request.send().map_err(|e| {
            DistanceError::ProviderUnavailable(format!("{}: {e}", self.endpoint))
        })?;
        let status = response.status();
        let body = response
            .text()
            .map_err(|e| DistanceError::ProviderUnavailable(format!("{}: {e}", self.endpoint)))?;
        if !status.is_success() {
            let snippet: String = body.chars().take(500).collect();
            return Err(DistanceError::ProviderUnavailable(format!(
                "{} returned {status}: {snippet}",
                self.endpoint
            )));
        }
        let parsed: EmbedResponse = serde_json::from_str(&body)
            .map_err(|e| DistanceError::InvalidResponse(format!("{}: {e}", self.endpoint)))?;
        if parsed.vectors.len() != texts.len() {
            return Err(DistanceError::InvalidResponse(format!(
                "sent {} texts, got {} vectors",
                texts.len(),
                parsed.vectors.len()
            )));
        }
        Ok(parsed.vectors)
    }
}

impl EmbeddingProvider for HttpEmbeddingClient {
    fn provider_id(&self) -> String {
        format!("service:{}", self.model)
    }

    fn embed_batch(&self, items: &[EmbedItem<'_>]) -> Result<Vec<EmbeddingVector>, DistanceError> {
        let mut out = Vec::with_capacity(items.len());
        for chunk in items.chunks(self.batch_size) {
            let texts: Vec<&str> = chunk.iter().map(|i| i.text).collect();
            for values in self.call(&texts)? {
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(DistanceError::InvalidResponse("non-finite vector component".into()));
                }
                out.push(EmbeddingVector {
                    values,
                    provider_id: self.provider_id(),
                });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Io(#[from] IoError),
}

pub fn build_provider(config: &ProviderConfig) -> Result<Box<dyn EmbeddingProvider>, ProviderError> {
    Ok(match config {
        ProviderConfig::Hash { dimension } => Box::new(HashedBagOfWords::new(*dimension)),
        ProviderConfig::Service {
            endpoint,
            model,
            token,
            batch_size,
            timeout_secs,
        } => Box::new(HttpEmbeddingClient::new(
            endpoint.clone(),
            model.clone(),
            token.clone(),
            *batch_size,
            Duration::from_secs(*timeout_secs),
        )?),
        ProviderConfig::Precomputed { path } => Box::new(load_vectors(path)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use variety_core::concept::AbstractionLevel;

    #[test]
    fn unreachable_service_is_unavailable() {
        // port 9 (discard) on localhost is almost never listening
        let client = HttpEmbeddingClient::new("http://127.0.0.1:9/embed", "m", None, 8, Duration::from_secs(2)).unwrap();
        let item = EmbedItem {
            concept_id: 1,
            level: AbstractionLevel::Part,
            text: "pot",
        };
        assert!(matches!(client.embed_batch(&[item]), Err(DistanceError::ProviderUnavailable(_))));
    }

    #[test]
    fn hash_provider_from_default_config() {
        let p = build_provider(&ProviderConfig::default()).unwrap();
        assert_eq!(p.provider_id(), "hash-bow-384");
    }
}
