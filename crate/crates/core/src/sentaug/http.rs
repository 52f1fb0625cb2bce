//! Client for the rewrite wire protocol: `POST {endpoint}/rewrite` with a
//! JSON [`RewriteRequest`], answered by `{"text": ...}`.

use parking_lot::{Condvar, Mutex};

use super::{BackendConfig, BackendError, RewriteBackend, RewriteRequest, RewriteResponse};
use crate::error::Result;

pub struct HttpBackend {
    agent: ureq::Agent,
    url: String,
    inflight: Mutex<usize>,
    released: Condvar,
    max_inflight: usize,
}

impl HttpBackend {
    pub fn new(config: &BackendConfig) -> Result<Self> {
        config.validate()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpBackend {
            agent,
            url: format!("{}/rewrite", config.endpoint.as_str().trim_end_matches('/')),
            inflight: Mutex::new(0),
            released: Condvar::new(),
            max_inflight: config.max_inflight,
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn acquire(&self) -> Permit<'_> {
        let mut n = self.inflight.lock();
        while *n >= self.max_inflight {
            self.released.wait(&mut n);
        }
        *n += 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a HttpBackend);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.inflight.lock() -= 1;
        self.0.released.notify_one();
    }
}

impl RewriteBackend for HttpBackend {
    fn rewrite(&self, request: &RewriteRequest) -> Result<RewriteResponse, BackendError> {
        let _permit = self.acquire();
        let mut response = self
            .agent
            .post(&self.url)
            .send_json(request)
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(BackendError::Status(status));
        }
        response
            .body_mut()
            .read_json::<RewriteResponse>()
            .map_err(|e| BackendError::Malformed(e.to_string()))
    }
}
