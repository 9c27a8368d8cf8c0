use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, TryLockError};
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use texelatt_core::corpus::{CorpusStore, DescriptorSource, PipelineConfig};
use texelatt_core::search::{FeedbackConstraint, SearchCorpus, SearchSession, SessionTranscript};

use crate::error::ApiError;

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub corpus: PathBuf,
    /// Built web UI served at `/`.
    pub static_dir: Option<PathBuf>,
    /// Transcripts are written here on every mutation and replayed at startup.
    pub sessions_dir: Option<PathBuf>,
    pub idle_timeout: Duration,
    pub source: DescriptorSource,
    pub pipeline: PipelineConfig,
    /// Seed for picking random targets.
    pub seed: u64,
}

impl ServerConfig {
    pub fn new(corpus: impl Into<PathBuf>) -> Self {
        Self {
            corpus: corpus.into(),
            static_dir: None,
            sessions_dir: None,
            idle_timeout: Duration::from_secs(30 * 60),
            source: DescriptorSource::Detected,
            pipeline: PipelineConfig::default(),
            seed: 0,
        }
    }
}

/// A live session; the session lock serializes feedback.
pub struct Slot {
    session: Mutex<SearchSession>,
    touched: Mutex<Instant>,
}

impl Slot {
    fn new(session: SearchSession) -> Self {
        Self { session: Mutex::new(session), touched: Mutex::new(Instant::now()) }
    }

    /// Exclusive access, or `None` while another request holds the session.
    pub fn try_lock(&self) -> Option<MutexGuard<'_, SearchSession>> {
        match self.session.try_lock() {
            Ok(g) => Some(g),
            Err(TryLockError::Poisoned(p)) => Some(p.into_inner()),
            Err(TryLockError::WouldBlock) => None,
        }
    }

    fn lock(&self) -> MutexGuard<'_, SearchSession> {
        self.session.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn touch(&self) {
        *self.touched.lock().unwrap_or_else(|p| p.into_inner()) = Instant::now();
    }

    fn idle(&self) -> Duration {
        self.touched.lock().unwrap_or_else(|p| p.into_inner()).elapsed()
    }
}

#[derive(Serialize, Deserialize)]
struct StoredSession {
    session_id: String,
    transcript: SessionTranscript,
}

#[derive(Default)]
struct Registry {
    live: HashMap<String, Arc<Slot>>,
    expired: HashSet<String>,
}

pub struct AppState {
    config: ServerConfig,
    store: CorpusStore,
    corpus: Arc<SearchCorpus>,
    images: HashSet<String>,
    registry: Mutex<Registry>,
    rng: Mutex<ChaCha8Rng>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CreatedSession {
    pub session_id: String,
    pub target_id: String,
    pub reference_ids: Vec<String>,
    pub iteration: u32,
    pub attribute_labels: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeedbackOutcome {
    pub reference_ids: Vec<String>,
    pub iteration: u32,
    pub found: bool,
    pub percentile_rank: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub target_id: String,
    pub reference_ids: Vec<String>,
    pub iteration: u32,
    pub max_iterations: u32,
    pub found: bool,
    pub exhausted: bool,
    pub target_rank: usize,
    pub percentile_rank: f64,
    pub transcript: SessionTranscript,
}

fn view(id: &str, s: &SearchSession) -> SessionView {
    SessionView {
        session_id: id.to_string(),
        target_id: s.target_id().to_string(),
        reference_ids: s.reference_ids(),
        iteration: s.iteration(),
        max_iterations: s.config().max_iterations,
        found: s.is_found(),
        exhausted: s.is_exhausted(),
        target_rank: s.target_rank(),
        percentile_rank: s.percentile_rank(),
        transcript: s.transcript(),
    }
}

impl AppState {
    /// Loads the described corpus and replays stored sessions.
    pub fn load(config: ServerConfig) -> Result<Self, texelatt_core::Error> {
        let store = CorpusStore::new(&config.corpus);
        let images = store.manifest()?.ids().map(String::from).collect();
        let corpus = Arc::new(store.search_corpus(config.source, config.pipeline.epsilon_fraction())?);
        let rng = Mutex::new(ChaCha8Rng::seed_from_u64(config.seed));
        let state = Self { config, store, corpus, images, registry: Mutex::default(), rng };
        if let Some(dir) = &state.config.sessions_dir {
            fs::create_dir_all(dir).map_err(|e| texelatt_core::Error::Io { path: dir.clone(), source: e })?;
            state.recover(dir);
        }
        Ok(state)
    }

    fn recover(&self, dir: &Path) {
        let Ok(entries) = fs::read_dir(dir) else { return };
        let mut registry = self.registry();
        for path in entries.flatten().map(|e| e.path()).filter(|p| p.extension().is_some_and(|x| x == "json")) {
            let stored = fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str::<StoredSession>(&t).map_err(|e| e.to_string()));
            match stored.map(|s| (SearchSession::replay(self.corpus.clone(), &s.transcript), s.session_id)) {
                Ok((Ok(session), id)) => {
                    registry.live.insert(id, Arc::new(Slot::new(session)));
                }
                Ok((Err(e), id)) => tracing::warn!("session {id} does not replay: {e}"),
                Err(e) => tracing::warn!("skipping {}: {e}", path.display()),
            }
        }
        tracing::info!("recovered {} sessions", registry.live.len());
    }

    fn registry(&self) -> MutexGuard<'_, Registry> {
        self.registry.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn config(&self) -> &ServerConfig {
        &self.config
    }

    pub fn corpus(&self) -> &Arc<SearchCorpus> {
        &self.corpus
    }

    pub fn session_count(&self) -> usize {
        self.registry().live.len()
    }

    fn persist(&self, id: &str, session: &SearchSession) -> Result<(), ApiError> {
        let Some(dir) = &self.config.sessions_dir else { return Ok(()) };
        let stored = StoredSession { session_id: id.to_string(), transcript: session.transcript() };
        let path = dir.join(format!("{id}.json"));
        let tmp = path.with_extension("json.tmp");
        let io = |e| texelatt_core::Error::Io { path: path.clone(), source: e };
        fs::write(&tmp, serde_json::to_vec(&stored).map_err(texelatt_core::Error::from)?).map_err(io)?;
        fs::rename(&tmp, &path).map_err(io)?;
        Ok(())
    }

    fn sweep(&self, registry: &mut Registry) {
        let timeout = self.config.idle_timeout;
        let stale: Vec<String> =
            registry.live.iter().filter(|(_, s)| s.idle() > timeout).map(|(k, _)| k.clone()).collect();
        for id in stale {
            registry.live.remove(&id);
            registry.expired.insert(id);
        }
    }

    /// Live session by id, expiring it when idle for too long.
    pub fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        let mut registry = self.registry();
        self.sweep(&mut registry);
        if registry.expired.contains(id) {
            return Err(ApiError::Expired(id.to_string()));
        }
        registry.live.get(id).cloned().ok_or_else(|| ApiError::UnknownSession(id.to_string()))
    }

    /// `target` is an image id or `"random"`.
    pub fn create_session(&self, target: &str) -> Result<CreatedSession, ApiError> {
        let target = if target == "random" {
            let mut rng = self.rng.lock().unwrap_or_else(|p| p.into_inner());
            self.corpus.ids().choose(&mut *rng).cloned().ok_or_else(|| ApiError::UnknownImage(target.into()))?
        } else if self.corpus.position(target).is_some() {
            target.to_string()
        } else {
            return Err(ApiError::UnknownImage(target.to_string()));
        };
        let session = SearchSession::new(self.corpus.clone(), &target, self.config.pipeline.session)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        self.persist(&id, &session)?;
        let created = CreatedSession {
            session_id: id.clone(),
            target_id: target,
            reference_ids: session.reference_ids(),
            iteration: session.iteration(),
            attribute_labels: texelatt_core::descriptor::COMPONENT_LABELS.iter().map(|s| s.to_string()).collect(),
        };
        let mut registry = self.registry();
        self.sweep(&mut registry);
        registry.live.insert(id, Arc::new(Slot::new(session)));
        Ok(created)
    }

    pub fn feedback(&self, id: &str, constraints: Vec<FeedbackConstraint>) -> Result<FeedbackOutcome, ApiError> {
        let slot = self.slot(id)?;
        let mut session = slot.try_lock().ok_or_else(|| ApiError::Busy(id.to_string()))?;
        slot.touch();
        if session.is_exhausted() {
            return Err(ApiError::Exhausted(id.to_string(), session.config().max_iterations));
        }
        session.apply_feedback(constraints).map_err(|e| match e {
            texelatt_core::Error::UnknownAttribute(a) => ApiError::UnknownAttribute(a),
            texelatt_core::Error::IterationsExhausted(t) => ApiError::Exhausted(id.to_string(), t),
            e @ (texelatt_core::Error::UnknownImage(_) | texelatt_core::Error::NotAReference(_)) => {
                ApiError::Invalid(e.to_string())
            }
            e => ApiError::Internal(e),
        })?;
        self.persist(id, &session)?;
        Ok(FeedbackOutcome {
            reference_ids: session.reference_ids(),
            iteration: session.iteration(),
            found: session.is_found(),
            percentile_rank: session.percentile_rank(),
        })
    }

    pub fn session_view(&self, id: &str) -> Result<SessionView, ApiError> {
        let slot = self.slot(id)?;
        slot.touch();
        let session = slot.lock();
        Ok(view(id, &session))
    }

    /// PNG bytes of a manifest image.
    pub fn image(&self, id: &str) -> Result<Vec<u8>, ApiError> {
        if !self.images.contains(id) {
            return Err(ApiError::UnknownImage(id.to_string()));
        }
        let path = self.store.image_path(id);
        fs::read(&path).map_err(|e| ApiError::Internal(texelatt_core::Error::Io { path, source: e }))
    }
}
