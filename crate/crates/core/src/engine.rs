//! Model engine contract shared by the orchestrator and the simulator.
//!
//! The contract deliberately mirrors the constraints of on-device inference
//! runtimes: one active session at a time, one in-flight generate call, and
//! an explicit close before the next session may open.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::validator::FailureKind;
use crate::validator::SchemaVariant;

/// Token identifying an open session. Engines track the session state
/// internally; a handle outliving its session is rejected on use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SessionHandle {
    pub id: u64,
}

/// The unparsed text a model (or simulator) emitted, plus call metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawModelOutput {
    pub text: String,
    pub session_id: u64,
    /// Zero-based index of this generation within its session.
    pub turn_index: u32,
}

/// What the caller is asking the model to produce.
///
/// A real engine would infer all of this from the prompt text; the simulator
/// cannot read prompts, so the ground-truth constraints travel alongside them.
#[derive(Debug, Clone, PartialEq)]
pub enum GenerationIntent {
    /// The model invents the word (and any other schema fields) itself.
    Puzzle {
        language: String,
        min_len: usize,
        max_len: usize,
        schema: SchemaVariant,
        /// Words the prompt told the model to avoid. Empty when the prompt
        /// carried no exclusion clause.
        exclusions: Vec<String>,
    },
    /// The word is supplied; the model only writes hints for it.
    Hints { word: String, language: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("engine busy: a session is already open")]
    Busy,
    #[error("session is closed or unknown")]
    ClosedSession,
    #[error("engine not initialized")]
    NotReady,
}

/// Generation engine with single-session semantics.
///
/// A second `create_session` without an intervening close is an immediate
/// error, not a queue. Callers own serialization across threads.
pub trait ModelEngine {
    fn is_ready(&self) -> bool {
        true
    }

    /// Opens a session with a fresh context. Fails with [`EngineError::Busy`]
    /// if another session is open.
    fn create_session(&mut self, system_prompt: &str) -> Result<SessionHandle, EngineError>;

    /// Runs one generation turn in the open session.
    fn generate(
        &mut self,
        session: SessionHandle,
        user_prompt: &str,
        intent: &GenerationIntent,
    ) -> Result<RawModelOutput, EngineError>;

    /// Tells the engine the previous output was rejected for `kind`, and
    /// whether the retry prompt carries an exclusion clause naming the
    /// rejected word. Affects the next generate call only.
    fn apply_retry_feedback(
        &mut self,
        session: SessionHandle,
        kind: FailureKind,
        exclusion_clause_present: bool,
    ) -> Result<(), EngineError>;

    fn close_session(&mut self, session: SessionHandle) -> Result<(), EngineError>;

    /// Cumulative simulated inference cost in milliseconds. Bookkeeping for
    /// latency experiments; real engines may return 0.
    fn simulated_latency_ms(&self) -> u64 {
        0
    }
}
