//! HTTP service for interactive editing: sessions hold a scene and its edit
//! history, instructions are routed to templates or a language model, and
//! every accepted edit can be undone.

pub mod api;
pub mod session;

pub use api::{router, AppState};
pub use session::{scene_fixture, Engine, JournalEvent, Session, SessionError, Step};
