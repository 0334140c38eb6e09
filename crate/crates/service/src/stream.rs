use std::collections::VecDeque;
use std::convert::Infallible;
use std::time::Duration;

use axum::extract::{Path, RawQuery, State};
use axum::response::sse::{Event, KeepAlive, Sse};
use futures::stream::{self, Stream};
use serde::{Deserialize, Serialize};
use tokio_stream::wrappers::errors::BroadcastStreamRecvError;
use tokio_stream::wrappers::BroadcastStream;
use tokio_stream::StreamExt;

use hv_core::engine::DiagnosticDelta;
use hv_core::store::DeltasSince;

use crate::{query, ApiError, AppState, Feed};

pub const HEARTBEAT: Duration = Duration::from_secs(15);
/// SSE event name of delta records.
pub const DELTA_EVENT: &str = "delta";
/// SSE event name of the record that ends a stream.
pub const RESYNC_EVENT: &str = "resyncRequired";

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct StreamQuery {
    from: Option<u64>,
}

/// Data of a `resyncRequired` record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResyncRecord {
    pub resync_required: bool,
    /// Stored revision when the record was produced.
    pub revision: u64,
}

enum Phase {
    CatchUp(VecDeque<DiagnosticDelta>),
    Live,
    /// Emit one resync record carrying this revision, then end.
    Resync(u64),
    Done,
}

struct Cursor {
    phase: Phase,
    feed: BroadcastStream<Feed>,
    last: u64,
    state: AppState,
    model_id: String,
}

fn delta_event(delta: &DiagnosticDelta) -> Event {
    Event::default()
        .event(DELTA_EVENT)
        .id(delta.revision.to_string())
        .data(serde_json::to_string(delta).expect("serializable delta"))
}

fn resync_event(revision: u64) -> Event {
    let record = ResyncRecord { resync_required: true, revision };
    Event::default().event(RESYNC_EVENT).data(serde_json::to_string(&record).expect("serializable record"))
}

impl Cursor {
    fn stored_revision(&self) -> u64 {
        self.state.store().entry(&self.model_id).map_or(0, |e| e.revision)
    }

    async fn next(&mut self) -> Option<Event> {
        loop {
            match &mut self.phase {
                Phase::Done => return None,
                Phase::Resync(revision) => {
                    let revision = *revision;
                    self.phase = Phase::Done;
                    return Some(resync_event(revision));
                }
                Phase::CatchUp(queue) => match queue.pop_front() {
                    Some(delta) => {
                        self.last = delta.revision;
                        return Some(delta_event(&delta));
                    }
                    None => self.phase = Phase::Live,
                },
                Phase::Live => match self.feed.next().await {
                    Some(Ok(Feed::Delta(delta))) if delta.revision > self.last => {
                        self.last = delta.revision;
                        return Some(delta_event(&delta));
                    }
                    Some(Ok(Feed::Delta(_))) => {}
                    Some(Ok(Feed::Reset)) | Some(Err(BroadcastStreamRecvError::Lagged(_))) => {
                        self.phase = Phase::Done;
                        return Some(resync_event(self.stored_revision()));
                    }
                    None => return None,
                },
            }
        }
    }
}

pub(crate) async fn get_stream(
    State(state): State<AppState>,
    Path(id): Path<String>,
    raw: RawQuery,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let q: StreamQuery = query(raw.0.as_deref())?;
    let session = state.session(&id)?;
    // Subscribing and reading the history under the session lock means no
    // delta falls between the two.
    let (feed, catch_up, stored) = {
        let session = session.lock().await;
        if session.engine.is_none() {
            return Err(ApiError::NotFound(id));
        }
        let feed = session.feed.subscribe();
        let stored = state.store().entry(&id).map_or(0, |e| e.revision);
        let from = q.from.unwrap_or(stored);
        (feed, state.store().get_deltas_since(&id, from), stored)
    };
    let phase = match catch_up {
        DeltasSince::Deltas(list) => Phase::CatchUp(list.into()),
        DeltasSince::ResyncRequired => Phase::Resync(stored),
    };
    let last = q.from.unwrap_or(stored);
    let cursor = Cursor { phase, feed: BroadcastStream::new(feed), last, state, model_id: id };
    let events = stream::unfold(cursor, |mut cursor| async move {
        let event = cursor.next().await?;
        Some((Ok(event), cursor))
    });
    Ok(Sse::new(events).keep_alive(KeepAlive::new().interval(HEARTBEAT).text("heartbeat")))
}
