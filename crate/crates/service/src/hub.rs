//! Fan-out of wire messages to connected clients.
//!
//! Each message is numbered and serialized once, then queued per client.
//! A full queue first sheds its oldest snapshot; a client whose queue still
//! reaches the hard limit is disconnected rather than silently losing
//! samples or events. Publishing never blocks on a client.

use std::collections::VecDeque;
use std::sync::{Arc, Mutex, MutexGuard};

use tokio::sync::Notify;

use crate::wire::{Family, Payload, WireMessage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HubLimits {
    /// Queue length at which snapshots start being dropped.
    pub soft: usize,
    /// Queue length at which the client is disconnected.
    pub hard: usize,
}

impl Default for HubLimits {
    fn default() -> Self {
        Self { soft: 256, hard: 1024 }
    }
}

#[derive(Debug, Clone)]
struct Outgoing {
    family: Family,
    text: Arc<str>,
}

#[derive(Debug, Default)]
struct ClientState {
    queue: VecDeque<Outgoing>,
    dropped_snapshots: u64,
    ended: Option<String>,
}

#[derive(Debug)]
struct Client {
    id: u64,
    state: Mutex<ClientState>,
    notify: Notify,
}

impl Client {
    fn lock(&self) -> MutexGuard<'_, ClientState> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn end(&self, reason: &str) {
        let mut st = self.lock();
        if st.ended.is_none() {
            st.ended = Some(reason.to_string());
        }
        drop(st);
        self.notify.notify_one();
    }
}

#[derive(Debug, Default)]
struct HubState {
    seq: u64,
    family_seq: [u64; Family::ALL.len()],
    clients: Vec<Arc<Client>>,
    next_client: u64,
    last_config: Option<Arc<str>>,
    closed: bool,
}

#[derive(Debug, Default)]
pub struct Hub {
    limits: HubLimits,
    state: Mutex<HubState>,
}

impl Hub {
    pub fn new(limits: HubLimits) -> Arc<Self> {
        Arc::new(Self {
            limits,
            state: Mutex::default(),
        })
    }

    fn lock(&self) -> MutexGuard<'_, HubState> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Numbers, serializes and queues `payload` for every client.
    pub fn publish(&self, session_id: Option<&str>, payload: Payload) -> WireMessage {
        let mut hub = self.lock();
        let family = payload.family();
        hub.seq += 1;
        hub.family_seq[family.index()] += 1;
        let msg = WireMessage {
            seq: hub.seq,
            family_seq: hub.family_seq[family.index()],
            session_id: session_id.map(str::to_string),
            payload,
        };
        if hub.closed {
            return msg;
        }
        let text: Arc<str> = serde_json::to_string(&msg).expect("wire messages serialize").into();
        if family == Family::Config {
            hub.last_config = Some(text.clone());
        }
        let out = Outgoing { family, text };
        let limits = self.limits;
        hub.clients.retain(|client| {
            let mut st = client.lock();
            if st.ended.is_some() {
                return false;
            }
            if st.queue.len() >= limits.soft {
                if let Some(i) = st.queue.iter().position(|m| m.family == Family::Snapshot) {
                    st.queue.remove(i);
                    st.dropped_snapshots += 1;
                } else if family == Family::Snapshot {
                    st.dropped_snapshots += 1;
                    return true;
                }
            }
            if st.queue.len() >= limits.hard {
                st.queue.clear();
                st.ended = Some("client fell too far behind".into());
                drop(st);
                client.notify.notify_one();
                return false;
            }
            st.queue.push_back(out.clone());
            drop(st);
            client.notify.notify_one();
            true
        });
        msg
    }

    /// A new client. It first receives the latest config message, if any.
    pub fn subscribe(self: &Arc<Self>) -> Subscription {
        let mut hub = self.lock();
        hub.next_client += 1;
        let client = Arc::new(Client {
            id: hub.next_client,
            state: Mutex::default(),
            notify: Notify::new(),
        });
        if hub.closed {
            client.lock().ended = Some("stream closed".into());
        } else {
            if let Some(cfg) = &hub.last_config {
                client.lock().queue.push_back(Outgoing {
                    family: Family::Config,
                    text: cfg.clone(),
                });
            }
            hub.clients.push(client.clone());
        }
        Subscription {
            hub: self.clone(),
            client,
        }
    }

    /// Ends every subscription once its queue drains.
    pub fn close(&self) {
        let mut hub = self.lock();
        hub.closed = true;
        for c in hub.clients.drain(..) {
            c.end("stream closed");
        }
    }

    pub fn client_count(&self) -> usize {
        self.lock().clients.len()
    }
}

/// One client's view of the stream.
#[derive(Debug)]
pub struct Subscription {
    hub: Arc<Hub>,
    client: Arc<Client>,
}

impl Subscription {
    /// The next message, or `None` once the stream has ended and drained.
    pub async fn recv(&self) -> Option<Arc<str>> {
        loop {
            if let Some(m) = self.try_recv_inner() {
                return m;
            }
            self.client.notify.notified().await;
        }
    }

    /// `Some(Some(msg))` if one is queued, `Some(None)` if the stream has
    /// ended, `None` if nothing is ready yet.
    pub fn try_recv(&self) -> Option<Option<Arc<str>>> {
        self.try_recv_inner()
    }

    fn try_recv_inner(&self) -> Option<Option<Arc<str>>> {
        let mut st = self.client.lock();
        if let Some(m) = st.queue.pop_front() {
            return Some(Some(m.text));
        }
        st.ended.as_ref().map(|_| None)
    }

    /// Why the stream ended, once it has.
    pub fn end_reason(&self) -> Option<String> {
        self.client.lock().ended.clone()
    }

    pub fn dropped_snapshots(&self) -> u64 {
        self.client.lock().dropped_snapshots
    }
}

impl Drop for Subscription {
    fn drop(&mut self) {
        let id = self.client.id;
        self.hub.lock().clients.retain(|c| c.id != id);
    }
}
