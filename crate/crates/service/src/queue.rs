//! Bounded hand-off between the capture producer and the engine consumer.

use std::collections::VecDeque;
use std::sync::{Condvar, Mutex, MutexGuard};
use std::time::Duration;

#[derive(Debug, PartialEq)]
pub enum Pop<T> {
    Item(T),
    /// Nothing arrived within the timeout.
    Empty,
    /// Closed and drained.
    Closed,
}

#[derive(Debug)]
struct State<T> {
    items: VecDeque<T>,
    dropped: u64,
    closed: bool,
}

#[derive(Debug)]
pub struct FrameQueue<T> {
    capacity: usize,
    state: Mutex<State<T>>,
    not_empty: Condvar,
    not_full: Condvar,
}

impl<T> FrameQueue<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "queue capacity must be positive");
        Self {
            capacity,
            state: Mutex::new(State {
                items: VecDeque::with_capacity(capacity),
                dropped: 0,
                closed: false,
            }),
            not_empty: Condvar::new(),
            not_full: Condvar::new(),
        }
    }

    fn lock(&self) -> MutexGuard<'_, State<T>> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Never waits: a full queue loses its oldest item. Returns false once closed.
    pub fn push_drop_oldest(&self, item: T) -> bool {
        let mut st = self.lock();
        if st.closed {
            return false;
        }
        if st.items.len() == self.capacity {
            st.items.pop_front();
            st.dropped += 1;
        }
        st.items.push_back(item);
        drop(st);
        self.not_empty.notify_one();
        true
    }

    /// Waits for room. Returns false once closed.
    pub fn push_blocking(&self, item: T) -> bool {
        let mut st = self.lock();
        while st.items.len() == self.capacity && !st.closed {
            st = self.not_full.wait(st).unwrap_or_else(|e| e.into_inner());
        }
        if st.closed {
            return false;
        }
        st.items.push_back(item);
        drop(st);
        self.not_empty.notify_one();
        true
    }

    pub fn pop_timeout(&self, timeout: Duration) -> Pop<T> {
        let st = self.lock();
        let (mut st, _) = self
            .not_empty
            .wait_timeout_while(st, timeout, |s| s.items.is_empty() && !s.closed)
            .unwrap_or_else(|e| e.into_inner());
        match st.items.pop_front() {
            Some(item) => {
                drop(st);
                self.not_full.notify_one();
                Pop::Item(item)
            }
            None if st.closed => Pop::Closed,
            None => Pop::Empty,
        }
    }

    /// Items already queued can still be popped.
    pub fn close(&self) {
        self.lock().closed = true;
        self.not_empty.notify_all();
        self.not_full.notify_all();
    }

    pub fn is_closed(&self) -> bool {
        self.lock().closed
    }

    /// Items lost to [`FrameQueue::push_drop_oldest`].
    pub fn dropped(&self) -> u64 {
        self.lock().dropped
    }

    pub fn len(&self) -> usize {
        self.lock().items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use std::thread;

    const T: Duration = Duration::from_millis(10);

    #[test]
    fn test_drop_oldest_counts() {
        let q = FrameQueue::new(2);
        for i in 0..5 {
            assert!(q.push_drop_oldest(i));
        }
        assert_eq!(q.dropped(), 3);
        assert_eq!(q.pop_timeout(T), Pop::Item(3));
        assert_eq!(q.pop_timeout(T), Pop::Item(4));
        assert_eq!(q.pop_timeout(T), Pop::Empty);
    }

    #[test]
    fn test_close_drains_then_reports_closed() {
        let q = FrameQueue::new(4);
        q.push_blocking(1);
        q.close();
        assert!(!q.push_blocking(2));
        assert!(!q.push_drop_oldest(3));
        assert_eq!(q.pop_timeout(T), Pop::Item(1));
        assert_eq!(q.pop_timeout(T), Pop::Closed);
    }

    #[test]
    fn test_blocking_push_preserves_everything() {
        let q = Arc::new(FrameQueue::new(1));
        let producer = {
            let q = q.clone();
            thread::spawn(move || {
                for i in 0..100 {
                    q.push_blocking(i);
                }
                q.close();
            })
        };
        let mut got = Vec::new();
        loop {
            match q.pop_timeout(Duration::from_secs(5)) {
                Pop::Item(i) => got.push(i),
                Pop::Closed => break,
                Pop::Empty => panic!("producer stalled"),
            }
        }
        producer.join().unwrap();
        assert_eq!(got, (0..100).collect::<Vec<_>>());
        assert_eq!(q.dropped(), 0);
    }

    #[test]
    fn test_close_wakes_blocked_producer() {
        let q = Arc::new(FrameQueue::new(1));
        q.push_blocking(0);
        let waiter = {
            let q = q.clone();
            thread::spawn(move || q.push_blocking(1))
        };
        thread::sleep(T);
        q.close();
        assert!(!waiter.join().unwrap());
    }
}
