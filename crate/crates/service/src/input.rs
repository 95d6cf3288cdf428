//! The capture producer: cuts the input into frames and feeds the queue.
//!
//! This build has no audio backend, so no capture devices are listed and
//! opening one fails with the (empty) device list.

use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use pitchgate::signal::{AudioFrame, AudioStream};

use crate::config::{InputSpec, Pace};
use crate::queue::FrameQueue;
use crate::ServiceError;

/// Names of the capture devices that can be opened.
pub fn list_devices() -> Vec<String> {
    Vec::new()
}

/// A running producer. The queue is closed when the input is exhausted.
#[derive(Debug)]
pub struct Producer {
    pub sample_rate: u32,
    pub queue: Arc<FrameQueue<AudioFrame>>,
    handle: JoinHandle<()>,
}

impl Producer {
    /// Opens the input and starts feeding non-overlapping frames.
    pub fn spawn(input: &InputSpec, buffer_size: usize, pace: Pace, capacity: usize) -> Result<Self, ServiceError> {
        Self::start(open_input(input)?, buffer_size, pace, capacity)
    }

    /// Starts feeding an already opened stream.
    pub fn start(stream: AudioStream, buffer_size: usize, pace: Pace, capacity: usize) -> Result<Self, ServiceError> {
        let sample_rate = stream.sample_rate();
        if buffer_size == 0 || stream.len() < buffer_size {
            return Err(ServiceError::Config(format!(
                "input has {} samples, fewer than one {buffer_size}-sample frame",
                stream.len()
            )));
        }
        let queue = Arc::new(FrameQueue::new(capacity));
        let q = queue.clone();
        let handle = thread::Builder::new()
            .name("capture".into())
            .spawn(move || feed(&stream, buffer_size, pace, &q))
            .map_err(|e| ServiceError::Config(format!("cannot start capture thread: {e}")))?;
        Ok(Self {
            sample_rate,
            queue,
            handle,
        })
    }

    /// Stops feeding and waits for the thread.
    pub fn stop(self) {
        self.queue.close();
        let _ = self.handle.join();
    }
}

pub fn open_input(input: &InputSpec) -> Result<AudioStream, ServiceError> {
    match input {
        InputSpec::Device(name) => Err(ServiceError::Device {
            name: name.clone(),
            available: list_devices(),
        }),
        InputSpec::Source(spec) => Ok(spec.open()?),
    }
}

fn feed(stream: &AudioStream, buffer_size: usize, pace: Pace, queue: &FrameQueue<AudioFrame>) {
    let period = Duration::from_secs_f64(buffer_size as f64 / stream.sample_rate() as f64);
    let start = Instant::now();
    let frames = stream.frames(buffer_size, buffer_size).expect("buffer size checked at spawn");
    for (k, frame) in frames.enumerate() {
        let open = match pace {
            Pace::Flat => queue.push_blocking(frame),
            Pace::Realtime => {
                // the frame is complete once its last sample has been captured
                let due = start + period * (k as u32 + 1);
                if let Some(wait) = due.checked_duration_since(Instant::now()) {
                    thread::sleep(wait);
                }
                queue.push_drop_oldest(frame)
            }
        };
        if !open {
            return;
        }
    }
    queue.close();
}
