use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One realized point `(tₙ, kₙ)`: the firing time, the sub-process that
/// fired and an optional opaque mark payload written by the affect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub process: usize,
    pub mark: Option<u64>,
}

impl EventRecord {
    pub fn new(time: f64, process: usize) -> Self {
        Self {
            time,
            process,
            mark: None,
        }
    }

    pub fn with_mark(mut self, mark: u64) -> Self {
        self.mark = Some(mark);
        self
    }
}

/// Append-only, time-ordered event history.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    events: Vec<EventRecord>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            events: Vec::with_capacity(n),
        }
    }

    /// Build a history from events that are already in chronological order.
    pub fn from_events(events: Vec<EventRecord>) -> Result<Self> {
        let mut h = Self::with_capacity(events.len());
        for ev in events {
            h.record(ev)?;
        }
        Ok(h)
    }

    /// Append an event. Times must be finite, non-negative and not earlier
    /// than the last recorded event.
    pub fn record(&mut self, ev: EventRecord) -> Result<()> {
        if !ev.time.is_finite() || ev.time < 0.0 {
            return Err(Error::Domain("event time must be finite and non-negative"));
        }
        if let Some(last) = self.events.last() {
            if ev.time < last.time {
                return Err(Error::OutOfOrder {
                    time: ev.time,
                    last: last.time,
                });
            }
        }
        self.events.push(ev);
        Ok(())
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn last_time(&self) -> Option<f64> {
        self.events.last().map(|e| e.time)
    }

    /// Event times of a single sub-process, in order.
    pub fn times_of(&self, process: usize) -> impl Iterator<Item = f64> + '_ {
        self.events
            .iter()
            .filter(move |e| e.process == process)
            .map(|e| e.time)
    }

    /// Number of events per sub-process for a system of `m` processes.
    /// Events with an index `>= m` are ignored.
    pub fn counts(&self, m: usize) -> Vec<usize> {
        let mut c = alloc::vec![0; m];
        for e in &self.events {
            if e.process < m {
                c[e.process] += 1;
            }
        }
        c
    }

    pub fn into_events(self) -> Vec<EventRecord> {
        self.events
    }
}
