use std::collections::BTreeMap;

/// Simulated time in integer ticks.
pub type Tick = u64;

/// Time-ordered queue; ties break by insertion order.
#[derive(Debug, Clone)]
pub struct EventQueue<T> {
    events: BTreeMap<(Tick, u64), T>,
    next_seq: u64,
}

impl<T> Default for EventQueue<T> {
    fn default() -> Self {
        EventQueue {
            events: BTreeMap::new(),
            next_seq: 0,
        }
    }
}

impl<T> EventQueue<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, at: Tick, item: T) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.events.insert((at, seq), item);
        seq
    }

    pub fn pop(&mut self) -> Option<(Tick, T)> {
        self.events.pop_first().map(|((t, _), item)| (t, item))
    }

    pub fn peek_time(&self) -> Option<Tick> {
        self.events.keys().next().map(|&(t, _)| t)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}
