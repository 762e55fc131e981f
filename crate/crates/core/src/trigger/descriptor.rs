use crossbeam_channel::{bounded, Receiver, Sender};

/// Where a descriptor currently lives. Transitions are
/// `Free → Active → Filled → Evacuating → Free`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotState {
    Free,
    Active,
    Filled,
    Evacuating,
}

/// Handle to one preallocated event buffer plus the event's metadata.
#[derive(Debug)]
pub struct EventDescriptor {
    slot_id: usize,
    state: SlotState,
    pub channel: usize,
    pub timestamp: u64,
    pub trigger_value: f64,
    pub pileup: bool,
    buffer: Box<[f64]>,
    filled: usize,
}

impl EventDescriptor {
    fn new(slot_id: usize, event_length: usize) -> Self {
        Self {
            slot_id,
            state: SlotState::Free,
            channel: 0,
            timestamp: 0,
            trigger_value: 0.0,
            pileup: false,
            buffer: vec![0.0; event_length].into_boxed_slice(),
            filled: 0,
        }
    }

    pub fn slot_id(&self) -> usize {
        self.slot_id
    }

    pub fn state(&self) -> SlotState {
        self.state
    }

    /// Slot capacity, which is also the event length.
    pub fn length(&self) -> usize {
        self.buffer.len()
    }

    pub fn filled(&self) -> usize {
        self.filled
    }

    pub fn is_complete(&self) -> bool {
        self.filled == self.buffer.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.buffer[..self.filled]
    }

    pub(crate) fn push(&mut self, x: f64) {
        self.buffer[self.filled] = x;
        self.filled += 1;
    }

    /// Panics on an illegal transition: a descriptor seen in two places at once.
    pub(crate) fn transition(&mut self, from: SlotState, to: SlotState) {
        assert_eq!(
            self.state, from,
            "descriptor {} state violation: expected {from:?}, found {:?}",
            self.slot_id, self.state
        );
        self.state = to;
        if to == SlotState::Free {
            self.filled = 0;
            self.pileup = false;
        }
    }
}

/// Signal-domain end of the pool: takes free descriptors, returns filled ones.
#[derive(Debug)]
pub struct SignalPort {
    pub(crate) free: Receiver<EventDescriptor>,
    pub(crate) filled: Sender<EventDescriptor>,
}

/// Evacuation-domain end of the pool: takes filled descriptors, returns free ones.
#[derive(Debug)]
pub struct EvacuationPort {
    pub(crate) filled: Receiver<EventDescriptor>,
    pub(crate) free: Sender<EventDescriptor>,
}

impl SignalPort {
    pub fn free_len(&self) -> usize {
        self.free.len()
    }

    pub fn filled_len(&self) -> usize {
        self.filled.len()
    }
}

/// Builds `slot_count` descriptors of `event_length` samples, all free, and
/// the two bounded single-producer/single-consumer queues linking the domains.
pub fn descriptor_pool(slot_count: usize, event_length: usize) -> (SignalPort, EvacuationPort) {
    let cap = slot_count.max(1);
    let (free_tx, free_rx) = bounded(cap);
    let (filled_tx, filled_rx) = bounded(cap);
    for id in 0..slot_count {
        free_tx
            .send(EventDescriptor::new(id, event_length))
            .expect("free queue sized for every slot");
    }
    (
        SignalPort {
            free: free_rx,
            filled: filled_tx,
        },
        EvacuationPort {
            filled: filled_rx,
            free: free_tx,
        },
    )
}
