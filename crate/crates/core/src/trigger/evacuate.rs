use super::descriptor::{EvacuationPort, EventDescriptor, SlotState};

/// A captured event as it leaves the detector: metadata header followed by
/// the phase samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EventPacket {
    pub channel: usize,
    /// Ramp index of the trigger sample.
    pub timestamp: u64,
    pub trigger_value: f64,
    pub pileup: bool,
    pub samples: Vec<f64>,
}

impl EventPacket {
    pub fn length(&self) -> usize {
        self.samples.len()
    }
}

/// Consumer-domain half of the event detector: drains filled descriptors
/// and recycles them into the free queue.
#[derive(Debug)]
pub struct Evacuator {
    port: EvacuationPort,
    evacuating: usize,
    emitted: u64,
}

impl Evacuator {
    pub fn new(port: EvacuationPort) -> Self {
        Self {
            port,
            evacuating: 0,
            emitted: 0,
        }
    }

    /// Descriptors currently being drained (0 outside `evacuate` calls).
    pub fn evacuating(&self) -> usize {
        self.evacuating
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    fn drain<F: FnMut(EventPacket)>(&mut self, mut d: EventDescriptor, emit: &mut F) {
        d.transition(SlotState::Filled, SlotState::Evacuating);
        self.evacuating += 1;
        emit(EventPacket {
            channel: d.channel,
            timestamp: d.timestamp,
            trigger_value: d.trigger_value,
            pileup: d.pileup,
            samples: d.samples().to_vec(),
        });
        self.emitted += 1;
        d.transition(SlotState::Evacuating, SlotState::Free);
        self.evacuating -= 1;
        // The signal domain may have shut down; the descriptor dies with the pool.
        let _ = self.port.free.send(d);
    }

    /// Drains at most one descriptor. Returns whether one was present.
    pub fn evacuate_one<F: FnMut(EventPacket)>(&mut self, mut emit: F) -> bool {
        match self.port.filled.try_recv() {
            Ok(d) => {
                self.drain(d, &mut emit);
                true
            }
            Err(_) => false,
        }
    }

    /// Drains every descriptor currently in the filled queue, in queue order.
    pub fn evacuate<F: FnMut(EventPacket)>(&mut self, mut emit: F) -> usize {
        let mut n = 0;
        while let Ok(d) = self.port.filled.try_recv() {
            self.drain(d, &mut emit);
            n += 1;
        }
        n
    }

    /// Blocking loop for a dedicated thread; returns once the signal domain
    /// has dropped its end of the filled queue.
    pub fn run<F: FnMut(EventPacket)>(mut self, mut emit: F) -> u64 {
        while let Ok(d) = self.port.filled.recv() {
            self.drain(d, &mut emit);
        }
        self.emitted
    }
}
