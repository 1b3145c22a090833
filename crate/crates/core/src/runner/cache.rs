//! Compute-once, reference-counted memo tables shared by sweep workers.

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::Result;
use crate::linalg::{eigh, SpectralDecomposition};
use crate::runner::config::ModelConfig;

type Cell<V> = Arc<OnceLock<Result<Arc<V>>>>;

struct Slot<V> {
    cell: Cell<V>,
    /// Outstanding planned uses; `None` keeps the value for the whole run.
    remaining: Option<usize>,
}

/// Values computed at most once per key. Planned keys are dropped after
/// their last [`Memo::release`], which bounds memory on long sweeps.
pub(crate) struct Memo<K, V> {
    slots: Mutex<HashMap<K, Slot<V>>>,
    computed: AtomicUsize,
}

impl<K: Eq + Hash + Copy, V> Memo<K, V> {
    pub(crate) fn new() -> Self {
        Self {
            slots: Mutex::new(HashMap::new()),
            computed: AtomicUsize::new(0),
        }
    }

    /// Registers one future use of `key`.
    pub(crate) fn plan(&self, key: K) {
        let mut slots = self.slots.lock().expect("memo lock");
        let slot = slots.entry(key).or_insert_with(|| Slot {
            cell: Arc::default(),
            remaining: Some(0),
        });
        if let Some(r) = slot.remaining.as_mut() {
            *r += 1;
        }
    }

    pub(crate) fn get_or_compute(&self, key: K, f: impl FnOnce() -> Result<V>) -> Result<Arc<V>> {
        let cell = {
            let mut slots = self.slots.lock().expect("memo lock");
            slots
                .entry(key)
                .or_insert_with(|| Slot {
                    cell: Arc::default(),
                    remaining: None,
                })
                .cell
                .clone()
        };
        // Computed outside the table lock; concurrent callers for the same
        // key wait on the cell instead of recomputing.
        let value = cell.get_or_init(|| {
            self.computed.fetch_add(1, Ordering::Relaxed);
            f().map(Arc::new)
        });
        match value {
            Ok(v) => Ok(Arc::clone(v)),
            Err(e) => Err(e.duplicate()),
        }
    }

    /// Marks one planned use of `key` as done.
    pub(crate) fn release(&self, key: K) {
        let mut slots = self.slots.lock().expect("memo lock");
        let drop_it = match slots.get_mut(&key).and_then(|s| s.remaining.as_mut()) {
            Some(r) => {
                *r = r.saturating_sub(1);
                *r == 0
            }
            None => false,
        };
        if drop_it {
            slots.remove(&key);
        }
    }

    pub(crate) fn computed(&self) -> usize {
        self.computed.load(Ordering::Relaxed)
    }

    pub(crate) fn resident(&self) -> usize {
        self.slots.lock().expect("memo lock").len()
    }
}

/// Spectral decompositions of one model, keyed by the exact bits of λ.
pub struct DecompositionCache {
    model: ModelConfig,
    memo: Memo<u64, SpectralDecomposition>,
}

impl DecompositionCache {
    pub fn new(model: ModelConfig) -> Self {
        Self {
            model,
            memo: Memo::new(),
        }
    }

    pub fn plan(&self, lambda: f64) {
        self.memo.plan(lambda.to_bits());
    }

    pub fn get(&self, lambda: f64) -> Result<Arc<SpectralDecomposition>> {
        let spec = self.model.at(lambda);
        self.memo
            .get_or_compute(lambda.to_bits(), || eigh(&spec.build()?.matrix))
    }

    pub fn release(&self, lambda: f64) {
        self.memo.release(lambda.to_bits());
    }

    /// Number of diagonalizations performed so far.
    pub fn diagonalizations(&self) -> usize {
        self.memo.computed()
    }

    /// Decompositions currently held.
    pub fn resident(&self) -> usize {
        self.memo.resident()
    }
}
