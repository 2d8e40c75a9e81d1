//! Thread-local operation counters.
//!
//! Each kernel bumps a counter once per body visited by a recursive pass (or
//! per body pair for the Jacobian, per inner-loop step for dense algebra).
//! Tests use the counts to check asymptotic cost without timing anything.

use std::cell::Cell;

thread_local! {
    static BODY_VISITS: Cell<u64> = const { Cell::new(0) };
    static DENSE_FLOPS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub(crate) fn count_body_visit() {
    BODY_VISITS.with(|c| c.set(c.get() + 1));
}

#[inline]
pub(crate) fn count_dense(n: u64) {
    DENSE_FLOPS.with(|c| c.set(c.get() + n));
}

/// Snapshot of the counters on the current thread.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub body_visits: u64,
    pub dense_flops: u64,
}

impl OpCounts {
    pub fn total(&self) -> u64 {
        self.body_visits + self.dense_flops
    }
}

pub fn reset() {
    BODY_VISITS.with(|c| c.set(0));
    DENSE_FLOPS.with(|c| c.set(0));
}

pub fn snapshot() -> OpCounts {
    OpCounts {
        body_visits: BODY_VISITS.with(Cell::get),
        dense_flops: DENSE_FLOPS.with(Cell::get),
    }
}

/// Runs `f` and returns its result together with the operations it performed.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, OpCounts) {
    let before = snapshot();
    let out = f();
    let after = snapshot();
    (
        out,
        OpCounts {
            body_visits: after.body_visits - before.body_visits,
            dense_flops: after.dense_flops - before.dense_flops,
        },
    )
}
