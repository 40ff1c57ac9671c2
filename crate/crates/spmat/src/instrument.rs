//! Thread-local counters used by tests to assert allocation discipline and
//! algorithmic operation counts. All counters are per-thread, so parallel
//! test runners do not interfere with each other.

use std::cell::Cell;

thread_local! {
    static MATRIX_ALLOCS: Cell<u64> = const { Cell::new(0) };
    static MUL_WORKSPACE_SLOTS: Cell<usize> = const { Cell::new(0) };
    static CONVERT_WRITES: Cell<u64> = const { Cell::new(0) };
    static FUSED_DISPATCHES: Cell<u64> = const { Cell::new(0) };
    static RBT_TRAVERSAL_STEPS: Cell<u64> = const { Cell::new(0) };
}

/// Number of matrix-sized buffer allocations performed on this thread so far
/// (storage arrays and dense kernel workspaces). Monotonic; take deltas.
pub fn matrix_allocs() -> u64 {
    MATRIX_ALLOCS.with(|c| c.get())
}

pub(crate) fn record_matrix_alloc() {
    MATRIX_ALLOCS.with(|c| c.set(c.get() + 1));
}

/// Size in slots of the dense accumulator allocated by the most recent
/// sparse-sparse multiply on this thread.
pub fn mul_workspace_slots() -> usize {
    MUL_WORKSPACE_SLOTS.with(|c| c.get())
}

pub(crate) fn record_mul_workspace(slots: usize) {
    MUL_WORKSPACE_SLOTS.with(|c| c.set(slots));
}

/// Element writes into the freshly built array during the most recent
/// COO<->CSC conversion on this thread.
pub fn convert_element_writes() -> u64 {
    CONVERT_WRITES.with(|c| c.get())
}

pub(crate) fn record_convert_writes(writes: u64) {
    CONVERT_WRITES.with(|c| c.set(writes));
}

/// Number of fused-kernel dispatches the expression evaluator has made on
/// this thread. Monotonic; take deltas.
pub fn fused_dispatches() -> u64 {
    FUSED_DISPATCHES.with(|c| c.get())
}

pub(crate) fn record_fused_dispatch() {
    FUSED_DISPATCHES.with(|c| c.set(c.get() + 1));
}

/// Node visits performed by the most recent ordered red-black traversal on
/// this thread: N for an arena scan, up to 2N+1 subtree entries for a tree
/// walk. Lets the amortized traversal cost be observed without asserting
/// more than the worst case.
pub fn rbt_traversal_steps() -> u64 {
    RBT_TRAVERSAL_STEPS.with(|c| c.get())
}

pub(crate) fn record_rbt_traversal_steps(steps: u64) {
    RBT_TRAVERSAL_STEPS.with(|c| c.set(steps));
}
