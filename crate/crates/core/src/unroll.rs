//! Windowed sequence unrolling and truncated backpropagation through time.
//!
//! The forward pass always runs the whole sequence, but per-step activation
//! caches are retained only for explicitly requested step ranges, so peak
//! memory is proportional to the backward windows plus the number of state
//! checkpoints, never to the sequence length. A checkpoint at index `c`
//! snapshots the state *entering* step `c` (for `c = 0` that is the initial
//! zero state), which is exactly the anchor-state handoff the auxiliary
//! decoders need.
//!
//! The backward sweep walks a tape from its last step to its first and then
//! returns the gradient w.r.t. the state that entered the window. The caller
//! decides what to do with that boundary gradient: discard it at a
//! truncation boundary (stop-gradient), or chain it into an earlier tape.

use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::lstm::{lstm_step, lstm_step_backward, LstmGrads, LstmParams, LstmState, StepCache};
use crate::scalar::Scalar;
use crate::sequence::{TokenOwned, TokenSeq};
use crate::tensor::TensorBuffer;

/// Half-open range of step indices `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepRange {
    pub start: usize,
    pub end: usize,
}

impl StepRange {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        StepRange { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, t: usize) -> bool {
        t >= self.start && t < self.end
    }

    /// Suffix window of length `min(window, len)` ending at `len`.
    pub fn suffix(len: usize, window: usize) -> Self {
        StepRange {
            start: len - window.min(len),
            end: len,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TapeStep<T> {
    pub cache: StepCache<T>,
    pub token: TokenOwned<T>,
}

/// Per-step activation caches for one contiguous window.
#[derive(Debug, Clone)]
pub struct UnrollTape<T> {
    steps: Vec<TapeStep<T>>,
    start_step: usize,
    capacity: usize,
}

impl<T: Scalar> UnrollTape<T> {
    fn with_range(range: StepRange) -> Self {
        UnrollTape {
            steps: Vec::with_capacity(range.len()),
            start_step: range.start,
            capacity: range.len(),
        }
    }

    pub fn start_step(&self) -> usize {
        self.start_step
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of retained per-step caches.
    pub fn retained(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[TapeStep<T>] {
        &self.steps
    }

    /// Absolute index of the last cached step, if any.
    pub fn last_step(&self) -> Option<usize> {
        if self.steps.is_empty() {
            None
        } else {
            Some(self.start_step + self.steps.len() - 1)
        }
    }

    /// State produced by the last cached step.
    pub fn last_state(&self) -> Option<LstmState<T>> {
        self.steps.last().map(|s| LstmState {
            hidden: s.cache.hidden.clone(),
            cell: s.cache.cell.clone(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct UnrollOutcome<T> {
    pub final_state: LstmState<T>,
    pub tapes: Vec<UnrollTape<T>>,
    pub checkpoint_states: Vec<LstmState<T>>,
    /// Number of forward LSTM steps executed (always the sequence length).
    pub forward_steps: usize,
}

impl<T: Scalar> UnrollOutcome<T> {
    /// Total retained per-step caches plus checkpoints, the quantity the
    /// memory contract bounds.
    pub fn retained_activations(&self) -> usize {
        self.tapes.iter().map(|t| t.retained()).sum::<usize>() + self.checkpoint_states.len()
    }
}

/// Runs the full sequence forward, caching activations only inside `ranges`
/// and snapshotting the state entering each checkpoint index.
pub fn unroll_forward_ranges<T: Scalar>(
    lstm: &LstmParams<T>,
    embedding: &EmbeddingTable<T>,
    sequence: &TokenSeq<T>,
    ranges: &[StepRange],
    checkpoints: &[usize],
) -> Result<UnrollOutcome<T>> {
    let len = sequence.len();
    for &c in checkpoints {
        if c >= len {
            return Err(Error::Index {
                what: "checkpoint index",
                index: c,
                len,
            });
        }
    }
    for r in ranges {
        if r.end > len {
            return Err(Error::Index {
                what: "tape range end",
                index: r.end,
                len,
            });
        }
    }

    let mut tapes: Vec<UnrollTape<T>> = ranges.iter().map(|&r| UnrollTape::with_range(r)).collect();
    let mut checkpoint_states: Vec<Option<LstmState<T>>> = vec![None; checkpoints.len()];

    let mut state = LstmState::zeros(lstm.hidden_dim());
    for t in 0..len {
        for (slot, &c) in checkpoint_states.iter_mut().zip(checkpoints.iter()) {
            if c == t {
                *slot = Some(state.clone());
            }
        }
        let embedded = embedding.forward(sequence.token(t))?;
        let (next, cache) = lstm_step(lstm, &state, &embedded)?;
        for (tape, range) in tapes.iter_mut().zip(ranges.iter()) {
            if range.contains(t) {
                tape.steps.push(TapeStep {
                    cache: cache.clone(),
                    token: sequence.token_owned(t),
                });
            }
        }
        state = next;
    }

    Ok(UnrollOutcome {
        final_state: state,
        tapes,
        checkpoint_states: checkpoint_states
            .into_iter()
            .map(|s| s.expect("checkpoint bounds checked above"))
            .collect(),
        forward_steps: len,
    })
}

/// Spec-shaped forward: retain only the last `window` steps.
pub fn unroll_forward<T: Scalar>(
    lstm: &LstmParams<T>,
    embedding: &EmbeddingTable<T>,
    sequence: &TokenSeq<T>,
    window: usize,
    checkpoints: &[usize],
) -> Result<(LstmState<T>, UnrollTape<T>, Vec<LstmState<T>>)> {
    let range = StepRange::suffix(sequence.len(), window);
    let mut outcome = unroll_forward_ranges(lstm, embedding, sequence, &[range], checkpoints)?;
    let tape = outcome.tapes.pop().expect("one range requested");
    Ok((outcome.final_state, tape, outcome.checkpoint_states))
}

/// Extra cotangent injected at the output state of an absolute step index.
#[derive(Debug, Clone)]
pub struct StateInjection<T> {
    pub step: usize,
    pub d_hidden: TensorBuffer<T>,
    pub d_cell: TensorBuffer<T>,
}

#[derive(Debug, Clone)]
pub struct BpttOutcome<T> {
    /// Gradient w.r.t. the state entering the tape window. At a truncation
    /// boundary the caller must discard it; otherwise it chains into an
    /// earlier tape.
    pub boundary_hidden_grad: TensorBuffer<T>,
    pub boundary_cell_grad: TensorBuffer<T>,
    /// Gradient w.r.t. each cached step's raw token (continuous mode only),
    /// indexed from the tape's start step.
    pub input_grads: Vec<Option<TensorBuffer<T>>>,
    /// Number of backward LSTM steps executed.
    pub backward_steps: usize,
}

/// Reverse-mode sweep over exactly one tape window, with arbitrary per-step
/// cotangent injections (the supervised loss injects only at the final step;
/// the stacked prediction decoder injects at every step it consumed).
pub fn bptt_backward_injected<T: Scalar>(
    lstm: &LstmParams<T>,
    embedding: &EmbeddingTable<T>,
    tape: &UnrollTape<T>,
    final_state_grad: Option<(TensorBuffer<T>, TensorBuffer<T>)>,
    injections: &[StateInjection<T>],
    lstm_grads: &mut LstmGrads<T>,
    embed_grad: &mut TensorBuffer<T>,
) -> Result<BpttOutcome<T>> {
    let hidden_dim = lstm.hidden_dim();
    let mut d_hidden = TensorBuffer::zeros(1, hidden_dim);
    let mut d_cell = TensorBuffer::zeros(1, hidden_dim);
    if let Some((dh, dc)) = final_state_grad {
        if dh.cols() != hidden_dim || dc.cols() != hidden_dim {
            return Err(Error::dim("bptt seed", dh.shape(), (1, hidden_dim)));
        }
        d_hidden = dh;
        d_cell = dc;
    }

    let mut input_grads: Vec<Option<TensorBuffer<T>>> = vec![None; tape.retained()];
    let mut backward_steps = 0;

    for (offset, step) in tape.steps.iter().enumerate().rev() {
        let t = tape.start_step + offset;
        for inj in injections.iter().filter(|inj| inj.step == t) {
            d_hidden.add_scaled(&inj.d_hidden, T::one());
            d_cell.add_scaled(&inj.d_cell, T::one());
        }
        let (dh_prev, dc_prev, d_embedded) =
            lstm_step_backward(lstm, &step.cache, &d_hidden, &d_cell, lstm_grads);
        input_grads[offset] = embedding.backward(step.token.as_ref(), &d_embedded, embed_grad);
        d_hidden = dh_prev;
        d_cell = dc_prev;
        backward_steps += 1;
    }

    Ok(BpttOutcome {
        boundary_hidden_grad: d_hidden,
        boundary_cell_grad: d_cell,
        input_grads,
        backward_steps,
    })
}

/// Spec-shaped backward: seed at the final cached step, no mid-window
/// injections. Returns fresh parameter gradients.
pub fn bptt_backward<T: Scalar>(
    lstm: &LstmParams<T>,
    embedding: &EmbeddingTable<T>,
    tape: &UnrollTape<T>,
    final_state_grad: (TensorBuffer<T>, TensorBuffer<T>),
) -> Result<(LstmGrads<T>, TensorBuffer<T>, BpttOutcome<T>)> {
    let mut lstm_grads = lstm.zero_grads();
    let mut embed_grad = embedding.table.zeros_like();
    let outcome = bptt_backward_injected(
        lstm,
        embedding,
        tape,
        Some(final_state_grad),
        &[],
        &mut lstm_grads,
        &mut embed_grad,
    )?;
    Ok((lstm_grads, embed_grad, outcome))
}
