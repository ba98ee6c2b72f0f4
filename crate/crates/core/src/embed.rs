//! Input embedding: row lookup for discrete tokens, a learned projection for
//! continuous ones (pixels are embedded to the model dimension rather than
//! fed raw).

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::tensor::TensorBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingMode {
    DiscreteLookup,
    ContinuousProjection,
}

/// Either a reference to a raw continuous token vector or a discrete id.
#[derive(Debug, Clone, Copy)]
pub enum TokenRef<'a, T> {
    Discrete(u32),
    Continuous(&'a [T]),
}

/// `table` is (vocab x embed) in discrete mode and (input_dim x embed) in
/// continuous mode, where the embedded vector is `token_row * table`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    pub table: TensorBuffer<T>,
    pub mode: EmbeddingMode,
}

impl<T: Scalar> EmbeddingTable<T> {
    pub fn init(
        vocab_or_input_dim: usize,
        embed_dim: usize,
        mode: EmbeddingMode,
        scale: f64,
        rng: &mut RngStream,
    ) -> Self {
        let data = (0..vocab_or_input_dim * embed_dim)
            .map(|_| T::from_f64(rng.uniform(-scale, scale)))
            .collect();
        EmbeddingTable {
            table: TensorBuffer::new(vocab_or_input_dim, embed_dim, data),
            mode,
        }
    }

    pub fn embed_dim(&self) -> usize {
        self.table.cols()
    }

    pub fn forward(&self, token: TokenRef<'_, T>) -> Result<TensorBuffer<T>> {
        match (self.mode, token) {
            (EmbeddingMode::DiscreteLookup, TokenRef::Discrete(id)) => {
                let id = id as usize;
                if id >= self.table.rows() {
                    return Err(Error::Index {
                        what: "embedding row",
                        index: id,
                        len: self.table.rows(),
                    });
                }
                Ok(TensorBuffer::vector(self.table.row(id).to_vec()))
            }
            (EmbeddingMode::ContinuousProjection, TokenRef::Continuous(raw)) => {
                if raw.len() != self.table.rows() {
                    return Err(Error::dim(
                        "continuous embedding",
                        (1, raw.len()),
                        self.table.shape(),
                    ));
                }
                let v = TensorBuffer::vector(raw.to_vec());
                self.table.matvec_transposed(&v)
            }
            _ => Err(Error::Config(
                "token kind does not match embedding mode".into(),
            )),
        }
    }

    /// Accumulates the table gradient; returns the gradient w.r.t. the raw
    /// token vector in continuous mode (there is none for a discrete lookup).
    pub fn backward(
        &self,
        token: TokenRef<'_, T>,
        d_embedded: &TensorBuffer<T>,
        grad_table: &mut TensorBuffer<T>,
    ) -> Option<TensorBuffer<T>> {
        match (self.mode, token) {
            (EmbeddingMode::DiscreteLookup, TokenRef::Discrete(id)) => {
                let row = grad_table.row_mut(id as usize);
                for (g, &d) in row.iter_mut().zip(d_embedded.data()) {
                    *g += d;
                }
                None
            }
            (EmbeddingMode::ContinuousProjection, TokenRef::Continuous(raw)) => {
                let v = TensorBuffer::vector(raw.to_vec());
                grad_table.add_outer_scaled(&v, d_embedded, T::one());
                Some(self.table.matvec(d_embedded).expect("embed backward"))
            }
            _ => unreachable!("token kind checked in forward"),
        }
    }
}
