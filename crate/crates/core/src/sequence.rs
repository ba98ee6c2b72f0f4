//! Token sequences: either discrete symbol ids or flat continuous vectors.

use crate::embed::TokenRef;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenSeq<T> {
    Discrete(Vec<u32>),
    /// `data` holds `len * dim` values, row-major by time step.
    Continuous { dim: usize, data: Vec<T> },
}

impl<T: Scalar> TokenSeq<T> {
    pub fn len(&self) -> usize {
        match self {
            TokenSeq::Discrete(ids) => ids.len(),
            TokenSeq::Continuous { dim, data } => data.len() / dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn token(&self, t: usize) -> TokenRef<'_, T> {
        match self {
            TokenSeq::Discrete(ids) => TokenRef::Discrete(ids[t]),
            TokenSeq::Continuous { dim, data } => {
                TokenRef::Continuous(&data[t * dim..(t + 1) * dim])
            }
        }
    }

    pub fn token_owned(&self, t: usize) -> TokenOwned<T> {
        match self.token(t) {
            TokenRef::Discrete(id) => TokenOwned::Discrete(id),
            TokenRef::Continuous(v) => TokenOwned::Continuous(v.to_vec()),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, TokenSeq::Discrete(_))
    }

    /// Dimension of one token as seen by the raw input: 1-of-n ids report
    /// their alphabet implicitly, so only continuous sequences have one.
    pub fn continuous_dim(&self) -> Option<usize> {
        match self {
            TokenSeq::Discrete(_) => None,
            TokenSeq::Continuous { dim, .. } => Some(*dim),
        }
    }
}

/// Owned copy of a single token, cached on tapes for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub enum TokenOwned<T> {
    Discrete(u32),
    Continuous(Vec<T>),
}

impl<T: Scalar> TokenOwned<T> {
    pub fn as_ref(&self) -> TokenRef<'_, T> {
        match self {
            TokenOwned::Discrete(id) => TokenRef::Discrete(*id),
            TokenOwned::Continuous(v) => TokenRef::Continuous(v),
        }
    }
}

/// One labeled training sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceExample<T> {
    pub tokens: TokenSeq<T>,
    pub label: u32,
}

impl<T: Scalar> SequenceExample<T> {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}
