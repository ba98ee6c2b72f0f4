//! LSTM sequence classification on very long inputs, trained with truncated
//! BPTT plus anchored unsupervised auxiliary losses (segment reconstruction
//! and next-token prediction), with a finite-difference-verified gradient
//! engine underneath and a reproducible experiment harness on top.
//!
//! The numeric core is generic over the scalar type; the aliases below pin
//! the f64 instantiation that training and the test suite use.

pub mod aux;
pub mod data;
pub mod embed;
pub mod error;
pub mod ffn;
pub mod gradcheck;
pub mod losses;
pub mod lstm;
pub mod model;
pub mod optim;
pub mod rng;
pub mod scalar;
pub mod sequence;
pub mod tensor;
pub mod train;
pub mod unroll;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use scalar::Scalar;

/// Scalar type used by the training harness.
pub type Real = f64;

pub type Tensor = tensor::TensorBuffer<Real>;
pub type Lstm = lstm::LstmParams<Real>;
pub type State = lstm::LstmState<Real>;
pub type Embedding = embed::EmbeddingTable<Real>;
pub type Ffn = ffn::FfnParams<Real>;
pub type Decoder = aux::AuxDecoderParams<Real>;
pub type Model = model::ModelParams<Real>;
pub type Example = sequence::SequenceExample<Real>;
pub type Tokens = sequence::TokenSeq<Real>;
