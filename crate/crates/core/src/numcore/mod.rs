//! Small differentiable numeric core: dense vectors and matrices, the
//! activations and LSTM recurrences the tagger needs, a reverse-mode tape,
//! initialisers and Adam.

pub mod adam;
pub mod init;
pub mod lstm;
pub mod ops;
pub mod tape;
pub mod tensor;

pub use adam::AdamState;
pub use init::{dropout, dropout_mask, glorot_init, uniform_init};
pub use lstm::{bilstm, lstm_cell, LstmParams};
pub use ops::{cross_entropy, linear, softmax, LOG_PROB_FLOOR};
pub use tape::{Tape, Var};
pub use tensor::Tensor;
