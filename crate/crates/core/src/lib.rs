//! Multi-perspective LSTM library.
//!
//! Implements a recurrent cell that consumes `m` synchronized input
//! sequences ("perspectives") per step and folds them into one shared
//! cell state through a chained update, so inter-perspective structure
//! is learned inside the cell rather than by fusing independent
//! networks afterwards. On top of the cell sit uni- and bi-directional
//! sequence networks with soft-attention pooling and a softmax
//! classifier, hand-derived backpropagation through time, RMSprop
//! training, finite-difference gradient verification, and a synthetic
//! multi-view task whose single-view accuracy ceiling is known exactly.
//!
//! Everything is `f64`, dependency-free, and deterministic: all
//! randomness flows through [`math::RngState`], so equal seeds give
//! bitwise-equal results on any platform.

pub mod cells;
pub mod data;
pub mod error;
pub mod math;
pub mod network;
pub mod training;

pub use error::Error;
