//! Pitch-strength measurement: reference sounds, HarmonicRatio and spectral
//! flatness features, the noisiness-inharmonicity space and a salience
//! equalizer built on spectral-envelope peaks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio_io;
pub mod dsp;
pub mod error;
pub mod features;
pub mod pipeline;
pub mod salience_eq;
pub mod space;
pub mod stats;
pub mod synth;

pub use audio_io::{load_audio, save_audio, AudioBuffer, BitDepth};
pub use error::{Error, Result};
