//! GIF toolkit around `ungif-core`: the GIF89a codec, frame I/O, dataset
//! synthesis, the restoration pipeline, and the evaluation harness.

pub mod config;
pub mod eval;
pub mod flo;
pub mod gif;
pub mod imageio;
pub mod manifest;
pub mod model;
pub mod pipeline;
pub mod synth;

pub use config::{Constraint, DitherChoice, OperatorChoice, OutputFormat, PipelineConfig};
pub use gif::{decode_gif, encode_gif, ColorTable, GifDocument, GifError, IndexedFrame};
