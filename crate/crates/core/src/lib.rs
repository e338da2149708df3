//! Gender and number control for black-box machine translation.
//!
//! A hint sentence fragment such as "She said to them:" is prepended to every
//! source sentence, the wrapped text is translated by an opaque backend, and
//! the translated fragment is stripped off again. The crate scores the
//! stripped output with Moses-compatible corpus BLEU and audits gender/number
//! morphology in dependency parses of the output.

pub mod bleu;
pub mod client;
pub mod grammar;
pub mod harness;
pub mod morph;
pub mod wrap;
