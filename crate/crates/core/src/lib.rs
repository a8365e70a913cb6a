//! Desk-scale simulator of a keyed quantum-image signature protocol.
//!
//! A grayscale image is encoded as a pixel-basis quantum register, pushed
//! through the Fourier transform, reordered under a secret per-session wire
//! permutation issued by an arbiter, and encrypted with a per-wire
//! one-time-pad cipher. The [`protocol`] module runs the full three-party
//! sign/verify session over simulated channels; [`adversary`] scripts the
//! forgery, tampering, and repudiation experiments against it.
//!
//! ```
//! use neqrsig::{GrayscaleImage, SessionConfig};
//!
//! let image = GrayscaleImage::new(1, 2, vec![0, 1, 2, 3]).unwrap();
//! let config = SessionConfig::new(image.clone(), 7).unwrap();
//! let transcript = neqrsig::protocol::run_session(config).unwrap();
//! assert!(transcript.is_valid());
//! assert_eq!(transcript.archive.unwrap().image, image);
//! ```

pub mod adversary;
pub mod error;
pub mod gates;
pub mod neqr;
pub mod otp;
pub mod permutation;
pub mod pgm;
pub mod protocol;
pub mod qft;
pub mod qsv;
pub mod state;

pub use error::{Error, Result};
pub use gates::UnitaryMatrix2;
pub use neqr::{GrayscaleImage, NeqrLayout, SampledImage};
pub use otp::{KeyLabel, KeyMaterial, KeyPiece};
pub use permutation::{EncodedPermutation, Permutation};
pub use protocol::transcript::{SessionTranscript, Verdict, VerdictReason};
pub use protocol::{RetrievalMode, SessionConfig};
pub use state::StateVector;
