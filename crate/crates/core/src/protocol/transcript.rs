//! Session transcripts: an ordered event log, the final verdict, and the
//! arbiter's archive, serializable as a deterministic JSON document.
//!
//! Quantum payloads never appear in a transcript as raw amplitudes; events
//! reference them through 16-hex-digit FNV-1a digests of their QSV1 byte
//! serialization so transcripts stay small and comparable.

use serde::Serialize;

use crate::neqr::GrayscaleImage;

/// One logged step of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Event {
    pub phase: String,
    pub step: String,
    pub actor: String,
    pub action: String,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictReason {
    MalformedPermutation,
    MalformedNeqrState,
    BobCompareMismatch,
    TrentCompareMismatch,
    CoverageInconclusive,
}

impl std::fmt::Display for VerdictReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VerdictReason::MalformedPermutation => "malformed-permutation",
            VerdictReason::MalformedNeqrState => "malformed-neqr-state",
            VerdictReason::BobCompareMismatch => "bob-compare-mismatch",
            VerdictReason::TrentCompareMismatch => "trent-compare-mismatch",
            VerdictReason::CoverageInconclusive => "coverage-inconclusive",
        };
        f.write_str(s)
    }
}

/// Session outcome. `Valid` requires both image-equality checks to pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Verdict {
    Valid,
    Rejected { reason: VerdictReason },
    Aborted { reason: VerdictReason },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Valid => write!(f, "valid"),
            Verdict::Rejected { reason } => write!(f, "rejected ({reason})"),
            Verdict::Aborted { reason } => write!(f, "aborted ({reason})"),
        }
    }
}

/// What the arbiter stores on a valid session for later traceability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Archive {
    pub signer: String,
    pub image: GrayscaleImage,
}

/// Summary of the inputs that fully determine a session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigSummary {
    pub image: GrayscaleImage,
    pub seed: u64,
    pub mode: String,
    pub shots: Option<u64>,
    pub tamper: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionTranscript {
    pub config: ConfigSummary,
    pub events: Vec<Event>,
    pub verdict: Verdict,
    pub archive: Option<Archive>,
}

impl SessionTranscript {
    pub fn is_valid(&self) -> bool {
        self.verdict.is_valid()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("transcript serializes");
        s.push('\n');
        s
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn digest_hex(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a64(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        // standard FNV-1a 64 test vectors
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn verdict_json_shapes() {
        assert_eq!(
            serde_json::to_string(&Verdict::Valid).unwrap(),
            r#"{"status":"valid"}"#
        );
        assert_eq!(
            serde_json::to_string(&Verdict::Rejected {
                reason: VerdictReason::BobCompareMismatch
            })
            .unwrap(),
            r#"{"status":"rejected","reason":"bob-compare-mismatch"}"#
        );
        assert_eq!(
            serde_json::to_string(&Verdict::Aborted {
                reason: VerdictReason::MalformedPermutation
            })
            .unwrap(),
            r#"{"status":"aborted","reason":"malformed-permutation"}"#
        );
    }
}
