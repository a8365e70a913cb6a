//! The three-party signature session.
//!
//! Alice signs a quantum-encoded image for Bob under the management of
//! Trent, the arbiter. Trent issues a fresh secret wire permutation each
//! session and relays one encrypted copy of the signed material, so neither
//! recipient can reconstruct or forge the signature alone. Verification
//! hinges on two classical image-equality checks: Bob compares his two
//! routes, Trent compares the images reported back by Bob and Alice.
//!
//! Channels are in-process message passing with an optional intercept hook
//! for adversarial experiments; payloads move between party slots and are
//! consumed on receipt, so no state is ever held by two parties at once.

pub mod transcript;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gates::UnitaryMatrix2;
use crate::neqr::{self, GrayscaleImage, SampledImage};
use crate::otp::{self, KeyLabel, KeyMaterial};
use crate::permutation::{self, EncodedPermutation, Permutation};
use crate::qft;
use crate::qsv;
use crate::state::StateVector;

use transcript::{
    digest_hex, Archive, ConfigSummary, Event, SessionTranscript, Verdict, VerdictReason,
};

/// Widest image register a session accepts (q + 2n wires).
pub const MAX_SESSION_WIRES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Role {
    Alice,
    Bob,
    Trent,
}

impl Role {
    pub fn name(&self) -> &'static str {
        match self {
            Role::Alice => "alice",
            Role::Bob => "bob",
            Role::Trent => "trent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetrievalMode {
    Exact,
    Sampled { shots: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(&self) -> UnitaryMatrix2 {
        match self {
            Pauli::X => UnitaryMatrix2::pauli_x(),
            Pauli::Y => UnitaryMatrix2::pauli_y(),
            Pauli::Z => UnitaryMatrix2::pauli_z(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        }
    }

    pub fn parse(s: &str) -> Option<Pauli> {
        match s {
            "X" | "x" => Some(Pauli::X),
            "Y" | "y" => Some(Pauli::Y),
            "Z" | "z" => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Unitary applied by an intercept.
#[derive(Debug, Clone)]
pub enum TamperOp {
    Pauli(Pauli),
    Unitary(UnitaryMatrix2),
}

impl TamperOp {
    fn matrix(&self) -> UnitaryMatrix2 {
        match self {
            TamperOp::Pauli(p) => p.matrix(),
            TamperOp::Unitary(u) => *u,
        }
    }

    fn describe(&self) -> String {
        match self {
            TamperOp::Pauli(p) => p.name().to_string(),
            TamperOp::Unitary(_) => "custom-unitary".to_string(),
        }
    }
}

/// The quantum transmissions of a session, named by role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelId {
    /// Trent -> Alice: encrypted permutation register.
    PermToAlice,
    /// Trent -> Bob: encrypted permutation register.
    PermToBob,
    /// Alice -> Bob: the permuted, keyed signature register.
    DirectSignature,
    /// Alice -> Trent: the keyed transform register for relaying.
    TrentUpload,
    /// Trent -> Bob: the double-encrypted relayed register.
    TrentDownload,
    /// Bob -> Trent: Bob's verified-image report.
    BobReport,
    /// Alice -> Trent: Alice's image report.
    AliceReport,
}

impl ChannelId {
    pub const ALL: [ChannelId; 7] = [
        ChannelId::PermToAlice,
        ChannelId::PermToBob,
        ChannelId::DirectSignature,
        ChannelId::TrentUpload,
        ChannelId::TrentDownload,
        ChannelId::BobReport,
        ChannelId::AliceReport,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ChannelId::PermToAlice => "perm-alice",
            ChannelId::PermToBob => "perm-bob",
            ChannelId::DirectSignature => "direct-signature",
            ChannelId::TrentUpload => "trent-upload",
            ChannelId::TrentDownload => "trent-download",
            ChannelId::BobReport => "bob-report",
            ChannelId::AliceReport => "alice-report",
        }
    }

    pub fn parse(s: &str) -> Option<ChannelId> {
        ChannelId::ALL.iter().copied().find(|c| c.name() == s)
    }

    /// Whether the payload is a permutation register rather than an image
    /// register.
    fn carries_permutation(&self) -> bool {
        matches!(self, ChannelId::PermToAlice | ChannelId::PermToBob)
    }
}

/// Adversarial interference installed on a session.
#[derive(Debug, Clone)]
pub enum TamperHook {
    /// Apply a unitary to one wire of the named in-flight transmission.
    Channel {
        channel: ChannelId,
        wire: usize,
        op: TamperOp,
    },
    /// Apply a unitary to one wire of Bob's relayed register after all
    /// decryption and the inverse transform (the plaintext pixel encoding).
    PostDecryptImage { wire: usize, op: TamperOp },
    /// Bob reports a different image than the one he verified.
    BobReportSubstitute { image: GrayscaleImage },
    /// Alice reports a different image than the one she signed.
    AliceReportSubstitute { image: GrayscaleImage },
}

impl TamperHook {
    pub fn describe(&self) -> String {
        match self {
            TamperHook::Channel { channel, wire, op } => {
                format!("channel {} wire {wire} {}", channel.name(), op.describe())
            }
            TamperHook::PostDecryptImage { wire, op } => {
                format!("post-decrypt wire {wire} {}", op.describe())
            }
            TamperHook::BobReportSubstitute { .. } => "bob substitutes report image".into(),
            TamperHook::AliceReportSubstitute { .. } => "alice substitutes report image".into(),
        }
    }
}

/// Externally supplied key or permutation material, overriding the seeded
/// derivation (used to replay sessions from key files).
#[derive(Debug, Clone, Default)]
pub struct MaterialOverride {
    pub key_ab: Option<KeyMaterial>,
    pub key_ta: Option<KeyMaterial>,
    pub key_tb: Option<KeyMaterial>,
    pub permutation: Option<Permutation>,
}

impl MaterialOverride {
    pub fn is_empty(&self) -> bool {
        self.key_ab.is_none()
            && self.key_ta.is_none()
            && self.key_tb.is_none()
            && self.permutation.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub image: GrayscaleImage,
    pub seed: u64,
    pub mode: RetrievalMode,
    pub tamper: Option<TamperHook>,
    pub overrides: MaterialOverride,
}

impl SessionConfig {
    pub fn new(image: GrayscaleImage, seed: u64) -> Result<Self> {
        let wires = image.layout().total_wires();
        if wires > MAX_SESSION_WIRES {
            return Err(Error::Config(format!(
                "register needs {wires} wires, sessions support at most {MAX_SESSION_WIRES}"
            )));
        }
        Ok(Self {
            image,
            seed,
            mode: RetrievalMode::Exact,
            tamper: None,
            overrides: MaterialOverride::default(),
        })
    }

    pub fn with_mode(mut self, mode: RetrievalMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_tamper(mut self, tamper: TamperHook) -> Self {
        self.tamper = Some(tamper);
        self
    }

    /// Image register width N = q + 2n.
    pub fn register_wires(&self) -> usize {
        self.image.layout().total_wires()
    }

    /// Permutation register width N * ceil(log2 N).
    pub fn permutation_wires(&self) -> usize {
        let n = self.register_wires();
        n * permutation::entry_width(n)
    }

    fn summary(&self) -> ConfigSummary {
        let (mode, shots) = match self.mode {
            RetrievalMode::Exact => ("exact".to_string(), None),
            RetrievalMode::Sampled { shots } => ("sampled".to_string(), Some(shots)),
        };
        ConfigSummary {
            image: self.image.clone(),
            seed: self.seed,
            mode,
            shots,
            tamper: self.tamper.as_ref().map(TamperHook::describe),
        }
    }

    fn validate(&self) -> Result<()> {
        if let RetrievalMode::Sampled { shots } = self.mode {
            if shots == 0 {
                return Err(Error::Config("sampled mode needs at least one shot".into()));
            }
        }
        match &self.tamper {
            Some(TamperHook::Channel { channel, wire, .. }) => {
                let wires = if channel.carries_permutation() {
                    self.permutation_wires()
                } else {
                    self.register_wires()
                };
                if *wire >= wires {
                    return Err(Error::Config(format!(
                        "tamper wire {wire} out of range for channel {} ({wires} wires)",
                        channel.name()
                    )));
                }
            }
            Some(TamperHook::PostDecryptImage { wire, .. }) => {
                if *wire >= self.register_wires() {
                    return Err(Error::Config(format!(
                        "tamper wire {wire} out of range for the image register"
                    )));
                }
            }
            Some(TamperHook::BobReportSubstitute { image })
            | Some(TamperHook::AliceReportSubstitute { image })
                if image.n() != self.image.n() || image.q() != self.image.q() =>
            {
                return Err(Error::Config(
                    "substituted report image must match the session image shape".into(),
                ));
            }
            Some(_) | None => {}
        }
        self.check_override_key(&self.overrides.key_ab, KeyLabel::AliceBob, self.register_wires())?;
        self.check_override_key(&self.overrides.key_ta, KeyLabel::TrentAlice, self.permutation_wires())?;
        self.check_override_key(&self.overrides.key_tb, KeyLabel::TrentBob, self.permutation_wires())?;
        if let Some(p) = &self.overrides.permutation {
            if p.size() != self.register_wires() {
                return Err(Error::Config(format!(
                    "permutation override has size {}, register has {} wires",
                    p.size(),
                    self.register_wires()
                )));
            }
        }
        Ok(())
    }

    fn check_override_key(
        &self,
        key: &Option<KeyMaterial>,
        label: KeyLabel,
        wires: usize,
    ) -> Result<()> {
        if let Some(k) = key {
            if k.label() != label {
                return Err(Error::Config(format!(
                    "override for key {label} carries label {}",
                    k.label()
                )));
            }
            if k.piece_count() != wires {
                return Err(Error::Config(format!(
                    "key {label} must have {wires} pieces (8x{wires} bits), got {}",
                    k.piece_count()
                )));
            }
        }
        Ok(())
    }
}

/// Idealized trusted-setup key oracle: both endpoints of `label` end up
/// holding the identical material, 8 bits per protected wire.
pub fn ideal_qkd(label: KeyLabel, wires: usize, seed: u64) -> KeyMaterial {
    KeyMaterial::generate(label, wires, seed)
}

/// The secret material a session runs on.
#[derive(Debug, Clone)]
pub struct SessionMaterial {
    pub key_ab: KeyMaterial,
    pub key_ta: KeyMaterial,
    pub key_tb: KeyMaterial,
    pub permutation: Permutation,
}

/// Derives the session material from the config seed, honoring overrides.
/// The Trent-pair keys are sized for the permutation register (their widest
/// protected register); image-register operations use their first N pieces.
pub fn derive_material(config: &SessionConfig) -> Result<SessionMaterial> {
    config.validate()?;
    let image_wires = config.register_wires();
    let perm_wires = config.permutation_wires();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let seed_ab: u64 = rng.gen();
    let seed_ta: u64 = rng.gen();
    let seed_tb: u64 = rng.gen();
    let seed_perm: u64 = rng.gen();
    let ov = &config.overrides;
    Ok(SessionMaterial {
        key_ab: ov
            .key_ab
            .clone()
            .unwrap_or_else(|| ideal_qkd(KeyLabel::AliceBob, image_wires, seed_ab)),
        key_ta: ov
            .key_ta
            .clone()
            .unwrap_or_else(|| ideal_qkd(KeyLabel::TrentAlice, perm_wires, seed_ta)),
        key_tb: ov
            .key_tb
            .clone()
            .unwrap_or_else(|| ideal_qkd(KeyLabel::TrentBob, perm_wires, seed_tb)),
        permutation: match &ov.permutation {
            Some(p) => p.clone(),
            None => Permutation::generate(image_wires, seed_perm)?,
        },
    })
}

#[derive(Debug, Clone)]
enum Payload {
    Register(StateVector),
    Permutation(EncodedPermutation),
}

impl Payload {
    fn digest(&self) -> String {
        match self {
            Payload::Register(s) => digest_hex(&qsv::to_bytes(s)),
            Payload::Permutation(e) => {
                let mut bytes = Vec::new();
                for chunk in e.chunks() {
                    bytes.extend_from_slice(&qsv::to_bytes(chunk));
                }
                digest_hex(&bytes)
            }
        }
    }

    fn tamper(&mut self, wire: usize, u: &UnitaryMatrix2) -> Result<()> {
        match self {
            Payload::Register(s) => s.apply_1q(wire, u),
            Payload::Permutation(e) => e.apply_1q(wire, u),
        }
    }

    fn into_register(self) -> StateVector {
        match self {
            Payload::Register(s) => s,
            Payload::Permutation(_) => unreachable!("slot holds an image register"),
        }
    }

    fn into_permutation(self) -> EncodedPermutation {
        match self {
            Payload::Permutation(e) => e,
            Payload::Register(_) => unreachable!("slot holds a permutation register"),
        }
    }
}

#[derive(Debug)]
struct Party {
    keys: BTreeMap<KeyLabel, KeyMaterial>,
    slots: BTreeMap<String, Payload>,
    permutation: Option<Permutation>,
}

impl Party {
    fn new() -> Self {
        Self {
            keys: BTreeMap::new(),
            slots: BTreeMap::new(),
            permutation: None,
        }
    }

    fn key(&self, label: KeyLabel) -> &KeyMaterial {
        self.keys.get(&label).expect("party holds the key")
    }

    fn take(&mut self, slot: &str) -> Payload {
        self.slots.remove(slot).expect("slot is populated")
    }
}

/// What either image-equality check produced. A retrieval that leaves
/// positions unobserved can at best be inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CompareOutcome {
    Match,
    Mismatch,
    Inconclusive,
}

#[derive(Debug, Clone)]
enum Retrieved {
    Exact(GrayscaleImage),
    Sampled(SampledImage),
}

impl Retrieved {
    fn compare(&self, other: &Retrieved) -> CompareOutcome {
        match (self, other) {
            (Retrieved::Exact(a), Retrieved::Exact(b)) => {
                if a == b {
                    CompareOutcome::Match
                } else {
                    CompareOutcome::Mismatch
                }
            }
            _ => {
                let side = self.side();
                let mut gap = false;
                for y in 0..side {
                    for x in 0..side {
                        match (self.pixel(y, x), other.pixel(y, x)) {
                            (Some(a), Some(b)) if a != b => return CompareOutcome::Mismatch,
                            (Some(_), Some(_)) => {}
                            _ => gap = true,
                        }
                    }
                }
                if gap {
                    CompareOutcome::Inconclusive
                } else {
                    CompareOutcome::Match
                }
            }
        }
    }

    fn side(&self) -> usize {
        match self {
            Retrieved::Exact(img) => img.side(),
            Retrieved::Sampled(img) => img.side(),
        }
    }

    fn pixel(&self, y: usize, x: usize) -> Option<u16> {
        match self {
            Retrieved::Exact(img) => Some(img.pixel(y, x)),
            Retrieved::Sampled(img) => img.pixel(y, x),
        }
    }

    fn coverage(&self) -> f64 {
        match self {
            Retrieved::Exact(_) => 1.0,
            Retrieved::Sampled(img) => img.coverage(),
        }
    }

    fn to_complete(&self) -> Result<GrayscaleImage> {
        match self {
            Retrieved::Exact(img) => Ok(img.clone()),
            Retrieved::Sampled(img) => img.to_complete(),
        }
    }
}

/// Per-retrieval seeds, drawn in fixed order after the material seeds so
/// transcripts are fully determined by the config seed.
#[derive(Debug, Clone, Copy)]
struct RetrievalSeeds {
    bob_routed: u64,
    bob_direct: u64,
    trent_from_bob: u64,
    trent_from_alice: u64,
}

/// A session in progress: party states, the growing event log, and the
/// outcome once a phase has settled it.
#[derive(Debug)]
pub struct Session {
    config: SessionConfig,
    material: SessionMaterial,
    seeds: RetrievalSeeds,
    alice: Party,
    bob: Party,
    trent: Party,
    events: Vec<Event>,
    outcome: Option<(Verdict, Option<Archive>)>,
    signing_done: bool,
}

impl Session {
    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn material(&self) -> &SessionMaterial {
        &self.material
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Permutation a party has recovered by measurement, if any.
    pub fn recovered_permutation(&self, role: Role) -> Option<&Permutation> {
        self.party(role).permutation.as_ref()
    }

    pub fn slot_names(&self, role: Role) -> Vec<String> {
        self.party(role).slots.keys().cloned().collect()
    }

    /// Read-only view of a held image register (diagnostics and tests).
    pub fn slot_register(&self, role: Role, slot: &str) -> Option<&StateVector> {
        match self.party(role).slots.get(slot) {
            Some(Payload::Register(s)) => Some(s),
            _ => None,
        }
    }

    /// The key topology the protocol requires: Alice never holds the
    /// Trent-Bob key, Bob never holds the Trent-Alice key, and only Trent
    /// holds both of his pair keys.
    pub fn key_topology_ok(&self) -> bool {
        let a: Vec<_> = self.alice.keys.keys().copied().collect();
        let b: Vec<_> = self.bob.keys.keys().copied().collect();
        let t: Vec<_> = self.trent.keys.keys().copied().collect();
        a == [KeyLabel::AliceBob, KeyLabel::TrentAlice]
            && b == [KeyLabel::AliceBob, KeyLabel::TrentBob]
            && t == [KeyLabel::TrentAlice, KeyLabel::TrentBob]
    }

    fn party(&self, role: Role) -> &Party {
        match role {
            Role::Alice => &self.alice,
            Role::Bob => &self.bob,
            Role::Trent => &self.trent,
        }
    }

    fn party_mut(&mut self, role: Role) -> &mut Party {
        match role {
            Role::Alice => &mut self.alice,
            Role::Bob => &mut self.bob,
            Role::Trent => &mut self.trent,
        }
    }

    fn log(&mut self, phase: &str, step: &str, actor: Role, action: &str, detail: String) {
        self.events.push(Event {
            phase: phase.to_string(),
            step: step.to_string(),
            actor: actor.name().to_string(),
            action: action.to_string(),
            detail,
        });
    }

    fn settle(&mut self, verdict: Verdict, archive: Option<Archive>) {
        if self.outcome.is_none() {
            self.outcome = Some((verdict, archive));
        }
    }

    /// Moves a payload from one party's slot to another, applying any
    /// installed channel intercept while the payload is in flight.
    fn send(
        &mut self,
        phase: &str,
        step: &str,
        channel: ChannelId,
        from: (Role, &str),
        to: (Role, &str),
    ) {
        let mut payload = self.party_mut(from.0).take(from.1);
        let sent_digest = payload.digest();
        self.log(
            phase,
            step,
            from.0,
            "send",
            format!(
                "{} -> {} via {} ({sent_digest})",
                from.1,
                to.0.name(),
                channel.name()
            ),
        );
        if let Some(TamperHook::Channel {
            channel: hooked,
            wire,
            op,
        }) = self.config.tamper.clone()
        {
            if hooked == channel {
                payload
                    .tamper(wire, &op.matrix())
                    .expect("tamper hook validated at config time");
                self.events.push(Event {
                    phase: phase.to_string(),
                    step: step.to_string(),
                    actor: "adversary".to_string(),
                    action: "tamper".to_string(),
                    detail: format!(
                        "{} on wire {wire} of {} in flight",
                        op.describe(),
                        channel.name()
                    ),
                });
            }
        }
        let received_digest = payload.digest();
        self.party_mut(to.0).slots.insert(to.1.to_string(), payload);
        self.log(
            phase,
            step,
            to.0,
            "receive",
            format!("{} ({received_digest})", to.1),
        );
    }

    fn retrieve(&mut self, state: &StateVector, seed: u64) -> Result<Retrieved> {
        let layout = self.config.image.layout();
        match self.config.mode {
            RetrievalMode::Exact => Ok(Retrieved::Exact(neqr::decode_exact(state, &layout)?)),
            RetrievalMode::Sampled { shots } => Ok(Retrieved::Sampled(neqr::retrieve_sampled(
                state, &layout, shots, seed,
            )?)),
        }
    }

    fn full_span(&self) -> Vec<usize> {
        (0..self.config.register_wires()).collect()
    }
}

/// Runs the initialization phase: key setup, image preparation, permutation
/// generation and encrypted quantum transfer, and the forward transform.
/// Fails only on invalid configuration; protocol-level failures settle the
/// session outcome instead.
pub fn initialization_phase(config: SessionConfig) -> Result<Session> {
    let material = derive_material(&config)?;
    let mut seed_rng = ChaCha8Rng::seed_from_u64(config.seed);
    // skip the four material seeds drawn by derive_material
    for _ in 0..4 {
        let _: u64 = seed_rng.gen();
    }
    let seeds = RetrievalSeeds {
        bob_routed: seed_rng.gen(),
        bob_direct: seed_rng.gen(),
        trent_from_bob: seed_rng.gen(),
        trent_from_alice: seed_rng.gen(),
    };
    let mut s = Session {
        config,
        material,
        seeds,
        alice: Party::new(),
        bob: Party::new(),
        trent: Party::new(),
        events: Vec::new(),
        outcome: None,
        signing_done: false,
    };
    let ph = "initialization";

    // (i) pairwise key setup
    let kab = s.material.key_ab.clone();
    let kta = s.material.key_ta.clone();
    let ktb = s.material.key_tb.clone();
    s.alice.keys.insert(KeyLabel::AliceBob, kab.clone());
    s.bob.keys.insert(KeyLabel::AliceBob, kab.clone());
    s.log(
        ph,
        "i",
        Role::Alice,
        "share-key",
        format!("K_AB ({} bits) held by alice and bob", kab.bit_len()),
    );
    s.alice.keys.insert(KeyLabel::TrentAlice, kta.clone());
    s.trent.keys.insert(KeyLabel::TrentAlice, kta.clone());
    s.log(
        ph,
        "i",
        Role::Trent,
        "share-key",
        format!("K_TA ({} bits) held by trent and alice", kta.bit_len()),
    );
    s.bob.keys.insert(KeyLabel::TrentBob, ktb.clone());
    s.trent.keys.insert(KeyLabel::TrentBob, ktb.clone());
    s.log(
        ph,
        "i",
        Role::Trent,
        "share-key",
        format!("K_TB ({} bits) held by trent and bob", ktb.bit_len()),
    );
    debug_assert!(s.key_topology_ok());

    // (ii) Alice prepares the quantum image
    let image_state = neqr::encode(&s.config.image)?;
    let digest = digest_hex(&qsv::to_bytes(&image_state));
    let wires = s.config.register_wires();
    s.alice
        .slots
        .insert("direct-copy".into(), Payload::Register(image_state));
    s.log(
        ph,
        "ii",
        Role::Alice,
        "prepare-image",
        format!(
            "encoded {0}x{0} image on {wires} wires ({digest})",
            s.config.image.side()
        ),
    );

    // (iii) Trent creates the permutation, encodes it twice, and sends
    // Alice her encrypted copy
    s.trent.permutation = Some(s.material.permutation.clone());
    s.log(
        ph,
        "iii",
        Role::Trent,
        "generate-permutation",
        format!("fresh permutation of {wires} wires for this session"),
    );
    let mut perm_a = permutation::encode_state(&s.material.permutation)?;
    perm_a.encrypt(&kta)?;
    let mut perm_b = permutation::encode_state(&s.material.permutation)?;
    perm_b.encrypt(&ktb)?;
    s.log(
        ph,
        "iii",
        Role::Trent,
        "encrypt-permutation",
        format!(
            "two encoded copies of {} wires, keyed for alice and for bob",
            perm_a.total_wires()
        ),
    );
    s.trent
        .slots
        .insert("perm-for-alice".into(), Payload::Permutation(perm_a));
    s.trent
        .slots
        .insert("perm-for-bob".into(), Payload::Permutation(perm_b));
    s.send(
        ph,
        "iii",
        ChannelId::PermToAlice,
        (Role::Trent, "perm-for-alice"),
        (Role::Alice, "perm-register"),
    );

    // (iv) Alice decrypts and measures the permutation
    let mut enc = s.alice.take("perm-register").into_permutation();
    enc.decrypt(&kta)?;
    match permutation::decode_state(&enc) {
        Ok(p) => {
            s.log(
                ph,
                "iv",
                Role::Alice,
                "measure-permutation",
                "decrypted and measured the permutation register".into(),
            );
            s.alice.permutation = Some(p);
        }
        Err(e) => {
            s.log(
                ph,
                "iv",
                Role::Alice,
                "measure-permutation",
                format!("decode failed: {e}"),
            );
            s.settle(
                Verdict::Aborted {
                    reason: VerdictReason::MalformedPermutation,
                },
                None,
            );
            return Ok(s);
        }
    }

    // (v) Alice applies the forward transform to her image register
    let span = s.full_span();
    let mut reg = s.alice.take("direct-copy").into_register();
    qft::apply_qft(&mut reg, &span)?;
    let digest = digest_hex(&qsv::to_bytes(&reg));
    s.alice
        .slots
        .insert("direct-copy".into(), Payload::Register(reg));
    s.log(
        ph,
        "v",
        Role::Alice,
        "apply-transform",
        format!("forward transform over all {wires} wires ({digest})"),
    );
    Ok(s)
}

/// Runs the signing phase: reorder, encrypt, and route both copies.
pub fn signing_phase(mut s: Session) -> Session {
    if s.outcome.is_some() {
        return s;
    }
    let ph = "signing";
    let span = s.full_span();
    let perm = s
        .alice
        .permutation
        .clone()
        .expect("initialization recovered the permutation");

    // (i) reorder the transform output with the permutation
    let mut reg = s.alice.take("direct-copy").into_register();
    permutation::reorder(&mut reg, &perm).expect("sizes agree");
    s.log(
        ph,
        "i",
        Role::Alice,
        "reorder",
        format!("permuted the {} transform wires ({})", perm.size(), digest_hex(&qsv::to_bytes(&reg))),
    );

    // (ii) encrypt wire i with the piece the permutation assigns it
    let kab = s.alice.key(KeyLabel::AliceBob).clone();
    otp::encrypt_register(&mut reg, &kab, perm.mapping()).expect("assignment is a bijection");
    s.alice
        .slots
        .insert("direct-copy".into(), Payload::Register(reg));
    s.log(
        ph,
        "ii",
        Role::Alice,
        "encrypt",
        "keyed the signature register with the permutation-indexed pieces of K_AB".into(),
    );

    // (iii) direct route to Bob
    s.send(
        ph,
        "iii",
        ChannelId::DirectSignature,
        (Role::Alice, "direct-copy"),
        (Role::Bob, "direct-signature"),
    );

    // (iv) second copy via Trent: fresh preparation, transform, plain-order
    // keying under K_AB
    let mut relay = neqr::encode(&s.config.image).expect("config image is valid");
    qft::apply_qft(&mut relay, &span).expect("span is valid");
    let ident = otp::identity_assignment(relay.wire_count());
    otp::encrypt_register(&mut relay, &kab, &ident).expect("identity assignment");
    s.alice
        .slots
        .insert("trent-copy".into(), Payload::Register(relay));
    s.log(
        ph,
        "iv",
        Role::Alice,
        "prepare-relay",
        "second encoded copy, transformed and keyed under K_AB in wire order".into(),
    );
    s.send(
        ph,
        "iv",
        ChannelId::TrentUpload,
        (Role::Alice, "trent-copy"),
        (Role::Trent, "routed-copy"),
    );

    // (v) Trent adds his layer and forwards to Bob
    let ktb = s.trent.key(KeyLabel::TrentBob).clone();
    let mut routed = s.trent.take("routed-copy").into_register();
    let ident = otp::identity_assignment(routed.wire_count());
    otp::encrypt_register(&mut routed, &ktb, &ident).expect("identity assignment");
    s.trent
        .slots
        .insert("routed-copy".into(), Payload::Register(routed));
    s.log(
        ph,
        "v",
        Role::Trent,
        "encrypt",
        "added the K_TB layer over the relayed register".into(),
    );
    s.send(
        ph,
        "v",
        ChannelId::TrentDownload,
        (Role::Trent, "routed-copy"),
        (Role::Bob, "trent-route"),
    );

    s.signing_done = true;
    s
}

/// Runs the verification phase and finalizes the transcript: both of Bob's
/// retrievals, his equality check, the two reports back to Trent, and
/// Trent's arbitration.
pub fn verification_phase(mut s: Session) -> SessionTranscript {
    if s.outcome.is_some() {
        return finish(s);
    }
    assert!(s.signing_done, "verification requires a completed signing phase");
    debug_assert!(s.key_topology_ok());
    let ph = "verification";
    let span = s.full_span();
    let kab = s.bob.key(KeyLabel::AliceBob).clone();
    let ktb = s.bob.key(KeyLabel::TrentBob).clone();

    // (i) Bob strips both cipher layers from the relayed copy, inverts the
    // transform, and retrieves his first image
    let mut routed = s.bob.take("trent-route").into_register();
    let ident = otp::identity_assignment(routed.wire_count());
    otp::decrypt_register(&mut routed, &ktb, &ident).expect("identity assignment");
    otp::decrypt_register(&mut routed, &kab, &ident).expect("identity assignment");
    qft::apply_iqft(&mut routed, &span).expect("span is valid");
    if let Some(TamperHook::PostDecryptImage { wire, op }) = s.config.tamper.clone() {
        routed
            .apply_1q(wire, &op.matrix())
            .expect("tamper hook validated at config time");
        s.events.push(Event {
            phase: ph.to_string(),
            step: "i".to_string(),
            actor: "adversary".to_string(),
            action: "tamper".to_string(),
            detail: format!("{} on wire {wire} of the decrypted pixel register", op.describe()),
        });
    }
    let seed = s.seeds.bob_routed;
    let routed_image = match s.retrieve(&routed, seed) {
        Ok(r) => r,
        Err(e) => {
            s.log(ph, "i", Role::Bob, "retrieve", format!("relayed copy failed: {e}"));
            s.settle(
                Verdict::Rejected {
                    reason: VerdictReason::MalformedNeqrState,
                },
                None,
            );
            return finish(s);
        }
    };
    s.log(
        ph,
        "i",
        Role::Bob,
        "retrieve",
        format!(
            "relayed copy decrypted, inverse transform, coverage {:.3}",
            routed_image.coverage()
        ),
    );

    // (ii) Bob asks Trent for the permutation and measures it
    s.log(
        ph,
        "ii",
        Role::Bob,
        "request-permutation",
        "asked trent for this session's permutation".into(),
    );
    s.send(
        ph,
        "ii",
        ChannelId::PermToBob,
        (Role::Trent, "perm-for-bob"),
        (Role::Bob, "perm-register"),
    );
    let mut enc = s.bob.take("perm-register").into_permutation();
    enc.decrypt(&ktb).expect("key sized for the permutation register");
    let perm = match permutation::decode_state(&enc) {
        Ok(p) => {
            s.log(
                ph,
                "ii",
                Role::Bob,
                "measure-permutation",
                "decrypted and measured the permutation register".into(),
            );
            s.bob.permutation = Some(p.clone());
            p
        }
        Err(e) => {
            s.log(ph, "ii", Role::Bob, "measure-permutation", format!("decode failed: {e}"));
            s.settle(
                Verdict::Aborted {
                    reason: VerdictReason::MalformedPermutation,
                },
                None,
            );
            return finish(s);
        }
    };

    // (iii) Bob unlocks the direct signature: permutation-indexed pieces of
    // K_AB, inverse reorder, inverse transform
    let mut direct = s.bob.take("direct-signature").into_register();
    otp::decrypt_register(&mut direct, &kab, perm.mapping()).expect("assignment is a bijection");
    permutation::inverse_reorder(&mut direct, &perm).expect("sizes agree");
    qft::apply_iqft(&mut direct, &span).expect("span is valid");
    s.log(
        ph,
        "iii",
        Role::Bob,
        "unlock-signature",
        "decrypted the direct copy, undid the reorder and the transform".into(),
    );

    // (iv) Bob retrieves the direct image and checks equality of his two
    // routes; on success he reports the verified image to Trent
    let seed = s.seeds.bob_direct;
    let direct_image = match s.retrieve(&direct, seed) {
        Ok(r) => r,
        Err(e) => {
            s.log(ph, "iv", Role::Bob, "retrieve", format!("direct copy failed: {e}"));
            s.settle(
                Verdict::Rejected {
                    reason: VerdictReason::MalformedNeqrState,
                },
                None,
            );
            return finish(s);
        }
    };
    s.log(
        ph,
        "iv",
        Role::Bob,
        "retrieve",
        format!("direct copy retrieved, coverage {:.3}", direct_image.coverage()),
    );
    match routed_image.compare(&direct_image) {
        CompareOutcome::Match => {
            s.log(
                ph,
                "iv",
                Role::Bob,
                "compare",
                "both routes agree; bob announces the signature valid".into(),
            );
        }
        CompareOutcome::Mismatch => {
            s.log(
                ph,
                "iv",
                Role::Bob,
                "compare",
                "routes disagree; signature rejected".into(),
            );
            s.settle(
                Verdict::Rejected {
                    reason: VerdictReason::BobCompareMismatch,
                },
                None,
            );
            return finish(s);
        }
        CompareOutcome::Inconclusive => {
            s.log(
                ph,
                "iv",
                Role::Bob,
                "compare",
                "unobserved positions leave the check inconclusive".into(),
            );
            s.settle(
                Verdict::Rejected {
                    reason: VerdictReason::CoverageInconclusive,
                },
                None,
            );
            return finish(s);
        }
    }
    let verified = direct_image
        .to_complete()
        .expect("a conclusive match implies full coverage");
    let report_image = match &s.config.tamper {
        Some(TamperHook::BobReportSubstitute { image }) => {
            let image = image.clone();
            s.events.push(Event {
                phase: ph.to_string(),
                step: "iv".to_string(),
                actor: "adversary".to_string(),
                action: "substitute".to_string(),
                detail: "bob swaps in a different image for his report".to_string(),
            });
            image
        }
        _ => verified,
    };
    let mut report = neqr::encode(&report_image).expect("image shape validated");
    let ident = otp::identity_assignment(report.wire_count());
    otp::encrypt_register(&mut report, &ktb, &ident).expect("identity assignment");
    s.bob
        .slots
        .insert("report-copy".into(), Payload::Register(report));
    s.log(
        ph,
        "iv",
        Role::Bob,
        "encrypt-report",
        "encoded the verified image and keyed it with K_TB".into(),
    );
    s.send(
        ph,
        "iv",
        ChannelId::BobReport,
        (Role::Bob, "report-copy"),
        (Role::Trent, "bob-report"),
    );

    // (v) Trent opens Bob's report
    let kta = s.trent.key(KeyLabel::TrentAlice).clone();
    let ktb_t = s.trent.key(KeyLabel::TrentBob).clone();
    let mut from_bob = s.trent.take("bob-report").into_register();
    let ident = otp::identity_assignment(from_bob.wire_count());
    otp::decrypt_register(&mut from_bob, &ktb_t, &ident).expect("identity assignment");
    let seed = s.seeds.trent_from_bob;
    let bob_view = match s.retrieve(&from_bob, seed) {
        Ok(r) => r,
        Err(e) => {
            s.log(ph, "v", Role::Trent, "retrieve", format!("bob's report failed: {e}"));
            s.settle(
                Verdict::Rejected {
                    reason: VerdictReason::MalformedNeqrState,
                },
                None,
            );
            return finish(s);
        }
    };
    s.log(
        ph,
        "v",
        Role::Trent,
        "retrieve",
        format!("bob's report retrieved, coverage {:.3}", bob_view.coverage()),
    );

    // (vi) Trent asks Alice for her image
    s.log(
        ph,
        "vi",
        Role::Trent,
        "request-image",
        "asked alice to report the signed image".into(),
    );
    let alice_image = match &s.config.tamper {
        Some(TamperHook::AliceReportSubstitute { image }) => {
            let image = image.clone();
            s.events.push(Event {
                phase: ph.to_string(),
                step: "vi".to_string(),
                actor: "adversary".to_string(),
                action: "substitute".to_string(),
                detail: "alice swaps in a different image for her report".to_string(),
            });
            image
        }
        _ => s.config.image.clone(),
    };
    let mut alice_report = neqr::encode(&alice_image).expect("image shape validated");
    let ident = otp::identity_assignment(alice_report.wire_count());
    otp::encrypt_register(&mut alice_report, &kta, &ident).expect("identity assignment");
    s.alice
        .slots
        .insert("report-copy".into(), Payload::Register(alice_report));
    s.log(
        ph,
        "vi",
        Role::Alice,
        "encrypt-report",
        "encoded her image and keyed it with K_TA".into(),
    );
    s.send(
        ph,
        "vi",
        ChannelId::AliceReport,
        (Role::Alice, "report-copy"),
        (Role::Trent, "alice-report"),
    );

    // (vii) Trent opens Alice's report, arbitrates, and archives
    let mut from_alice = s.trent.take("alice-report").into_register();
    let ident = otp::identity_assignment(from_alice.wire_count());
    otp::decrypt_register(&mut from_alice, &kta, &ident).expect("identity assignment");
    let seed = s.seeds.trent_from_alice;
    let alice_view = match s.retrieve(&from_alice, seed) {
        Ok(r) => r,
        Err(e) => {
            s.log(ph, "vii", Role::Trent, "retrieve", format!("alice's report failed: {e}"));
            s.settle(
                Verdict::Rejected {
                    reason: VerdictReason::MalformedNeqrState,
                },
                None,
            );
            return finish(s);
        }
    };
    s.log(
        ph,
        "vii",
        Role::Trent,
        "retrieve",
        format!("alice's report retrieved, coverage {:.3}", alice_view.coverage()),
    );
    match alice_view.compare(&bob_view) {
        CompareOutcome::Match => {
            let image = alice_view
                .to_complete()
                .expect("a conclusive match implies full coverage");
            s.log(
                ph,
                "vii",
                Role::Trent,
                "compare",
                "reports agree; trent archives the image under alice's identity".into(),
            );
            s.settle(
                Verdict::Valid,
                Some(Archive {
                    signer: Role::Alice.name().to_string(),
                    image,
                }),
            );
        }
        CompareOutcome::Mismatch => {
            s.log(
                ph,
                "vii",
                Role::Trent,
                "compare",
                "reports disagree; trent rejects the session".into(),
            );
            s.settle(
                Verdict::Rejected {
                    reason: VerdictReason::TrentCompareMismatch,
                },
                None,
            );
        }
        CompareOutcome::Inconclusive => {
            s.log(
                ph,
                "vii",
                Role::Trent,
                "compare",
                "unobserved positions leave the check inconclusive".into(),
            );
            s.settle(
                Verdict::Rejected {
                    reason: VerdictReason::CoverageInconclusive,
                },
                None,
            );
        }
    }
    finish(s)
}

fn finish(s: Session) -> SessionTranscript {
    let (verdict, archive) = s
        .outcome
        .expect("session settled before transcript assembly");
    SessionTranscript {
        config: s.config.summary(),
        events: s.events,
        verdict,
        archive,
    }
}

/// Runs the three phases in order, short-circuiting on abort.
pub fn run_session(config: SessionConfig) -> Result<SessionTranscript> {
    let session = initialization_phase(config)?;
    let session = signing_phase(session);
    Ok(verification_phase(session))
}
