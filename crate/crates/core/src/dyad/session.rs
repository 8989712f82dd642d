//! Per-peer session logic: fuse local and remote confidences into haptic triggers.

use thiserror::Error;

use super::wire::{ConfidenceSet, WireMessage};
use crate::label::GestureLabel;
use crate::num::round6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    /// Fused score (and, for one-sided gestures, local confidence) needed to fire.
    pub dyad_threshold: f64,
    /// Each peer must show at least this much on its own.
    pub per_peer_floor: f64,
    /// Largest local/remote timestamp gap that still counts as simultaneous, seconds.
    pub match_window: f64,
    /// Minimum spacing between triggers of one gesture, seconds.
    pub refractory: f64,
    /// A gesture fires again only after its score has dropped below this.
    pub rearm_below: f64,
    /// Treat hand-on-mat on both sides as a dyadic HOLD_HANDS.
    pub hold_hands: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            dyad_threshold: 0.5,
            per_peer_floor: 0.2,
            match_window: 0.5,
            refractory: 1.0,
            rearm_below: 0.4,
            hold_hands: false,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<(), SessionError> {
        let ok = 0.0 <= self.per_peer_floor
            && self.per_peer_floor <= self.dyad_threshold
            && self.dyad_threshold <= 1.0
            && (0.0..=self.dyad_threshold).contains(&self.rearm_below)
            && self.match_window >= 0.0
            && self.refractory >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(SessionError::Config)
        }
    }

    /// Gestures that need both peers.
    pub fn dyadic_set(&self) -> Vec<GestureLabel> {
        let mut set = vec![GestureLabel::R5, GestureLabel::L5, GestureLabel::RH, GestureLabel::LH];
        if self.hold_hands {
            set.push(GestureLabel::HoldHands);
        }
        set
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("confidence {0} outside [0, 1]")]
pub struct FusionRangeError(pub f64);

/// Geometric mean of the two peers' confidences.
pub fn fuse(local: f64, remote: f64) -> Result<f64, FusionRangeError> {
    for x in [local, remote] {
        if !(0.0..=1.0).contains(&x) {
            return Err(FusionRangeError(x));
        }
    }
    Ok((local * remote).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trigger {
    pub gesture: GestureLabel,
    pub t: f64,
    /// Fused score for dyadic gestures, local confidence otherwise.
    pub fused: f64,
}

impl Trigger {
    pub fn to_message(self) -> WireMessage {
        WireMessage::Trigger {
            gesture: self.gesture,
            t: self.t,
            fused: self.fused,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("invalid fusion configuration")]
    Config,
    #[error("message from the remote peer before its hello")]
    NotGreeted,
    #[error("message from unexpected peer {0:?}")]
    PeerMismatch(String),
    #[error("local timestamp {0} is earlier than the session clock")]
    TimeReversal(f64),
    #[error(transparent)]
    Range(#[from] FusionRangeError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionInput {
    /// This peer's own detector output.
    Local { t: f64, conf: ConfidenceSet },
    /// A decoded message from the other peer.
    Remote(WireMessage),
}

const SLOTS: usize = GestureLabel::ALL.len();

/// Single-owner state of one peer's side of a session.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub local_id: String,
    pub remote_id: Option<String>,
    remote_closed: bool,
    local: Option<(f64, ConfidenceSet)>,
    remote: Option<(f64, ConfidenceSet)>,
    last_trigger: [Option<f64>; SLOTS],
    /// A gesture re-arms once its score has dropped below `rearm_below`.
    armed: [bool; SLOTS],
    clock: f64,
    stale: usize,
}

impl Session {
    pub fn new(local_id: impl Into<String>) -> Self {
        Self {
            local_id: local_id.into(),
            remote_id: None,
            remote_closed: false,
            local: None,
            remote: None,
            last_trigger: [None; SLOTS],
            armed: [true; SLOTS],
            clock: 0.0,
            stale: 0,
        }
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    /// Remote confidence messages ignored for arriving out of order or too late.
    pub fn stale_count(&self) -> usize {
        self.stale
    }

    pub fn step(&mut self, input: SessionInput, cfg: &FusionConfig) -> Result<Vec<Trigger>, SessionError> {
        cfg.validate()?;
        match input {
            SessionInput::Local { t, conf } => {
                if !(t.is_finite() && t >= self.clock) {
                    return Err(SessionError::TimeReversal(t));
                }
                for &c in &conf.0 {
                    if !(0.0..=1.0).contains(&c) {
                        return Err(FusionRangeError(c).into());
                    }
                }
                self.clock = t;
                self.local = Some((t, conf));
            }
            SessionInput::Remote(msg) => match msg {
                WireMessage::Hello { peer, .. } => match &self.remote_id {
                    Some(id) if *id != peer => return Err(SessionError::PeerMismatch(peer)),
                    _ => {
                        self.remote_id = Some(peer);
                        self.remote_closed = false;
                    }
                },
                WireMessage::Conf { peer, t, conf } => {
                    self.check_peer(&peer)?;
                    if self.remote_closed {
                        return Ok(Vec::new());
                    }
                    let older = self.remote.map_or(false, |(rt, _)| t < rt);
                    if older || self.clock - t > cfg.match_window {
                        self.stale += 1;
                        return Ok(Vec::new());
                    }
                    self.remote = Some((t, conf));
                }
                WireMessage::Bye { peer } => {
                    self.check_peer(&peer)?;
                    self.remote_closed = true;
                    self.remote = None;
                }
                // The other side's own triggers carry nothing to fuse.
                WireMessage::Trigger { .. } => {
                    if self.remote_id.is_none() {
                        return Err(SessionError::NotGreeted);
                    }
                    return Ok(Vec::new());
                }
            },
        }
        Ok(self.evaluate(cfg))
    }

    fn check_peer(&self, peer: &str) -> Result<(), SessionError> {
        match &self.remote_id {
            None => Err(SessionError::NotGreeted),
            Some(id) if id != peer => Err(SessionError::PeerMismatch(peer.to_string())),
            Some(_) => Ok(()),
        }
    }

    /// Score and firing condition of every gesture at the current clock.
    fn conditions(&self, cfg: &FusionConfig) -> Vec<(GestureLabel, bool, f64)> {
        let Some((tl, local)) = self.local else {
            return Vec::new();
        };
        let paired = self
            .remote
            .filter(|(tr, _)| (tl - tr).abs() <= cfg.match_window)
            .map(|(_, c)| c);
        let theta = cfg.dyad_threshold;
        let mut out = Vec::new();
        for g in cfg.dyadic_set() {
            let side = |c: &ConfidenceSet| match g {
                GestureLabel::HoldHands => c.get(GestureLabel::RM).max(c.get(GestureLabel::LM)),
                _ => c.get(g),
            };
            let (fire, score) = match paired {
                Some(remote) => {
                    let (a, b) = (side(&local), side(&remote));
                    let fused = round6((a * b).sqrt());
                    let fire = a >= cfg.per_peer_floor && b >= cfg.per_peer_floor && fused >= theta;
                    (fire, fused)
                }
                None => (false, 0.0),
            };
            out.push((g, fire, score));
        }
        let hug = local.get(GestureLabel::LS).min(local.get(GestureLabel::RS));
        let hugging = hug >= theta;
        out.push((GestureLabel::Hug, hugging, hug));
        let mut solo = vec![GestureLabel::RS, GestureLabel::LS];
        if !cfg.hold_hands {
            solo.extend([GestureLabel::RM, GestureLabel::LM]);
        }
        for g in solo {
            let c = local.get(g);
            let absorbed = hugging && matches!(g, GestureLabel::RS | GestureLabel::LS);
            out.push((g, c >= theta && !absorbed, if absorbed { 0.0 } else { c }));
        }
        out
    }

    fn evaluate(&mut self, cfg: &FusionConfig) -> Vec<Trigger> {
        let mut triggers = Vec::new();
        for (g, fire, score) in self.conditions(cfg) {
            let slot = g.code();
            if score < cfg.rearm_below {
                self.armed[slot] = true;
            }
            if !fire {
                continue;
            }
            let rested = self.last_trigger[slot].map_or(true, |last| self.clock - last >= cfg.refractory);
            if self.armed[slot] && rested {
                self.armed[slot] = false;
                self.last_trigger[slot] = Some(self.clock);
                triggers.push(Trigger {
                    gesture: g,
                    t: self.clock,
                    fused: score,
                });
            }
        }
        triggers.sort_by_key(|t| t.gesture);
        triggers
    }
}
