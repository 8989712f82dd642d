//! Two peers over a simulated network, driven by a virtual clock.

use rand::Rng as _;
use thiserror::Error;

use super::session::{FusionConfig, Session, SessionError, SessionInput, Trigger};
use super::wire::{decode_message, encode_message, ConfidenceSet, WireError, WireMessage, PROTOCOL_VERSION};
use crate::classifier::ModelBundle;
use crate::detector::{DetectError, Detector, DetectorConfig};
use crate::num::{fmt6, round6};
use crate::rng::{self, streams};
use crate::skeleton::Clip;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetParams {
    /// One-way delay, seconds.
    pub latency: f64,
    /// Delay varies uniformly within +-jitter, seconds.
    pub jitter: f64,
    /// Probability that a message is lost.
    pub drop_rate: f64,
    pub seed: u64,
}

impl Default for NetParams {
    fn default() -> Self {
        Self {
            latency: 0.08,
            jitter: 0.02,
            drop_rate: 0.0,
            seed: 0,
        }
    }
}

impl NetParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let ok = self.latency.is_finite()
            && self.latency >= 0.0
            && self.jitter.is_finite()
            && self.jitter >= 0.0
            && (0.0..=1.0).contains(&self.drop_rate);
        if ok {
            Ok(())
        } else {
            Err(SimError::Net)
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("peers run at different frame rates ({0} vs {1})")]
    FpsMismatch(f64, f64),
    #[error("invalid network parameters")]
    Net,
    #[error("peer {peer}: {source}")]
    Detect {
        peer: &'static str,
        #[source]
        source: DetectError,
    },
    #[error("peer {peer}: {source}")]
    Session {
        peer: &'static str,
        #[source]
        source: SessionError,
    },
}

/// One message on the wire.
#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub seq: usize,
    pub from: &'static str,
    pub to: &'static str,
    pub sent_at: f64,
    /// `None` when the network dropped it.
    pub deliver_at: Option<f64>,
    pub line: String,
}

impl Delivery {
    pub fn to_json(&self) -> String {
        let deliver = self.deliver_at.map_or_else(|| "null".to_string(), fmt6);
        format!(
            "{{\"seq\":{},\"from\":\"{}\",\"to\":\"{}\",\"sent\":{},\"deliver\":{},\"msg\":{}}}",
            self.seq,
            self.from,
            self.to,
            fmt6(self.sent_at),
            deliver,
            self.line.trim_end()
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeerLog {
    pub triggers: Vec<Trigger>,
    /// Remote confidence messages that arrived too late to use.
    pub stale: usize,
    /// Lines that failed to decode.
    pub rejected: Vec<WireError>,
    /// Decoded messages the session refused, e.g. a confidence that
    /// overtook the sender's hello.
    pub refused: Vec<SessionError>,
}

impl PeerLog {
    /// Trigger log as protocol lines.
    pub fn to_lines(&self) -> String {
        self.triggers
            .iter()
            .map(|t| String::from_utf8(encode_message(&t.to_message())).expect("ascii"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadOutcome {
    pub a: PeerLog,
    pub b: PeerLog,
    pub trace: Vec<Delivery>,
}

impl DyadOutcome {
    pub fn trace_jsonl(&self) -> String {
        self.trace.iter().map(|d| d.to_json() + "\n").collect()
    }
}

const PEERS: [&str; 2] = ["A", "B"];

struct Peer<'b> {
    clip: &'b Clip,
    detector: Detector<'b>,
    session: Session,
    log: PeerLog,
    done: bool,
}

struct Network {
    rng: rng::Rng,
    params: NetParams,
    trace: Vec<Delivery>,
}

impl Network {
    fn send(&mut self, from: usize, t: f64, msg: &WireMessage) {
        let line = String::from_utf8(encode_message(msg)).expect("ascii");
        // Both draws are always taken so the stream does not depend on the parameters.
        let u: f64 = self.rng.gen();
        let d: f64 = self.rng.gen();
        let delay = (self.params.latency + self.params.jitter * (2.0 * u - 1.0)).max(0.0);
        let deliver_at = (d >= self.params.drop_rate).then(|| round6(t + delay));
        self.trace.push(Delivery {
            seq: self.trace.len(),
            from: PEERS[from],
            to: PEERS[1 - from],
            sent_at: t,
            deliver_at,
            line,
        });
    }
}

fn deliver(peer: &mut Peer, line: &str, cfg: &FusionConfig) {
    match decode_message(line.as_bytes()) {
        Ok(msg) => match peer.session.step(SessionInput::Remote(msg), cfg) {
            Ok(out) => peer.log.triggers.extend(out),
            Err(e) => peer.log.refused.push(e),
        },
        Err(e) => peer.log.rejected.push(e),
    }
}

/// Run both clips frame by frame; each peer detects locally, sends its
/// confidences to the other and fuses what it receives.
pub fn simulate_dyad(
    clip_a: &Clip,
    clip_b: &Clip,
    bundle: &ModelBundle,
    detector: &DetectorConfig,
    fusion: &FusionConfig,
    net: &NetParams,
) -> Result<DyadOutcome, SimError> {
    net.validate()?;
    fusion
        .validate()
        .map_err(|source| SimError::Session { peer: "A", source })?;
    if clip_a.fps != clip_b.fps {
        return Err(SimError::FpsMismatch(clip_a.fps, clip_b.fps));
    }
    let fps = clip_a.fps;
    let mut peers = Vec::with_capacity(2);
    for (i, clip) in [clip_a, clip_b].into_iter().enumerate() {
        let det = Detector::new(bundle, *detector, fps).map_err(|source| SimError::Detect { peer: PEERS[i], source })?;
        peers.push(Peer {
            clip,
            detector: det,
            session: Session::new(PEERS[i]),
            log: PeerLog::default(),
            done: false,
        });
    }
    let mut network = Network {
        rng: rng::stream(net.seed, streams::NETWORK),
        params: *net,
        trace: Vec::new(),
    };
    for i in 0..2 {
        network.send(
            i,
            0.0,
            &WireMessage::Hello {
                peer: PEERS[i].to_string(),
                version: PROTOCOL_VERSION,
            },
        );
    }
    let mut delivered = 0usize;
    let mut order: Vec<usize> = Vec::new();
    let frames = clip_a.len().max(clip_b.len());

    // Hand over every message due by `now` in (arrival, seq) order.
    let mut flush = |now: Option<f64>, peers: &mut Vec<Peer>, network: &Network| {
        order.extend(delivered..network.trace.len());
        delivered = network.trace.len();
        order.retain(|&s| network.trace[s].deliver_at.is_some());
        order.sort_by(|&x, &y| {
            let (dx, dy) = (network.trace[x].deliver_at.unwrap(), network.trace[y].deliver_at.unwrap());
            dx.total_cmp(&dy).then(x.cmp(&y))
        });
        let due = order
            .iter()
            .take_while(|&&s| now.map_or(true, |n| network.trace[s].deliver_at.unwrap() <= n))
            .count();
        for s in order.drain(..due) {
            let d = &network.trace[s];
            let to = usize::from(d.to == "B");
            deliver(&mut peers[to], &d.line, fusion);
        }
    };

    for k in 0..=frames {
        let t = k as f64 / fps;
        flush(Some(round6(t)), &mut peers, &network);
        for (i, peer) in peers.iter_mut().enumerate() {
            if peer.done {
                continue;
            }
            if k == peer.clip.len() {
                peer.detector.finish();
                peer.done = true;
                network.send(
                    i,
                    t,
                    &WireMessage::Bye {
                        peer: PEERS[i].to_string(),
                    },
                );
                continue;
            }
            let frame = &peer.clip.frames[k];
            let out = peer
                .detector
                .step(frame)
                .map_err(|source| SimError::Detect { peer: PEERS[i], source })?;
            let conf = ConfidenceSet(out.confidences.map(round6));
            let triggers = peer
                .session
                .step(SessionInput::Local { t, conf }, fusion)
                .map_err(|source| SimError::Session { peer: PEERS[i], source })?;
            peer.log.triggers.extend(triggers);
            network.send(
                i,
                t,
                &WireMessage::Conf {
                    peer: PEERS[i].to_string(),
                    t,
                    conf,
                },
            );
        }
    }
    flush(None, &mut peers, &network);
    drop(flush);

    let mut logs = peers.into_iter().map(|mut p| {
        p.log.stale = p.session.stale_count();
        p.log
    });
    let a = logs.next().expect("two peers");
    let b = logs.next().expect("two peers");
    Ok(DyadOutcome {
        a,
        b,
        trace: network.trace,
    })
}
