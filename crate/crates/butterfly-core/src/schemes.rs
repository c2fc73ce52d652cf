//! Single-antenna relaying schemes: two-way amplify-forward without caching,
//! cached-XOR zero-forcing delivery, and time sharing between the two.
//!
//! The no-cache scheme silences everything except `S1`, `R2`, `S3` and lets
//! the center relay amplify-forward with a one-slot delay; the two served
//! destinations subtract their co-located source's forwarded term and each
//! decode at a rate that grows like `log2(P)`, for a sum-rate slope of 2.
//!
//! With relay caching, the relays hold the XORs `W1^W3` and `W2^W4`, encode
//! them as two common streams `A` and `B`, and choose per-relay weights that
//! cancel `B` at `D1`/`D3` and `A` at `D2`/`D4`. All four destinations then
//! decode simultaneously (slope 4), each recovering its wanted message by
//! XOR-ing the decoded stream with the message it already holds. Fractional
//! caching time-shares the two schemes for a slope of `2 + 2p`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::analysis;
use crate::bits::BitString;
use crate::netmodel::{
    self, co_located_source, ChannelRealization, Dest, MessageSet, ModelError, Node, Relay,
    RelaySignals, Source, SymbolFrame, TopologyVariant,
};
use crate::rng;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Relative threshold below which a delivery gain counts as a degenerate
/// (measure-zero) channel rather than a usable coefficient.
pub const GAIN_DEGENERACY_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Scheme identifiers and errors
// ---------------------------------------------------------------------------

/// Which relaying strategy to run.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Scheme {
    /// Amplify-forward through the center relay, no caching (slope 2).
    NoCache,
    /// Cached-XOR zero-forcing delivery (slope 4).
    Cache,
    /// Time sharing: fraction `p` cache delivery, `1-p` no-cache (slope 2+2p).
    TimeShare(f64),
    /// Multi-antenna center relay with nulling weights (slope 4). With
    /// `use_side_relays = false` the side relays are absent from the
    /// topology; the transmit strategy is identical either way.
    Mimo { use_side_relays: bool },
}

impl Scheme {
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::NoCache => "no-cache",
            Scheme::Cache => "cache",
            Scheme::TimeShare(_) => "time-share",
            Scheme::Mimo { .. } => "mimo",
        }
    }
}

/// Failure modes shared by the scheme implementations.
#[derive(Clone, PartialEq, Debug)]
pub enum SchemeError {
    /// The scheme cannot run on this topology variant.
    UnsupportedScheme {
        scheme: &'static str,
        variant: TopologyVariant,
    },
    /// A measure-zero channel made a required coefficient vanish (or a
    /// required denominator zero).
    DegenerateChannel { detail: String },
    /// A fraction parameter left [0, 1].
    InvalidFraction { p: f64 },
    /// Transmit power must be positive and finite.
    InvalidPower { power: f64 },
    /// An underlying model operation failed.
    Model(ModelError),
}

impl fmt::Display for SchemeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeError::UnsupportedScheme { scheme, variant } => {
                write!(f, "scheme {scheme} does not support topology {variant:?}")
            }
            SchemeError::DegenerateChannel { detail } => {
                write!(f, "degenerate channel: {detail}")
            }
            SchemeError::InvalidFraction { p } => {
                write!(f, "fraction {p} outside [0, 1]")
            }
            SchemeError::InvalidPower { power } => {
                write!(f, "power {power} must be positive and finite")
            }
            SchemeError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SchemeError {}

impl From<ModelError> for SchemeError {
    fn from(e: ModelError) -> Self {
        SchemeError::Model(e)
    }
}

fn check_power(power: f64) -> Result<(), SchemeError> {
    if !(power.is_finite() && power > 0.0) {
        return Err(SchemeError::InvalidPower { power });
    }
    Ok(())
}

fn require_single_antenna(scheme: &'static str, ch: &ChannelRealization) -> Result<(), SchemeError> {
    if ch.variant() != TopologyVariant::SingleAntennaRelay {
        return Err(SchemeError::UnsupportedScheme {
            scheme,
            variant: ch.variant(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Scheme report
// ---------------------------------------------------------------------------

/// What a scheme delivers at each destination: effective coefficients, the
/// leftover interference, the forwarded relay noise, and the resulting rates.
#[derive(Clone, PartialEq, Debug)]
pub struct SchemeReport {
    /// Scheme tag ("no-cache", "cache", "mimo").
    pub scheme: &'static str,
    /// Configured transmit power `P`.
    pub power: f64,
    /// Effective desired-stream gain at each destination (zero where the
    /// destination is not served).
    pub gains: [Complex64; 4],
    /// Effective gains of every unintended stream that is not removable as
    /// side information, per destination.
    pub residuals: [Vec<Complex64>; 4],
    /// Forwarded relay-noise amplification per destination. The receiver's
    /// own unit noise is not included; rate computation adds it.
    pub noise_amp: [f64; 4],
    /// Per-destination rates in bits per channel use.
    pub rates: [f64; 4],
    /// Nodes that transmit with nonzero power under this scheme.
    pub active: Vec<Node>,
}

impl SchemeReport {
    /// Largest residual-interference magnitude across destinations.
    pub fn residual_max(&self) -> f64 {
        self.residuals
            .iter()
            .flatten()
            .map(|r| libm::sqrt(r.norm_sqr()))
            .fold(0.0, f64::max)
    }

    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }
}

// ---------------------------------------------------------------------------
// No-cache amplify-forward
// ---------------------------------------------------------------------------

/// Amplify-forward gain of the center relay at power `P`: the relay scales
/// its previous reception to transmit at exactly average power `P`, with only
/// `S1` and `S3` on the air.
pub fn amplify_gain(ch: &ChannelRealization, power: f64) -> Result<f64, SchemeError> {
    require_single_antenna("no-cache", ch)?;
    check_power(power)?;
    let h1 = ch.to_r2_scalar(Source::S1).norm_sqr();
    let h3 = ch.to_r2_scalar(Source::S3).norm_sqr();
    Ok(libm::sqrt(power / (h1 * power + h3 * power + 1.0)))
}

/// The no-cache scheme: `S1` and `S3` transmit, `R2` amplify-forwards with a
/// one-slot delay, everything else stays silent.
///
/// `D1` and `D3` subtract the forwarded term of their co-located source and
/// are left with their desired stream only; `D2` and `D4` receive nothing
/// useful and carry zero rate. Channels incident to the side relays are
/// never read.
pub fn no_cache_scheme(
    ch: &ChannelRealization,
    power: f64,
) -> Result<SchemeReport, SchemeError> {
    let alpha = amplify_gain(ch, power)?;

    let mut gains = [C0; 4];
    let mut residuals: [Vec<Complex64>; 4] = [vec![], vec![], vec![], vec![]];
    let mut noise_amp = [0.0f64; 4];
    let mut rates = [0.0f64; 4];

    for d in [Dest::D1, Dest::D3] {
        let i = d.index();
        let wanted = netmodel::intended_source(d);
        let g = ch.from_r2_scalar(d) * alpha * ch.to_r2_scalar(wanted);
        gains[i] = g;
        // The only other forwarded term is the co-located source's; the
        // destination subtracts it, so no residual interference remains.
        noise_amp[i] = (ch.from_r2_scalar(d) * alpha).norm_sqr();
        let sinr = analysis::sinr(g, &residuals[i], noise_amp[i], power)
            .expect("no-cache SINR inputs are valid by construction");
        rates[i] = analysis::rate(sinr).expect("SINR is nonnegative");
    }
    for d in [Dest::D2, Dest::D4] {
        let i = d.index();
        // Both forwarded streams are unintended here and neither is side
        // information; the destination decodes nothing.
        residuals[i] = vec![
            ch.from_r2_scalar(d) * alpha * ch.to_r2_scalar(Source::S1),
            ch.from_r2_scalar(d) * alpha * ch.to_r2_scalar(Source::S3),
        ];
        noise_amp[i] = (ch.from_r2_scalar(d) * alpha).norm_sqr();
        rates[i] = 0.0;
    }

    Ok(SchemeReport {
        scheme: "no-cache",
        power,
        gains,
        residuals,
        noise_amp,
        rates,
        active: vec![
            Node::Src(Source::S1),
            Node::Rel(Relay::R2),
            Node::Src(Source::S3),
        ],
    })
}

// ---------------------------------------------------------------------------
// Cache placement
// ---------------------------------------------------------------------------

/// What the relays hold after placement: the two message XORs, truncated to
/// the cached fraction. Individual messages are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct CachedContent {
    /// Cached prefix of `W1 ^ W3`.
    pub w1_xor_w3: BitString,
    /// Cached prefix of `W2 ^ W4`.
    pub w2_xor_w4: BitString,
    /// Fraction of each message that is cached.
    pub fraction: f64,
    /// Full (uncached) message length in bits.
    pub message_bits: usize,
}

impl CachedContent {
    /// Number of cached bits per XOR: `floor(p * len)`.
    pub fn cached_bits(&self) -> usize {
        self.w1_xor_w3.len()
    }
}

/// Offline placement: compute both XORs and keep the first `floor(p * len)`
/// bits of each.
pub fn cache_placement(msgs: &MessageSet, p: f64) -> Result<CachedContent, SchemeError> {
    if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
        return Err(SchemeError::InvalidFraction { p });
    }
    let len = msgs.len_bits();
    let cached = libm::floor(p * len as f64) as usize;
    let w13 = msgs.message(Source::S1).xor(msgs.message(Source::S3));
    let w24 = msgs.message(Source::S2).xor(msgs.message(Source::S4));
    Ok(CachedContent {
        w1_xor_w3: w13.prefix(cached),
        w2_xor_w4: w24.prefix(cached),
        fraction: p,
        message_bits: len,
    })
}

// ---------------------------------------------------------------------------
// Cache delivery beamformers and gains
// ---------------------------------------------------------------------------

/// One relay's transmit weights on the two common streams.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct StreamWeights {
    pub on_a: Complex64,
    pub on_b: Complex64,
}

impl StreamWeights {
    fn power(self) -> f64 {
        self.on_a.norm_sqr() + self.on_b.norm_sqr()
    }
}

/// Unscaled per-relay weights of the cache delivery phase, plus the common
/// power scale that makes the tightest relay meet its constraint.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct CacheBeamformers {
    pub r1: StreamWeights,
    pub r2: StreamWeights,
    pub r3: StreamWeights,
}

impl CacheBeamformers {
    /// Common scale `gamma` so that with unit-power streams every relay's
    /// average transmit power is at most `P` (the tightest exactly `P`).
    /// A single scale across relays preserves the cancellation.
    pub fn power_scale(&self, power: f64) -> f64 {
        let tightest = self
            .r1
            .power()
            .max(self.r2.power())
            .max(self.r3.power());
        libm::sqrt(power / tightest)
    }

    /// Euclidean norm of all six weights.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.r1.power() + self.r2.power() + self.r3.power())
    }

    /// Average transmit powers `(R1, R2, R3)` with unit-power streams and
    /// common scale `gamma`.
    pub fn relay_powers(&self, gamma: f64) -> [f64; 3] {
        [
            gamma * gamma * self.r1.power(),
            gamma * gamma * self.r2.power(),
            gamma * gamma * self.r3.power(),
        ]
    }
}

fn nonzero(label: &str, z: Complex64) -> Result<Complex64, SchemeError> {
    if z == C0 {
        return Err(SchemeError::DegenerateChannel {
            detail: format!("{label} is exactly zero"),
        });
    }
    Ok(z)
}

/// Relay weights of the cache delivery phase.
///
/// With streams `A` (carrying `W1^W3`) and `B` (carrying `W2^W4`):
/// `X_R1 = -(H_{R2,2}/H_{R1,2}) A - (H_{R2,3}/H_{R1,3}) B`,
/// `X_R2 = A + B`,
/// `X_R3 = -(H_{R2,4}/H_{R3,4}) A - (H_{R2,1}/H_{R3,1}) B`,
/// chosen so the side relays cancel the unwanted stream at every
/// destination.
pub fn cache_beamformers(ch: &ChannelRealization) -> Result<CacheBeamformers, SchemeError> {
    require_single_antenna("cache", ch)?;
    let side = ch.side().expect("single-antenna topology has side relays");

    let h_r1_d2 = nonzero("R1->D2", side.r1_d2)?;
    let h_r1_d3 = nonzero("R1->D3", side.r1_d3)?;
    let h_r3_d1 = nonzero("R3->D1", side.r3_d1)?;
    let h_r3_d4 = nonzero("R3->D4", side.r3_d4)?;

    Ok(CacheBeamformers {
        r1: StreamWeights {
            on_a: -(ch.from_r2_scalar(Dest::D2) / h_r1_d2),
            on_b: -(ch.from_r2_scalar(Dest::D3) / h_r1_d3),
        },
        r2: StreamWeights { on_a: C1, on_b: C1 },
        r3: StreamWeights {
            on_a: -(ch.from_r2_scalar(Dest::D4) / h_r3_d4),
            on_b: -(ch.from_r2_scalar(Dest::D1) / h_r3_d1),
        },
    })
}

/// Which common stream each destination decodes: `A` at `D1`/`D3`, `B` at
/// `D2`/`D4`.
pub fn stream_of(d: Dest) -> CommonStream {
    match d {
        Dest::D1 | Dest::D3 => CommonStream::A,
        Dest::D2 | Dest::D4 => CommonStream::B,
    }
}

/// The two common streams of the cache delivery phase.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CommonStream {
    /// Carries `W1 ^ W3`.
    A,
    /// Carries `W2 ^ W4`.
    B,
}

/// Effective per-destination coefficients of the cache delivery phase.
#[derive(Clone, PartialEq, Debug)]
pub struct DeliveryGains {
    /// Desired-stream gain at each destination (closed form).
    pub desired: [Complex64; 4],
    /// Unwanted-stream gain at each destination, evaluated numerically from
    /// the weights; zero in exact arithmetic.
    pub cross: [Complex64; 4],
}

/// Closed-form desired gains and numerically evaluated cross-stream gains.
///
/// The closed forms are
/// `g_1 = H_{R2,1} - H_{R3,1} H_{R2,4} / H_{R3,4}` (stream A),
/// `g_2 = H_{R2,2} - H_{R1,2} H_{R2,3} / H_{R1,3}` (stream B),
/// `g_3 = H_{R2,3} - H_{R1,3} H_{R2,2} / H_{R1,2}` (stream A),
/// `g_4 = H_{R2,4} - H_{R3,4} H_{R2,1} / H_{R3,1}` (stream B).
/// A gain within [`GAIN_DEGENERACY_TOL`] (relative) of complete cancellation
/// is a measure-zero degenerate channel and is rejected.
pub fn cache_delivery_gains(ch: &ChannelRealization) -> Result<DeliveryGains, SchemeError> {
    let w = cache_beamformers(ch)?;
    let side = ch.side().expect("single-antenna topology has side relays");

    // Desired gains, closed form.
    let g1 = ch.from_r2_scalar(Dest::D1)
        - side.r3_d1 * ch.from_r2_scalar(Dest::D4) / side.r3_d4;
    let g2 = ch.from_r2_scalar(Dest::D2)
        - side.r1_d2 * ch.from_r2_scalar(Dest::D3) / side.r1_d3;
    let g3 = ch.from_r2_scalar(Dest::D3)
        - side.r1_d3 * ch.from_r2_scalar(Dest::D2) / side.r1_d2;
    let g4 = ch.from_r2_scalar(Dest::D4)
        - side.r3_d4 * ch.from_r2_scalar(Dest::D1) / side.r3_d1;
    let desired = [g1, g2, g3, g4];

    // Cross-stream gains, evaluated as the actual weighted sums so rounding
    // is visible instead of assumed away.
    let relay_weight = |r: Relay| -> StreamWeights {
        match r {
            Relay::R1 => w.r1,
            Relay::R2 => w.r2,
            Relay::R3 => w.r3,
        }
    };
    let side_gain = |r: Relay, d: Dest| -> Complex64 {
        match (r, d) {
            (Relay::R1, Dest::D2) => side.r1_d2,
            (Relay::R1, Dest::D3) => side.r1_d3,
            (Relay::R3, Dest::D1) => side.r3_d1,
            (Relay::R3, Dest::D4) => side.r3_d4,
            _ => C0,
        }
    };
    let mut cross = [C0; 4];
    for d in Dest::ALL {
        let side_relay = match d {
            Dest::D1 | Dest::D4 => Relay::R3,
            Dest::D2 | Dest::D3 => Relay::R1,
        };
        let unwanted = |sw: StreamWeights| match stream_of(d) {
            CommonStream::A => sw.on_b,
            CommonStream::B => sw.on_a,
        };
        cross[d.index()] = ch.from_r2_scalar(d) * unwanted(relay_weight(Relay::R2))
            + side_gain(side_relay, d) * unwanted(relay_weight(side_relay));
    }

    // Degeneracy: a desired gain that cancels to (near) zero relative to the
    // magnitudes that formed it.
    let formed_scale = [
        ch.from_r2_scalar(Dest::D1).norm_sqr().max((side.r3_d1 * ch.from_r2_scalar(Dest::D4) / side.r3_d4).norm_sqr()),
        ch.from_r2_scalar(Dest::D2).norm_sqr().max((side.r1_d2 * ch.from_r2_scalar(Dest::D3) / side.r1_d3).norm_sqr()),
        ch.from_r2_scalar(Dest::D3).norm_sqr().max((side.r1_d3 * ch.from_r2_scalar(Dest::D2) / side.r1_d2).norm_sqr()),
        ch.from_r2_scalar(Dest::D4).norm_sqr().max((side.r3_d4 * ch.from_r2_scalar(Dest::D1) / side.r3_d1).norm_sqr()),
    ];
    for (i, g) in desired.iter().enumerate() {
        let scale = libm::sqrt(formed_scale[i]);
        if libm::sqrt(g.norm_sqr()) <= GAIN_DEGENERACY_TOL * scale {
            return Err(SchemeError::DegenerateChannel {
                detail: format!("delivery gain at D{} cancels to zero", i + 1),
            });
        }
    }

    Ok(DeliveryGains { desired, cross })
}

/// The cache delivery phase at power `P`: relays transmit the weighted
/// common streams, sources stay silent, every destination decodes its stream
/// and recovers its message by XOR with the one it already holds.
///
/// Relay noise does not propagate (the relays transmit cached functions, not
/// received signals), so the only noise is the destination's own.
pub fn run_cache_scheme(
    ch: &ChannelRealization,
    power: f64,
) -> Result<SchemeReport, SchemeError> {
    check_power(power)?;
    let weights = cache_beamformers(ch)?;
    let gains = cache_delivery_gains(ch)?;
    let gamma = weights.power_scale(power);
    let p_eff = gamma * gamma;

    let mut rates = [0.0f64; 4];
    let mut residuals: [Vec<Complex64>; 4] = [vec![], vec![], vec![], vec![]];
    let noise_amp = [0.0f64; 4];
    for d in Dest::ALL {
        let i = d.index();
        residuals[i] = vec![gains.cross[i]];
        let sinr = analysis::sinr(gains.desired[i], &residuals[i], noise_amp[i], p_eff)
            .expect("cache SINR inputs are valid by construction");
        rates[i] = analysis::rate(sinr).expect("SINR is nonnegative");
    }

    Ok(SchemeReport {
        scheme: "cache",
        power,
        gains: gains.desired,
        residuals,
        noise_amp,
        rates,
        active: vec![
            Node::Rel(Relay::R1),
            Node::Rel(Relay::R2),
            Node::Rel(Relay::R3),
        ],
    })
}

/// Time sharing: fraction `p` of slots run the cache scheme, the rest run
/// no-cache, so `rate_i = (1-p) rate_i_nc + p rate_i_c`.
pub fn time_share(
    p: f64,
    report_nc: &SchemeReport,
    report_c: &SchemeReport,
) -> Result<[f64; 4], SchemeError> {
    if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
        return Err(SchemeError::InvalidFraction { p });
    }
    let mut rates = [0.0f64; 4];
    for (i, r) in rates.iter_mut().enumerate() {
        *r = (1.0 - p) * report_nc.rates[i] + p * report_c.rates[i];
    }
    Ok(rates)
}

// ---------------------------------------------------------------------------
// Symbol-level drivers
// ---------------------------------------------------------------------------

/// Codebook symbol `m` of a common stream: a pseudorandom unit-power complex
/// Gaussian shared by every relay (and every destination's decoder).
fn codebook_symbol(seed: u64, stream: CommonStream, slot: u64) -> Complex64 {
    let tag = match stream {
        CommonStream::A => "codebook/A",
        CommonStream::B => "codebook/B",
    };
    rng::complex_gaussian(&mut rng::stream(seed, tag, slot))
}

/// Stream symbol carrying one bit: the codebook symbol with its sign flipped
/// for a 1 bit.
fn stream_symbol(seed: u64, stream: CommonStream, slot: u64, bit: bool) -> Complex64 {
    let base = codebook_symbol(seed, stream, slot);
    if bit {
        -base
    } else {
        base
    }
}

/// Run the no-cache amplify-forward chain symbol by symbol.
///
/// `S1` and `S3` transmit fresh Gaussian symbols at power `P`; the center
/// relay forwards its previous reception scaled by the amplify gain (slot 0
/// transmits zero: nothing has been received yet); side relays stay silent.
/// With `with_noise` off, all noise terms are zero.
pub fn af_frames(
    ch: &ChannelRealization,
    power: f64,
    seed: u64,
    n_slots: u64,
    with_noise: bool,
) -> Result<Vec<SymbolFrame>, SchemeError> {
    let alpha = amplify_gain(ch, power)?;
    let sqrt_p = libm::sqrt(power);
    let mut frames = Vec::with_capacity(n_slots as usize);
    let mut prev_center_rx = C0;
    for slot in 0..n_slots {
        let draw = |tag: &str| sqrt_p * rng::complex_gaussian(&mut rng::stream(seed, tag, slot));
        let x = [draw("tx/S1"), C0, draw("tx/S3"), C0];

        let mut tx = RelaySignals::zero(ch.variant());
        tx.r2[0] = Complex64::new(alpha, 0.0) * prev_center_rx;

        let relay_z = if with_noise {
            netmodel::relay_noise(ch.variant(), seed, slot)
        } else {
            RelaySignals::zero(ch.variant())
        };
        let dest_z = if with_noise {
            netmodel::dest_noise(seed, slot)
        } else {
            [C0; 4]
        };

        let relay_rx = netmodel::first_hop(ch, &x, &relay_z)?;
        let y = netmodel::second_hop(ch, &tx, &dest_z)?;
        prev_center_rx = relay_rx.r2[0];

        frames.push(SymbolFrame {
            slot,
            x,
            relay_rx,
            relay_tx: tx,
            y,
        });
    }
    Ok(frames)
}

/// Run the cache delivery phase symbol by symbol for `n_slots` slots.
///
/// Stream bits come from the cached XORs (cycled if `n_slots` exceeds the
/// cached length); the relays transmit their weighted combination at power
/// `P`, the sources stay silent.
pub fn cache_frames(
    ch: &ChannelRealization,
    cached: &CachedContent,
    power: f64,
    seed: u64,
    n_slots: u64,
    with_noise: bool,
) -> Result<Vec<SymbolFrame>, SchemeError> {
    check_power(power)?;
    if cached.cached_bits() == 0 {
        return Err(SchemeError::DegenerateChannel {
            detail: String::from("cache delivery needs at least one cached bit"),
        });
    }
    let weights = cache_beamformers(ch)?;
    let gamma = Complex64::new(weights.power_scale(power), 0.0);

    let mut frames = Vec::with_capacity(n_slots as usize);
    for slot in 0..n_slots {
        let bit_index = (slot as usize) % cached.cached_bits();
        let a = stream_symbol(seed, CommonStream::A, slot, cached.w1_xor_w3.get(bit_index));
        let b = stream_symbol(seed, CommonStream::B, slot, cached.w2_xor_w4.get(bit_index));

        let mut tx = RelaySignals::zero(ch.variant());
        tx.r1 = Some(gamma * (weights.r1.on_a * a + weights.r1.on_b * b));
        tx.r2[0] = gamma * (weights.r2.on_a * a + weights.r2.on_b * b);
        tx.r3 = Some(gamma * (weights.r3.on_a * a + weights.r3.on_b * b));

        let x = [C0; 4];
        let relay_z = if with_noise {
            netmodel::relay_noise(ch.variant(), seed, slot)
        } else {
            RelaySignals::zero(ch.variant())
        };
        let dest_z = if with_noise {
            netmodel::dest_noise(seed, slot)
        } else {
            [C0; 4]
        };
        let relay_rx = netmodel::first_hop(ch, &x, &relay_z)?;
        let y = netmodel::second_hop(ch, &tx, &dest_z)?;

        frames.push(SymbolFrame {
            slot,
            x,
            relay_rx,
            relay_tx: tx,
            y,
        });
    }
    Ok(frames)
}

/// Noise-off delivery and decoding of full messages (`p = 1`).
///
/// Each destination decodes its common stream slot by slot from its delivery
/// gain, reassembles the XOR message, and XORs with the message its
/// co-located source holds. Returns the recovered wanted message per
/// destination, in `D1..D4` order.
pub fn cache_decode(
    ch: &ChannelRealization,
    msgs: &MessageSet,
    power: f64,
    seed: u64,
) -> Result<[BitString; 4], SchemeError> {
    let cached = cache_placement(msgs, 1.0)?;
    let gains = cache_delivery_gains(ch)?;
    let weights = cache_beamformers(ch)?;
    let gamma = weights.power_scale(power);
    let len = cached.cached_bits();
    let frames = cache_frames(ch, &cached, power, seed, len as u64, false)?;

    let mut recovered: [BitString; 4] = [
        BitString::zeros(len),
        BitString::zeros(len),
        BitString::zeros(len),
        BitString::zeros(len),
    ];
    for d in Dest::ALL {
        let i = d.index();
        let g = Complex64::new(gamma, 0.0) * gains.desired[i];
        let mut decoded_xor = BitString::zeros(len);
        for (m, frame) in frames.iter().enumerate() {
            let est = frame.y[i] / g;
            let reference = codebook_symbol(seed, stream_of(d), frame.slot);
            let correlation = (est * reference.conj()).re;
            decoded_xor.set(m, correlation < 0.0);
        }
        let side = msgs.message(co_located_source(d));
        recovered[i] = decoded_xor.xor(side);
    }
    Ok(recovered)
}
