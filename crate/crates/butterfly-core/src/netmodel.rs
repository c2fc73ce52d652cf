//! Network model: nodes, topology variants, channel realizations, and the
//! two hop equations.
//!
//! The network has four sources `S1..S4`, three relays `R1..R3`, and four
//! destinations `D1..D4`. There is no direct source-destination link: on the
//! first hop `R1` hears `S1` and `S4`, `R3` hears `S2` and `S3`, and the
//! center relay `R2` hears all four sources; on the second hop `D2` and `D3`
//! hear `R1` and `R2` while `D1` and `D4` hear `R2` and `R3`. Each
//! destination is co-located with the source transmitting in the opposite
//! direction (`D1` with `S3`, `D2` with `S4`, `D3` with `S1`, `D4` with
//! `S2`) and therefore knows that source's message and transmit symbols.
//!
//! Channel coefficients are drawn once per realization with magnitudes
//! strictly inside `(h_min, h_max)` and uniform phases; noise is unit-power
//! circularly symmetric complex Gaussian, regenerated per `(seed, node,
//! slot)`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::bits::BitString;
use crate::rng;

// ---------------------------------------------------------------------------
// Nodes
// ---------------------------------------------------------------------------

/// Source nodes, one per message.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Source {
    S1,
    S2,
    S3,
    S4,
}

impl Source {
    pub const ALL: [Source; 4] = [Source::S1, Source::S2, Source::S3, Source::S4];

    /// Zero-based index (S1 -> 0, ..., S4 -> 3).
    pub fn index(self) -> usize {
        match self {
            Source::S1 => 0,
            Source::S2 => 1,
            Source::S3 => 2,
            Source::S4 => 3,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Source::S1 => "S1",
            Source::S2 => "S2",
            Source::S3 => "S3",
            Source::S4 => "S4",
        }
    }
}

/// Relay nodes; `R2` is the center relay and may carry multiple antennas.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Relay {
    R1,
    R2,
    R3,
}

impl Relay {
    pub const ALL: [Relay; 3] = [Relay::R1, Relay::R2, Relay::R3];

    pub fn tag(self) -> &'static str {
        match self {
            Relay::R1 => "R1",
            Relay::R2 => "R2",
            Relay::R3 => "R3",
        }
    }
}

/// Destination nodes, one per wanted message.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Dest {
    D1,
    D2,
    D3,
    D4,
}

impl Dest {
    pub const ALL: [Dest; 4] = [Dest::D1, Dest::D2, Dest::D3, Dest::D4];

    /// Zero-based index (D1 -> 0, ..., D4 -> 3).
    pub fn index(self) -> usize {
        match self {
            Dest::D1 => 0,
            Dest::D2 => 1,
            Dest::D3 => 2,
            Dest::D4 => 3,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Dest::D1 => "D1",
            Dest::D2 => "D2",
            Dest::D3 => "D3",
            Dest::D4 => "D4",
        }
    }
}

/// Any node in the network, for link lists and cut definitions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Node {
    Src(Source),
    Rel(Relay),
    Dst(Dest),
}

impl Node {
    pub fn tag(self) -> &'static str {
        match self {
            Node::Src(s) => s.tag(),
            Node::Rel(r) => r.tag(),
            Node::Dst(d) => d.tag(),
        }
    }
}

/// The source co-located with (and fully known to) destination `d`.
pub fn co_located_source(d: Dest) -> Source {
    match d {
        Dest::D1 => Source::S3,
        Dest::D2 => Source::S4,
        Dest::D3 => Source::S1,
        Dest::D4 => Source::S2,
    }
}

/// The destination sitting at source `s`'s site (inverse of
/// [`co_located_source`]).
pub fn co_located_dest(s: Source) -> Dest {
    match s {
        Source::S1 => Dest::D3,
        Source::S2 => Dest::D4,
        Source::S3 => Dest::D1,
        Source::S4 => Dest::D2,
    }
}

/// The source whose message destination `d` wants (same index).
pub fn intended_source(d: Dest) -> Source {
    match d {
        Dest::D1 => Source::S1,
        Dest::D2 => Source::S2,
        Dest::D3 => Source::S3,
        Dest::D4 => Source::S4,
    }
}

// ---------------------------------------------------------------------------
// Topology
// ---------------------------------------------------------------------------

/// Which physical layout a realization describes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TopologyVariant {
    /// All three relays present, every relay has one antenna.
    SingleAntennaRelay,
    /// All three relays present, center relay has `n` antennas.
    MultiAntennaRelay(usize),
    /// Side relays removed; only the `n`-antenna center relay remains.
    MultiAntennaRelayOnly(usize),
}

impl TopologyVariant {
    /// Antenna count at the center relay `R2`.
    pub fn center_antennas(self) -> usize {
        match self {
            TopologyVariant::SingleAntennaRelay => 1,
            TopologyVariant::MultiAntennaRelay(n) => n,
            TopologyVariant::MultiAntennaRelayOnly(n) => n,
        }
    }

    /// Whether the side relays `R1` and `R3` exist in this layout.
    pub fn has_side_relays(self) -> bool {
        !matches!(self, TopologyVariant::MultiAntennaRelayOnly(_))
    }
}

/// A topology variant together with its node and link sets.
#[derive(Clone, Copy, Debug)]
pub struct Topology {
    pub variant: TopologyVariant,
}

impl Topology {
    pub fn new(variant: TopologyVariant) -> Self {
        Topology { variant }
    }

    /// Every node present in this layout.
    pub fn nodes(&self) -> Vec<Node> {
        let mut nodes = Vec::new();
        nodes.extend(Source::ALL.map(Node::Src));
        if self.variant.has_side_relays() {
            nodes.push(Node::Rel(Relay::R1));
        }
        nodes.push(Node::Rel(Relay::R2));
        if self.variant.has_side_relays() {
            nodes.push(Node::Rel(Relay::R3));
        }
        nodes.extend(Dest::ALL.map(Node::Dst));
        nodes
    }

    /// Directed links, first hop then second hop.
    pub fn links(&self) -> Vec<(Node, Node)> {
        let mut links = Vec::new();
        if self.variant.has_side_relays() {
            links.push((Node::Src(Source::S1), Node::Rel(Relay::R1)));
            links.push((Node::Src(Source::S4), Node::Rel(Relay::R1)));
        }
        for s in Source::ALL {
            links.push((Node::Src(s), Node::Rel(Relay::R2)));
        }
        if self.variant.has_side_relays() {
            links.push((Node::Src(Source::S2), Node::Rel(Relay::R3)));
            links.push((Node::Src(Source::S3), Node::Rel(Relay::R3)));
        }
        if self.variant.has_side_relays() {
            links.push((Node::Rel(Relay::R1), Node::Dst(Dest::D2)));
            links.push((Node::Rel(Relay::R1), Node::Dst(Dest::D3)));
        }
        for d in Dest::ALL {
            links.push((Node::Rel(Relay::R2), Node::Dst(d)));
        }
        if self.variant.has_side_relays() {
            links.push((Node::Rel(Relay::R3), Node::Dst(Dest::D1)));
            links.push((Node::Rel(Relay::R3), Node::Dst(Dest::D4)));
        }
        links
    }
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Failure modes of model construction and hop evaluation.
#[derive(Clone, PartialEq, Debug)]
pub enum ModelError {
    /// Channel magnitude bounds must satisfy `0 < h_min < h_max`, both finite.
    InvalidBounds { h_min: f64, h_max: f64 },
    /// The center relay needs at least one antenna.
    InvalidAntennas { n: usize },
    /// A signal or noise container does not match the topology's shape.
    ShapeMismatch(&'static str),
    /// A supplied coefficient was not a finite complex number.
    NonFiniteCoefficient { link: String },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidBounds { h_min, h_max } => {
                write!(f, "invalid magnitude bounds: need 0 < h_min < h_max, got ({h_min}, {h_max})")
            }
            ModelError::InvalidAntennas { n } => {
                write!(f, "center relay needs at least 1 antenna, got {n}")
            }
            ModelError::ShapeMismatch(what) => write!(f, "shape mismatch: {what}"),
            ModelError::NonFiniteCoefficient { link } => {
                write!(f, "non-finite coefficient on link {link}")
            }
        }
    }
}

impl core::error::Error for ModelError {}

// ---------------------------------------------------------------------------
// Channel realization
// ---------------------------------------------------------------------------

/// Scalar coefficients of every side-relay link.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct SideChannels {
    pub s1_r1: Complex64,
    pub s4_r1: Complex64,
    pub s2_r3: Complex64,
    pub s3_r3: Complex64,
    pub r1_d2: Complex64,
    pub r1_d3: Complex64,
    pub r3_d1: Complex64,
    pub r3_d4: Complex64,
}

/// One drawn set of channel coefficients for a topology.
///
/// Immutable after construction. Links absent from the topology are
/// structurally unrepresentable (`side` is `None` when the layout has no side
/// relays) and are never read by the hop equations.
#[derive(Clone, PartialEq, Debug)]
pub struct ChannelRealization {
    variant: TopologyVariant,
    seed: u64,
    h_min: f64,
    h_max: f64,
    /// `to_r2[i]`: length-n vector of gains from source i into R2's antennas.
    to_r2: [Vec<Complex64>; 4],
    /// `from_r2[d]`: length-n vector of gains from R2's antennas to dest d.
    from_r2: [Vec<Complex64>; 4],
    side: Option<SideChannels>,
}

fn check_bounds(h_min: f64, h_max: f64) -> Result<(), ModelError> {
    if !(h_min.is_finite() && h_max.is_finite() && h_min > 0.0 && h_min < h_max) {
        return Err(ModelError::InvalidBounds { h_min, h_max });
    }
    Ok(())
}

fn check_antennas(variant: TopologyVariant) -> Result<usize, ModelError> {
    let n = variant.center_antennas();
    if n == 0 {
        return Err(ModelError::InvalidAntennas { n });
    }
    Ok(n)
}

/// One coefficient with magnitude strictly inside `(h_min, h_max)` and
/// uniform phase, from the per-link stream `(seed, "ch/<link>", antenna)`.
fn draw_coefficient(seed: u64, link: &str, antenna: u64, h_min: f64, h_max: f64) -> Complex64 {
    let mut rng = rng::stream(seed, link, antenna);
    let mag = h_min + rng::uniform_open(&mut rng) * (h_max - h_min);
    let phase = 2.0 * core::f64::consts::PI * rng::uniform_open(&mut rng);
    Complex64::new(mag * libm::cos(phase), mag * libm::sin(phase))
}

/// Draw a fresh channel realization.
///
/// Coefficients come from independent per-link streams, so two variants that
/// share a link (for example the 3-antenna layouts with and without side
/// relays) draw identical values for it under the same seed.
pub fn sample_channels(
    topology: Topology,
    seed: u64,
    h_min: f64,
    h_max: f64,
) -> Result<ChannelRealization, ModelError> {
    check_bounds(h_min, h_max)?;
    let n = check_antennas(topology.variant)?;

    let draw_vec = |link: String| -> Vec<Complex64> {
        (0..n)
            .map(|j| draw_coefficient(seed, &link, j as u64, h_min, h_max))
            .collect()
    };
    let to_r2 = [
        draw_vec(String::from("ch/S1->R2")),
        draw_vec(String::from("ch/S2->R2")),
        draw_vec(String::from("ch/S3->R2")),
        draw_vec(String::from("ch/S4->R2")),
    ];
    let from_r2 = [
        draw_vec(String::from("ch/R2->D1")),
        draw_vec(String::from("ch/R2->D2")),
        draw_vec(String::from("ch/R2->D3")),
        draw_vec(String::from("ch/R2->D4")),
    ];
    let side = if topology.variant.has_side_relays() {
        let scalar = |link: &str| draw_coefficient(seed, link, 0, h_min, h_max);
        Some(SideChannels {
            s1_r1: scalar("ch/S1->R1"),
            s4_r1: scalar("ch/S4->R1"),
            s2_r3: scalar("ch/S2->R3"),
            s3_r3: scalar("ch/S3->R3"),
            r1_d2: scalar("ch/R1->D2"),
            r1_d3: scalar("ch/R1->D3"),
            r3_d1: scalar("ch/R3->D1"),
            r3_d4: scalar("ch/R3->D4"),
        })
    } else {
        None
    };

    Ok(ChannelRealization {
        variant: topology.variant,
        seed,
        h_min,
        h_max,
        to_r2,
        from_r2,
        side,
    })
}

impl ChannelRealization {
    /// Assemble a realization from explicit coefficients (deserialization,
    /// hand-built test channels). Validates shapes and finiteness; magnitude
    /// bounds are a property of sampling, not of assembly, so deliberately
    /// degenerate coefficient sets are representable.
    pub fn from_parts(
        variant: TopologyVariant,
        seed: u64,
        h_min: f64,
        h_max: f64,
        to_r2: [Vec<Complex64>; 4],
        from_r2: [Vec<Complex64>; 4],
        side: Option<SideChannels>,
    ) -> Result<Self, ModelError> {
        check_bounds(h_min, h_max)?;
        let n = check_antennas(variant)?;
        for (name, vecs) in [("source->R2", &to_r2), ("R2->destination", &from_r2)] {
            for v in vecs.iter() {
                if v.len() != n {
                    return Err(ModelError::ShapeMismatch(match name {
                        "source->R2" => "source->R2 vector length differs from antenna count",
                        _ => "R2->destination vector length differs from antenna count",
                    }));
                }
                for z in v {
                    if !(z.re.is_finite() && z.im.is_finite()) {
                        return Err(ModelError::NonFiniteCoefficient {
                            link: String::from(name),
                        });
                    }
                }
            }
        }
        match (variant.has_side_relays(), &side) {
            (true, None) => {
                return Err(ModelError::ShapeMismatch(
                    "topology has side relays but no side coefficients were given",
                ))
            }
            (false, Some(_)) => {
                return Err(ModelError::ShapeMismatch(
                    "topology has no side relays but side coefficients were given",
                ))
            }
            _ => {}
        }
        if let Some(s) = &side {
            for (link, z) in [
                ("S1->R1", s.s1_r1),
                ("S4->R1", s.s4_r1),
                ("S2->R3", s.s2_r3),
                ("S3->R3", s.s3_r3),
                ("R1->D2", s.r1_d2),
                ("R1->D3", s.r1_d3),
                ("R3->D1", s.r3_d1),
                ("R3->D4", s.r3_d4),
            ] {
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(ModelError::NonFiniteCoefficient {
                        link: String::from(link),
                    });
                }
            }
        }
        Ok(ChannelRealization {
            variant,
            seed,
            h_min,
            h_max,
            to_r2,
            from_r2,
            side,
        })
    }

    pub fn variant(&self) -> TopologyVariant {
        self.variant
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn center_antennas(&self) -> usize {
        self.variant.center_antennas()
    }

    /// Gain vector from source `s` into R2's antennas.
    pub fn to_r2(&self, s: Source) -> &[Complex64] {
        &self.to_r2[s.index()]
    }

    /// Gain vector from R2's antennas to destination `d`.
    pub fn from_r2(&self, d: Dest) -> &[Complex64] {
        &self.from_r2[d.index()]
    }

    /// Scalar `S -> R2` gain; panics unless the center relay has one antenna.
    pub fn to_r2_scalar(&self, s: Source) -> Complex64 {
        assert_eq!(self.center_antennas(), 1, "scalar accessor on multi-antenna relay");
        self.to_r2[s.index()][0]
    }

    /// Scalar `R2 -> D` gain; panics unless the center relay has one antenna.
    pub fn from_r2_scalar(&self, d: Dest) -> Complex64 {
        assert_eq!(self.center_antennas(), 1, "scalar accessor on multi-antenna relay");
        self.from_r2[d.index()][0]
    }

    /// Side-relay coefficients, when the topology has side relays.
    pub fn side(&self) -> Option<&SideChannels> {
        self.side.as_ref()
    }
}

// ---------------------------------------------------------------------------
// Hop equations
// ---------------------------------------------------------------------------

/// One complex sample per relay: what the relays hear, or what they transmit.
///
/// `r1`/`r3` are `None` exactly when the topology has no side relays; `r2`
/// holds one entry per center-relay antenna.
#[derive(Clone, PartialEq, Debug)]
pub struct RelaySignals {
    pub r1: Option<Complex64>,
    pub r2: Vec<Complex64>,
    pub r3: Option<Complex64>,
}

impl RelaySignals {
    /// All-zero signals shaped for `variant`.
    pub fn zero(variant: TopologyVariant) -> Self {
        let side = if variant.has_side_relays() {
            Some(Complex64::new(0.0, 0.0))
        } else {
            None
        };
        RelaySignals {
            r1: side,
            r2: vec![Complex64::new(0.0, 0.0); variant.center_antennas()],
            r3: side,
        }
    }

    fn check_shape(&self, variant: TopologyVariant) -> Result<(), ModelError> {
        if self.r2.len() != variant.center_antennas() {
            return Err(ModelError::ShapeMismatch(
                "center-relay signal length differs from antenna count",
            ));
        }
        let want_side = variant.has_side_relays();
        if (self.r1.is_some() != want_side) || (self.r3.is_some() != want_side) {
            return Err(ModelError::ShapeMismatch(
                "side-relay signals must be present exactly when the topology has side relays",
            ));
        }
        Ok(())
    }
}

/// What each relay receives when the sources transmit `x` under noise `noise`.
///
/// `x[i]` is source `S(i+1)`'s symbol. Silent sources are zeros in `x`;
/// absent links contribute nothing by construction.
pub fn first_hop(
    ch: &ChannelRealization,
    x: &[Complex64; 4],
    noise: &RelaySignals,
) -> Result<RelaySignals, ModelError> {
    noise.check_shape(ch.variant)?;
    let n = ch.center_antennas();
    let mut r2 = vec![Complex64::new(0.0, 0.0); n];
    for (i, xi) in x.iter().enumerate() {
        for (j, r) in r2.iter_mut().enumerate() {
            *r += ch.to_r2[i][j] * xi;
        }
    }
    for (j, r) in r2.iter_mut().enumerate() {
        *r += noise.r2[j];
    }
    let (r1, r3) = match ch.side() {
        Some(s) => (
            Some(s.s1_r1 * x[0] + s.s4_r1 * x[3] + noise.r1.unwrap()),
            Some(s.s2_r3 * x[1] + s.s3_r3 * x[2] + noise.r3.unwrap()),
        ),
        None => (None, None),
    };
    Ok(RelaySignals { r1, r2, r3 })
}

/// What each destination receives when the relays transmit `tx` under
/// per-destination noise `noise`.
///
/// `D2`/`D3` hear `R1` and `R2`; `D1`/`D4` hear `R2` and `R3`.
pub fn second_hop(
    ch: &ChannelRealization,
    tx: &RelaySignals,
    noise: &[Complex64; 4],
) -> Result<[Complex64; 4], ModelError> {
    tx.check_shape(ch.variant)?;
    let from_center = |d: Dest| -> Complex64 {
        ch.from_r2[d.index()]
            .iter()
            .zip(&tx.r2)
            .map(|(h, x)| h * x)
            .sum()
    };
    let mut y = [
        from_center(Dest::D1),
        from_center(Dest::D2),
        from_center(Dest::D3),
        from_center(Dest::D4),
    ];
    if let Some(s) = ch.side() {
        let x_r1 = tx.r1.unwrap();
        let x_r3 = tx.r3.unwrap();
        y[Dest::D1.index()] += s.r3_d1 * x_r3;
        y[Dest::D2.index()] += s.r1_d2 * x_r1;
        y[Dest::D3.index()] += s.r1_d3 * x_r1;
        y[Dest::D4.index()] += s.r3_d4 * x_r3;
    }
    for (yi, zi) in y.iter_mut().zip(noise) {
        *yi += zi;
    }
    Ok(y)
}

/// Unit-power complex Gaussian noise at the relays for `(seed, slot)`, one
/// stream per node so any slot can be regenerated independently.
pub fn relay_noise(variant: TopologyVariant, seed: u64, slot: u64) -> RelaySignals {
    let mut center = rng::stream(seed, "noise/R2", slot);
    let r2 = (0..variant.center_antennas())
        .map(|_| rng::complex_gaussian(&mut center))
        .collect();
    let (r1, r3) = if variant.has_side_relays() {
        (
            Some(rng::complex_gaussian(&mut rng::stream(seed, "noise/R1", slot))),
            Some(rng::complex_gaussian(&mut rng::stream(seed, "noise/R3", slot))),
        )
    } else {
        (None, None)
    };
    RelaySignals { r1, r2, r3 }
}

/// Unit-power complex Gaussian noise at the four destinations for
/// `(seed, slot)`.
pub fn dest_noise(seed: u64, slot: u64) -> [Complex64; 4] {
    let draw = |tag: &str| rng::complex_gaussian(&mut rng::stream(seed, tag, slot));
    [
        draw("noise/D1"),
        draw("noise/D2"),
        draw("noise/D3"),
        draw("noise/D4"),
    ]
}

// ---------------------------------------------------------------------------
// Messages and frames
// ---------------------------------------------------------------------------

/// One message per source, all the same length.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MessageSet {
    msgs: [BitString; 4],
}

impl MessageSet {
    /// Draw four independent uniform messages of `len_bits` bits each.
    pub fn random(len_bits: usize, seed: u64) -> Self {
        let draw = |tag: &str| BitString::random(len_bits, &mut rng::stream(seed, tag, 0));
        MessageSet {
            msgs: [
                draw("msg/S1"),
                draw("msg/S2"),
                draw("msg/S3"),
                draw("msg/S4"),
            ],
        }
    }

    /// Build from explicit messages; all four must share one length.
    pub fn from_messages(msgs: [BitString; 4]) -> Result<Self, ModelError> {
        let len = msgs[0].len();
        if msgs.iter().any(|m| m.len() != len) {
            return Err(ModelError::ShapeMismatch("messages must share one bit length"));
        }
        Ok(MessageSet { msgs })
    }

    pub fn len_bits(&self) -> usize {
        self.msgs[0].len()
    }

    /// Source `s`'s message.
    pub fn message(&self, s: Source) -> &BitString {
        &self.msgs[s.index()]
    }
}

/// Everything that happened in one slot of a symbol-level run.
#[derive(Clone, Debug)]
pub struct SymbolFrame {
    pub slot: u64,
    /// Transmitted source symbols, `x[i]` for `S(i+1)`.
    pub x: [Complex64; 4],
    /// What the relays heard this slot.
    pub relay_rx: RelaySignals,
    /// What the relays transmitted this slot.
    pub relay_tx: RelaySignals,
    /// What the destinations heard this slot.
    pub y: [Complex64; 4],
}

#[cfg(test)]
mod tests {
    use super::*;

    const C0: Complex64 = Complex64::new(0.0, 0.0);

    fn single(seed: u64) -> ChannelRealization {
        sample_channels(Topology::new(TopologyVariant::SingleAntennaRelay), seed, 0.5, 2.0)
            .expect("sampling must succeed for valid bounds")
    }

    #[test]
    fn co_location_tables_are_consistent() {
        for d in Dest::ALL {
            assert_eq!(co_located_dest(co_located_source(d)), d);
        }
        for s in Source::ALL {
            assert_eq!(co_located_source(co_located_dest(s)), s);
        }
        // Intended source and co-located source are always different nodes:
        // a destination never "wants" the message it already holds.
        for d in Dest::ALL {
            assert_ne!(intended_source(d), co_located_source(d));
        }
    }

    #[test]
    fn link_sets_match_the_layout() {
        let full = Topology::new(TopologyVariant::SingleAntennaRelay);
        assert_eq!(full.links().len(), 16, "4+4 first hop, 4+4 second hop");
        assert_eq!(full.nodes().len(), 11);

        let only = Topology::new(TopologyVariant::MultiAntennaRelayOnly(3));
        assert_eq!(only.links().len(), 8, "only the center relay's links remain");
        assert!(only
            .links()
            .iter()
            .all(|(a, b)| *a == Node::Rel(Relay::R2) || *b == Node::Rel(Relay::R2)));
    }

    #[test]
    fn sampled_magnitudes_stay_strictly_inside_bounds() {
        for seed in 0..50 {
            let ch = single(seed);
            let mut mags: Vec<f64> = Vec::new();
            for s in Source::ALL {
                mags.push(ch.to_r2_scalar(s).norm_sqr().sqrt());
            }
            for d in Dest::ALL {
                mags.push(ch.from_r2_scalar(d).norm_sqr().sqrt());
            }
            let side = ch.side().expect("single-antenna topology has side relays");
            for z in [
                side.s1_r1, side.s4_r1, side.s2_r3, side.s3_r3, side.r1_d2, side.r1_d3,
                side.r3_d1, side.r3_d4,
            ] {
                mags.push(z.norm_sqr().sqrt());
            }
            for m in mags {
                assert!(m > 0.5 && m < 2.0, "seed {seed}: magnitude {m} left (0.5, 2.0)");
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        assert_eq!(single(9), single(9));
        assert_ne!(single(9), single(10));
    }

    #[test]
    fn shared_links_sample_identically_across_variants() {
        // The 3-antenna layouts with and without side relays must draw the
        // same center-relay coefficients for the same seed.
        let with = sample_channels(Topology::new(TopologyVariant::MultiAntennaRelay(3)), 4, 0.5, 2.0)
            .unwrap();
        let without =
            sample_channels(Topology::new(TopologyVariant::MultiAntennaRelayOnly(3)), 4, 0.5, 2.0)
                .unwrap();
        for s in Source::ALL {
            assert_eq!(with.to_r2(s), without.to_r2(s));
        }
        for d in Dest::ALL {
            assert_eq!(with.from_r2(d), without.from_r2(d));
        }
        assert!(without.side().is_none());
    }

    #[test]
    fn invalid_bounds_and_antenna_counts_are_rejected() {
        let topo = Topology::new(TopologyVariant::SingleAntennaRelay);
        for (lo, hi) in [(0.0, 2.0), (-1.0, 2.0), (2.0, 0.5), (1.0, 1.0), (0.5, f64::INFINITY)] {
            assert!(
                matches!(sample_channels(topo, 1, lo, hi), Err(ModelError::InvalidBounds { .. })),
                "bounds ({lo}, {hi}) must be rejected"
            );
        }
        let zero = Topology::new(TopologyVariant::MultiAntennaRelay(0));
        assert!(matches!(
            sample_channels(zero, 1, 0.5, 2.0),
            Err(ModelError::InvalidAntennas { n: 0 })
        ));
    }

    #[test]
    fn first_hop_matches_writing_out_the_sums() {
        let ch = single(21);
        let x = [
            Complex64::new(1.0, -0.5),
            Complex64::new(0.25, 2.0),
            Complex64::new(-1.5, 0.75),
            Complex64::new(0.5, 0.5),
        ];
        let mut noise = RelaySignals::zero(ch.variant());
        noise.r1 = Some(Complex64::new(0.1, 0.2));
        noise.r2[0] = Complex64::new(-0.3, 0.05);
        noise.r3 = Some(Complex64::new(0.0, -0.4));

        let rx = first_hop(&ch, &x, &noise).unwrap();
        let s = ch.side().unwrap();

        let want_r1 = s.s1_r1 * x[0] + s.s4_r1 * x[3] + noise.r1.unwrap();
        let want_r2 = ch.to_r2_scalar(Source::S1) * x[0]
            + ch.to_r2_scalar(Source::S2) * x[1]
            + ch.to_r2_scalar(Source::S3) * x[2]
            + ch.to_r2_scalar(Source::S4) * x[3]
            + noise.r2[0];
        let want_r3 = s.s2_r3 * x[1] + s.s3_r3 * x[2] + noise.r3.unwrap();

        assert!((rx.r1.unwrap() - want_r1).norm_sqr() < 1e-24);
        assert!((rx.r2[0] - want_r2).norm_sqr() < 1e-24);
        assert!((rx.r3.unwrap() - want_r3).norm_sqr() < 1e-24);
    }

    #[test]
    fn second_hop_matches_writing_out_the_sums() {
        let ch = single(22);
        let mut tx = RelaySignals::zero(ch.variant());
        tx.r1 = Some(Complex64::new(0.7, -0.1));
        tx.r2[0] = Complex64::new(-0.2, 0.9);
        tx.r3 = Some(Complex64::new(1.1, 0.3));
        let noise = [
            Complex64::new(0.01, 0.0),
            Complex64::new(0.0, 0.02),
            Complex64::new(-0.03, 0.0),
            Complex64::new(0.0, -0.04),
        ];

        let y = second_hop(&ch, &tx, &noise).unwrap();
        let s = ch.side().unwrap();
        let x_r1 = tx.r1.unwrap();
        let x_r2 = tx.r2[0];
        let x_r3 = tx.r3.unwrap();

        let want = [
            ch.from_r2_scalar(Dest::D1) * x_r2 + s.r3_d1 * x_r3 + noise[0],
            ch.from_r2_scalar(Dest::D2) * x_r2 + s.r1_d2 * x_r1 + noise[1],
            ch.from_r2_scalar(Dest::D3) * x_r2 + s.r1_d3 * x_r1 + noise[2],
            ch.from_r2_scalar(Dest::D4) * x_r2 + s.r3_d4 * x_r3 + noise[3],
        ];
        for (got, want) in y.iter().zip(&want) {
            assert!((got - want).norm_sqr() < 1e-24);
        }
    }

    #[test]
    fn hops_are_linear_in_the_inputs() {
        let ch = single(23);
        let zero = RelaySignals::zero(ch.variant());
        let a = Complex64::new(0.6, -1.2);
        let b = Complex64::new(-0.4, 0.3);
        let x1 = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.5, 0.5),
            Complex64::new(-1.0, 0.25),
        ];
        let x2 = [
            Complex64::new(0.2, 0.2),
            Complex64::new(-0.7, 0.0),
            Complex64::new(0.0, -0.9),
            Complex64::new(0.4, 1.0),
        ];

        let mut combined = [C0; 4];
        for i in 0..4 {
            combined[i] = a * x1[i] + b * x2[i];
        }
        let lhs = first_hop(&ch, &combined, &zero).unwrap();
        let f1 = first_hop(&ch, &x1, &zero).unwrap();
        let f2 = first_hop(&ch, &x2, &zero).unwrap();

        let close = |p: Complex64, q: Complex64| (p - q).norm_sqr().sqrt() < 1e-12;
        assert!(close(lhs.r1.unwrap(), a * f1.r1.unwrap() + b * f2.r1.unwrap()));
        assert!(close(lhs.r2[0], a * f1.r2[0] + b * f2.r2[0]));
        assert!(close(lhs.r3.unwrap(), a * f1.r3.unwrap() + b * f2.r3.unwrap()));

        let mut t1 = RelaySignals::zero(ch.variant());
        t1.r1 = Some(Complex64::new(0.3, 0.1));
        t1.r2[0] = Complex64::new(1.0, -0.5);
        t1.r3 = Some(Complex64::new(-0.2, 0.8));
        let mut t2 = RelaySignals::zero(ch.variant());
        t2.r1 = Some(Complex64::new(-0.6, 0.0));
        t2.r2[0] = Complex64::new(0.0, 0.7);
        t2.r3 = Some(Complex64::new(0.5, 0.5));
        let mut tc = RelaySignals::zero(ch.variant());
        tc.r1 = Some(a * t1.r1.unwrap() + b * t2.r1.unwrap());
        tc.r2[0] = a * t1.r2[0] + b * t2.r2[0];
        tc.r3 = Some(a * t1.r3.unwrap() + b * t2.r3.unwrap());

        let zn = [C0; 4];
        let y = second_hop(&ch, &tc, &zn).unwrap();
        let y1 = second_hop(&ch, &t1, &zn).unwrap();
        let y2 = second_hop(&ch, &t2, &zn).unwrap();
        for i in 0..4 {
            assert!(close(y[i], a * y1[i] + b * y2[i]), "destination {i} broke linearity");
        }
    }

    #[test]
    fn silent_sources_leak_nothing() {
        // Two realizations that differ only in the links incident to S2 and
        // S4 must produce identical relay receptions when S2 and S4 are
        // silent.
        let base = single(31);
        let mut to_r2 = [
            base.to_r2[0].clone(),
            base.to_r2[1].clone(),
            base.to_r2[2].clone(),
            base.to_r2[3].clone(),
        ];
        to_r2[Source::S2.index()] = vec![Complex64::new(1.9, 0.1)];
        to_r2[Source::S4.index()] = vec![Complex64::new(-0.3, 1.4)];
        let mut side = *base.side().unwrap();
        side.s4_r1 = Complex64::new(0.9, -0.9);
        side.s2_r3 = Complex64::new(-1.2, 0.2);
        let altered = ChannelRealization::from_parts(
            base.variant(),
            base.seed(),
            base.h_min(),
            base.h_max(),
            to_r2,
            base.from_r2.clone(),
            Some(side),
        )
        .unwrap();

        let x = [Complex64::new(0.8, -0.6), C0, Complex64::new(-1.1, 0.4), C0];
        let zero = RelaySignals::zero(base.variant());
        let rx_base = first_hop(&base, &x, &zero).unwrap();
        let rx_alt = first_hop(&altered, &x, &zero).unwrap();
        assert_eq!(rx_base, rx_alt, "silent sources must contribute exactly zero");
    }

    #[test]
    fn hop_shape_mismatches_are_rejected() {
        let ch = single(41);
        let x = [C0; 4];
        let bad_center = RelaySignals {
            r1: Some(C0),
            r2: vec![C0, C0],
            r3: Some(C0),
        };
        assert!(matches!(
            first_hop(&ch, &x, &bad_center),
            Err(ModelError::ShapeMismatch(_))
        ));
        let missing_side = RelaySignals {
            r1: None,
            r2: vec![C0],
            r3: None,
        };
        assert!(matches!(
            second_hop(&ch, &missing_side, &[C0; 4]),
            Err(ModelError::ShapeMismatch(_))
        ));

        let only =
            sample_channels(Topology::new(TopologyVariant::MultiAntennaRelayOnly(2)), 1, 0.5, 2.0)
                .unwrap();
        let with_side = RelaySignals {
            r1: Some(C0),
            r2: vec![C0, C0],
            r3: Some(C0),
        };
        assert!(matches!(
            first_hop(&only, &x, &with_side),
            Err(ModelError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn from_parts_validates_side_presence_and_shapes() {
        let base = single(51);
        let no_side = ChannelRealization::from_parts(
            TopologyVariant::SingleAntennaRelay,
            0,
            0.5,
            2.0,
            base.to_r2.clone(),
            base.from_r2.clone(),
            None,
        );
        assert!(matches!(no_side, Err(ModelError::ShapeMismatch(_))));

        let wrong_len = ChannelRealization::from_parts(
            TopologyVariant::MultiAntennaRelay(3),
            0,
            0.5,
            2.0,
            base.to_r2.clone(),
            base.from_r2.clone(),
            base.side().copied(),
        );
        assert!(matches!(wrong_len, Err(ModelError::ShapeMismatch(_))));

        let mut bad = base.to_r2.clone();
        bad[0][0] = Complex64::new(f64::NAN, 0.0);
        let non_finite = ChannelRealization::from_parts(
            TopologyVariant::SingleAntennaRelay,
            0,
            0.5,
            2.0,
            bad,
            base.from_r2.clone(),
            base.side().copied(),
        );
        assert!(matches!(non_finite, Err(ModelError::NonFiniteCoefficient { .. })));
    }

    #[test]
    fn noise_streams_are_deterministic_and_slot_addressable() {
        let v = TopologyVariant::SingleAntennaRelay;
        assert_eq!(relay_noise(v, 5, 100), relay_noise(v, 5, 100));
        assert_ne!(relay_noise(v, 5, 100), relay_noise(v, 5, 101));
        assert_ne!(relay_noise(v, 5, 100), relay_noise(v, 6, 100));
        assert_eq!(dest_noise(5, 7), dest_noise(5, 7));
        // Slot 10^6 is reachable without generating earlier slots; just
        // confirm it returns finite values.
        let far = relay_noise(v, 5, 1_000_000);
        assert!(far.r2[0].re.is_finite());
    }

    #[test]
    fn message_sets_share_length_and_are_seeded() {
        let m = MessageSet::random(64, 3);
        assert_eq!(m.len_bits(), 64);
        assert_eq!(m, MessageSet::random(64, 3));
        assert_ne!(m, MessageSet::random(64, 4));
        let uneven = MessageSet::from_messages([
            BitString::zeros(8),
            BitString::zeros(8),
            BitString::zeros(9),
            BitString::zeros(8),
        ]);
        assert!(matches!(uneven, Err(ModelError::ShapeMismatch(_))));
    }
}
