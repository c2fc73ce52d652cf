//! Rate and SINR computation, DoF slope estimation over power sweeps, the
//! genie-aided cutset outer bound, and Monte Carlo verification of the
//! interference cancellations.
//!
//! The degrees-of-freedom figure is measured, not assumed: a scheme is run
//! across a power sweep, per-user rates are fit against `log2(P)` by least
//! squares, and the slope is the evidence. The outer bound comes from a
//! genie argument: give each side of a cut all messages originating there,
//! and whatever crosses must fit through the bridging relays, so the rank
//! of the channel into and out of the bridge caps the sum DoF per
//! direction.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::beamform::{self, BeamformError};
use crate::linalg::{self, CMat};
use crate::netmodel::{
    self, ChannelRealization, Dest, ModelError, Node, Relay, Source, Topology, TopologyVariant,
};
use crate::rng;
use crate::schemes::{self, Scheme, SchemeError, SchemeReport};

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Relative rank tolerance, shared with the beamforming solver.
pub const RANK_TOL: f64 = beamform::RANK_TOL;

/// Least-squares fits only use powers at or above this (DoF is a high-SNR
/// slope; low-power points bias it).
pub const FIT_MIN_POWER: f64 = 1e4;

/// Minimum power span of a usable sweep, in dB.
pub const FIT_MIN_SPAN_DB: f64 = 40.0;

/// How many deterministic resampling attempts a degenerate channel draw
/// gets before the run is abandoned.
pub const MAX_RESAMPLES: u32 = 16;

/// Failure modes of the analysis layer.
#[derive(Clone, PartialEq, Debug)]
pub enum AnalysisError {
    /// An input left the numeric domain (negative noise power, nonpositive
    /// transmit power, non-finite value).
    Numeric { detail: String },
    /// The sweep cannot support a slope estimate.
    Estimation { detail: String },
    /// The proposed cut does not separate the network at the bridge.
    InvalidCut { detail: String },
    /// Every resampling attempt hit a degenerate channel.
    ResamplingExhausted { attempts: u32 },
    /// A scheme failed underneath.
    Scheme(SchemeError),
    /// A model operation failed underneath.
    Model(ModelError),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::Numeric { detail } => write!(f, "numeric error: {detail}"),
            AnalysisError::Estimation { detail } => write!(f, "estimation error: {detail}"),
            AnalysisError::InvalidCut { detail } => write!(f, "invalid cut: {detail}"),
            AnalysisError::ResamplingExhausted { attempts } => {
                write!(f, "still degenerate after {attempts} resampling attempts")
            }
            AnalysisError::Scheme(e) => write!(f, "{e}"),
            AnalysisError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for AnalysisError {}

impl From<SchemeError> for AnalysisError {
    fn from(e: SchemeError) -> Self {
        AnalysisError::Scheme(e)
    }
}

impl From<ModelError> for AnalysisError {
    fn from(e: ModelError) -> Self {
        AnalysisError::Model(e)
    }
}

// ---------------------------------------------------------------------------
// SINR and rate
// ---------------------------------------------------------------------------

/// Signal-to-interference-plus-noise ratio of one decoded stream:
/// `|g|^2 P_eff / (sum_j |r_j|^2 P_eff + noise_amp + 1)`, the trailing 1
/// being the destination's own unit-variance noise.
pub fn sinr(
    desired_gain: Complex64,
    residual_gains: &[Complex64],
    noise_amp: f64,
    p_eff: f64,
) -> Result<f64, AnalysisError> {
    if !noise_amp.is_finite() || noise_amp < 0.0 {
        return Err(AnalysisError::Numeric {
            detail: format!("noise amplification {noise_amp} must be finite and nonnegative"),
        });
    }
    if !p_eff.is_finite() || p_eff <= 0.0 {
        return Err(AnalysisError::Numeric {
            detail: format!("effective power {p_eff} must be positive and finite"),
        });
    }
    let interference: f64 = residual_gains.iter().map(|r| r.norm_sqr()).sum();
    let denominator = interference * p_eff + noise_amp + 1.0;
    if !denominator.is_finite() || denominator <= 0.0 {
        return Err(AnalysisError::Numeric {
            detail: format!("SINR denominator {denominator} is not positive"),
        });
    }
    Ok(desired_gain.norm_sqr() * p_eff / denominator)
}

/// Gaussian point-to-point rate `log2(1 + sinr)` in bits per channel use.
pub fn rate(sinr: f64) -> Result<f64, AnalysisError> {
    if !sinr.is_finite() || sinr < 0.0 {
        return Err(AnalysisError::Numeric {
            detail: format!("SINR {sinr} must be finite and nonnegative"),
        });
    }
    Ok(libm::log2(1.0 + sinr))
}

// ---------------------------------------------------------------------------
// Rate sweeps and DoF slope estimation
// ---------------------------------------------------------------------------

/// Per-user rates at one transmit power.
#[derive(Clone, PartialEq, Debug)]
pub struct RatePoint {
    /// Transmit power, linear scale.
    pub power: f64,
    /// Per-user rates in `D1..D4` order, bits per channel use.
    pub rates: [f64; 4],
    /// Sum rate.
    pub sum: f64,
}

impl RatePoint {
    pub fn new(power: f64, rates: [f64; 4]) -> Self {
        assert!(rates.iter().all(|r| r.is_finite() && *r >= 0.0), "rates must be nonnegative");
        RatePoint {
            power,
            rates,
            sum: rates.iter().sum(),
        }
    }
}

/// Least-squares DoF estimate from a rate sweep.
#[derive(Clone, PartialEq, Debug)]
pub struct DofEstimate {
    /// Per-user slopes against `log2(P)`.
    pub slopes: [f64; 4],
    /// Per-user intercepts of the same fits.
    pub intercepts: [f64; 4],
    /// Slope of the sum rate; equals the sum of the per-user slopes.
    pub total: f64,
    /// Coefficient of determination of the sum-rate fit.
    pub r_squared: f64,
    /// Powers actually used by the fit (after the high-power filter).
    pub grid: Vec<f64>,
}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mean_x: f64 = x.iter().sum::<f64>() / n;
    let mean_y: f64 = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        sxx += (x[i] - mean_x) * (x[i] - mean_x);
        sxy += (x[i] - mean_x) * (y[i] - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..x.len() {
        let fit = slope * x[i] + intercept;
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    }
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (slope, intercept, r_squared)
}

/// Fit per-user and sum rates against `log2(P)` by ordinary least squares.
///
/// Points below [`FIT_MIN_POWER`] are dropped first; the surviving sweep
/// must hold at least 3 strictly increasing powers spanning at least
/// [`FIT_MIN_SPAN_DB`] dB.
pub fn dof_slope(points: &[RatePoint]) -> Result<DofEstimate, AnalysisError> {
    let used: Vec<&RatePoint> = points.iter().filter(|p| p.power >= FIT_MIN_POWER).collect();
    if used.len() < 3 {
        return Err(AnalysisError::Estimation {
            detail: format!(
                "need at least 3 points at or above P = {FIT_MIN_POWER:.0e}, have {}",
                used.len()
            ),
        });
    }
    for w in used.windows(2) {
        if w[1].power <= w[0].power {
            return Err(AnalysisError::Estimation {
                detail: String::from("powers must be strictly increasing"),
            });
        }
    }
    let span_db = 10.0 * (libm::log10(used[used.len() - 1].power) - libm::log10(used[0].power));
    if span_db < FIT_MIN_SPAN_DB {
        return Err(AnalysisError::Estimation {
            detail: format!("sweep spans {span_db:.1} dB, need at least {FIT_MIN_SPAN_DB} dB"),
        });
    }

    let x: Vec<f64> = used.iter().map(|p| libm::log2(p.power)).collect();
    let mut slopes = [0.0f64; 4];
    let mut intercepts = [0.0f64; 4];
    for i in 0..4 {
        let y: Vec<f64> = used.iter().map(|p| p.rates[i]).collect();
        let (slope, intercept, _) = ols(&x, &y);
        slopes[i] = slope;
        intercepts[i] = intercept;
    }
    let sum_y: Vec<f64> = used.iter().map(|p| p.sum).collect();
    let (total, _, r_squared) = ols(&x, &sum_y);

    Ok(DofEstimate {
        slopes,
        intercepts,
        total,
        r_squared,
        grid: used.iter().map(|p| p.power).collect(),
    })
}

/// Decade power grid `10^start ..= 10^stop`.
pub fn decade_grid(start_exp: i32, stop_exp: i32) -> Vec<f64> {
    (start_exp..=stop_exp).map(|e| libm::pow(10.0, e as f64)).collect()
}

/// The default sweep: `10^4 ..= 10^10`, comfortably inside the high-SNR
/// fit window.
pub fn standard_grid() -> Vec<f64> {
    decade_grid(4, 10)
}

// ---------------------------------------------------------------------------
// Scheme dispatch
// ---------------------------------------------------------------------------

/// Run one scheme at one power and return its full report. Time sharing has
/// no single report; ask for its rates instead.
pub fn scheme_report(
    ch: &ChannelRealization,
    scheme: Scheme,
    power: f64,
) -> Result<SchemeReport, SchemeError> {
    match scheme {
        Scheme::NoCache => schemes::no_cache_scheme(ch, power),
        Scheme::Cache => schemes::run_cache_scheme(ch, power),
        Scheme::Mimo { .. } => beamform::run_mimo_scheme(ch, power),
        Scheme::TimeShare(p) => Err(SchemeError::InvalidFraction { p }),
    }
}

/// Per-user rates of one scheme at one power.
pub fn scheme_rates(
    ch: &ChannelRealization,
    scheme: Scheme,
    power: f64,
) -> Result<[f64; 4], SchemeError> {
    match scheme {
        Scheme::TimeShare(p) => {
            let nc = schemes::no_cache_scheme(ch, power)?;
            let c = schemes::run_cache_scheme(ch, power)?;
            schemes::time_share(p, &nc, &c)
        }
        other => Ok(scheme_report(ch, other, power)?.rates),
    }
}

/// Evaluate one scheme across a power sweep.
pub fn sweep(
    ch: &ChannelRealization,
    scheme: Scheme,
    powers: &[f64],
) -> Result<Vec<RatePoint>, SchemeError> {
    let mut points = Vec::with_capacity(powers.len());
    for &p in powers {
        points.push(RatePoint::new(p, scheme_rates(ch, scheme, p)?));
    }
    Ok(points)
}

/// Sweep a scheme and fit its DoF slope in one call.
pub fn measure_dof(
    ch: &ChannelRealization,
    scheme: Scheme,
    powers: &[f64],
) -> Result<DofEstimate, AnalysisError> {
    let points = sweep(ch, scheme, powers)?;
    dof_slope(&points)
}

/// The topology a scheme runs on.
pub fn scheme_topology(scheme: Scheme) -> Topology {
    match scheme {
        Scheme::NoCache | Scheme::Cache | Scheme::TimeShare(_) => {
            Topology::new(TopologyVariant::SingleAntennaRelay)
        }
        Scheme::Mimo { use_side_relays } => {
            if use_side_relays {
                Topology::new(TopologyVariant::MultiAntennaRelay(3))
            } else {
                Topology::new(TopologyVariant::MultiAntennaRelayOnly(3))
            }
        }
    }
}

/// Sample a realization for `scheme`, deterministically resampling (up to
/// [`MAX_RESAMPLES`] times) when the draw is degenerate for that scheme.
/// Returns the realization and how many resamples it took.
pub fn sample_for_scheme(
    scheme: Scheme,
    seed: u64,
    h_min: f64,
    h_max: f64,
) -> Result<(ChannelRealization, u32), AnalysisError> {
    let topology = scheme_topology(scheme);
    let mut attempt: u32 = 0;
    loop {
        let attempt_seed = if attempt == 0 {
            seed
        } else {
            rng::sub_seed(seed, "resample", attempt as u64)
        };
        let ch = netmodel::sample_channels(topology, attempt_seed, h_min, h_max)?;
        let degenerate = match scheme {
            Scheme::NoCache => false,
            Scheme::Cache | Scheme::TimeShare(_) => {
                matches!(schemes::cache_delivery_gains(&ch), Err(SchemeError::DegenerateChannel { .. }))
            }
            Scheme::Mimo { .. } => matches!(
                beamform::solve_unit_v2(&ch),
                Err(BeamformError::DegenerateChannel { .. })
            ),
        };
        if !degenerate {
            return Ok((ch, attempt));
        }
        attempt += 1;
        if attempt > MAX_RESAMPLES {
            return Err(AnalysisError::ResamplingExhausted { attempts: attempt });
        }
    }
}

// ---------------------------------------------------------------------------
// Genie-aided cutset bound
// ---------------------------------------------------------------------------

/// A genie cut: two source/relay groups that may only talk through the
/// bridging relays. Destinations are not listed; each belongs with its
/// co-located source.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GenieCut {
    pub left: Vec<Node>,
    pub right: Vec<Node>,
    pub bridge: Vec<Relay>,
}

/// Rank bounds extracted from a validated cut.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CutsetBound {
    /// DoF bound for left-to-right traffic.
    pub forward: usize,
    /// DoF bound for right-to-left traffic.
    pub reverse: usize,
    /// Sum DoF bound, `forward + reverse`.
    pub total: usize,
}

/// The cut used by the converse: `{S1, R1, S4}` against `{S2, R3, S3}`
/// with the center relay as the bridge (side-relay entries dropped when the
/// topology has none).
pub fn preset_cut(variant: TopologyVariant) -> GenieCut {
    if variant.has_side_relays() {
        GenieCut {
            left: vec![
                Node::Src(Source::S1),
                Node::Rel(Relay::R1),
                Node::Src(Source::S4),
            ],
            right: vec![
                Node::Src(Source::S2),
                Node::Rel(Relay::R3),
                Node::Src(Source::S3),
            ],
            bridge: vec![Relay::R2],
        }
    } else {
        GenieCut {
            left: vec![Node::Src(Source::S1), Node::Src(Source::S4)],
            right: vec![Node::Src(Source::S2), Node::Src(Source::S3)],
            bridge: vec![Relay::R2],
        }
    }
}

fn group_of(cut: &GenieCut, node: Node) -> Option<u8> {
    let node = match node {
        // A destination sits at its co-located source's site.
        Node::Dst(d) => Node::Src(netmodel::co_located_source(d)),
        other => other,
    };
    if let Node::Rel(r) = node {
        if cut.bridge.contains(&r) {
            return Some(2);
        }
    }
    if cut.left.contains(&node) {
        return Some(0);
    }
    if cut.right.contains(&node) {
        return Some(1);
    }
    None
}

fn validate_cut(cut: &GenieCut, topology: Topology) -> Result<(), AnalysisError> {
    if cut.bridge.is_empty() {
        return Err(AnalysisError::InvalidCut {
            detail: String::from("bridge must name at least one relay"),
        });
    }
    for group in [&cut.left, &cut.right] {
        for node in group {
            if matches!(node, Node::Dst(_)) {
                return Err(AnalysisError::InvalidCut {
                    detail: String::from(
                        "destinations follow their co-located source; list sources and relays only",
                    ),
                });
            }
            if let Node::Rel(r) = node {
                if cut.bridge.contains(r) {
                    return Err(AnalysisError::InvalidCut {
                        detail: format!("{} cannot be both bridge and group member", r.tag()),
                    });
                }
            }
        }
    }
    for node in &cut.left {
        if cut.right.contains(node) {
            return Err(AnalysisError::InvalidCut {
                detail: format!("{} appears in both groups", node.tag()),
            });
        }
    }
    // Every source and non-bridge relay of the topology must be assigned.
    for node in topology.nodes() {
        match node {
            Node::Src(_) | Node::Rel(_) => {
                if group_of(cut, node).is_none() {
                    return Err(AnalysisError::InvalidCut {
                        detail: format!("{} is not assigned to any group", node.tag()),
                    });
                }
            }
            Node::Dst(_) => {}
        }
    }
    // Separation: no topology link may connect the two groups directly.
    for (from, to) in topology.links() {
        if let (Some(a), Some(b)) = (group_of(cut, from), group_of(cut, to)) {
            if (a == 0 && b == 1) || (a == 1 && b == 0) {
                return Err(AnalysisError::InvalidCut {
                    detail: format!(
                        "link {} -> {} bypasses the bridge",
                        from.tag(),
                        to.tag()
                    ),
                });
            }
        }
    }
    Ok(())
}

/// Channel coefficient of an existing link, else a structural zero.
fn link_coefficient(
    ch: &ChannelRealization,
    from: Node,
    to: Node,
    rx_antenna: usize,
    tx_antenna: usize,
) -> Complex64 {
    let side = ch.side();
    match (from, to) {
        (Node::Src(s), Node::Rel(Relay::R2)) if tx_antenna == 0 => ch.to_r2(s)[rx_antenna],
        (Node::Src(Source::S1), Node::Rel(Relay::R1)) => side.map_or(C0, |c| c.s1_r1),
        (Node::Src(Source::S4), Node::Rel(Relay::R1)) => side.map_or(C0, |c| c.s4_r1),
        (Node::Src(Source::S2), Node::Rel(Relay::R3)) => side.map_or(C0, |c| c.s2_r3),
        (Node::Src(Source::S3), Node::Rel(Relay::R3)) => side.map_or(C0, |c| c.s3_r3),
        (Node::Rel(Relay::R2), Node::Dst(d)) if rx_antenna == 0 => ch.from_r2(d)[tx_antenna],
        (Node::Rel(Relay::R1), Node::Dst(Dest::D2)) => side.map_or(C0, |c| c.r1_d2),
        (Node::Rel(Relay::R1), Node::Dst(Dest::D3)) => side.map_or(C0, |c| c.r1_d3),
        (Node::Rel(Relay::R3), Node::Dst(Dest::D1)) => side.map_or(C0, |c| c.r3_d1),
        (Node::Rel(Relay::R3), Node::Dst(Dest::D4)) => side.map_or(C0, |c| c.r3_d4),
        _ => C0,
    }
}

fn relay_antennas(ch: &ChannelRealization, r: Relay) -> usize {
    match r {
        Relay::R2 => ch.center_antennas(),
        Relay::R1 | Relay::R3 => 1,
    }
}

/// Channel matrix from a group's transmit antennas into the bridge's
/// receive antennas (absent links contribute zero columns).
fn group_to_bridge(ch: &ChannelRealization, group: &[Node], bridge: &[Relay]) -> CMat {
    let rows: usize = bridge.iter().map(|r| relay_antennas(ch, *r)).sum();
    let cols: usize = group
        .iter()
        .map(|n| match n {
            Node::Src(_) => 1,
            Node::Rel(r) => relay_antennas(ch, *r),
            Node::Dst(_) => 0,
        })
        .sum();
    let mut m = CMat::zeros(rows.max(1), cols.max(1));
    let mut col = 0;
    for node in group {
        let tx_antennas = match node {
            Node::Src(_) => 1,
            Node::Rel(r) => relay_antennas(ch, *r),
            Node::Dst(_) => 0,
        };
        for t in 0..tx_antennas {
            let mut row = 0;
            for r in bridge {
                for a in 0..relay_antennas(ch, *r) {
                    m[(row + a, col + t)] = link_coefficient(ch, *node, Node::Rel(*r), a, t);
                }
                row += relay_antennas(ch, *r);
            }
        }
        col += tx_antennas;
    }
    m
}

/// Channel matrix from the bridge's transmit antennas into a group's
/// receive antennas: each source's co-located destination and each group
/// relay receive (absent links contribute zero rows).
fn bridge_to_group(ch: &ChannelRealization, bridge: &[Relay], group: &[Node]) -> CMat {
    let cols: usize = bridge.iter().map(|r| relay_antennas(ch, *r)).sum();
    let receivers: Vec<Node> = group
        .iter()
        .map(|n| match n {
            Node::Src(s) => Node::Dst(netmodel::co_located_dest(*s)),
            other => *other,
        })
        .collect();
    let rows = receivers.len();
    let mut m = CMat::zeros(rows.max(1), cols.max(1));
    for (row, receiver) in receivers.iter().enumerate() {
        let mut col = 0;
        for r in bridge {
            for t in 0..relay_antennas(ch, *r) {
                m[(row, col + t)] = link_coefficient(ch, Node::Rel(*r), *receiver, 0, t);
            }
            col += relay_antennas(ch, *r);
        }
    }
    m
}

/// Genie-aided cutset bound on the sum DoF.
///
/// Each direction is capped by the rank of the channel into the bridge and
/// the rank out of it, whichever is smaller; the two directions add.
pub fn genie_cutset_bound(
    cut: &GenieCut,
    ch: &ChannelRealization,
) -> Result<CutsetBound, AnalysisError> {
    validate_cut(cut, Topology::new(ch.variant()))?;
    let rank_of = |m: &CMat| -> Result<usize, AnalysisError> {
        linalg::rank(m, RANK_TOL).map_err(|e| AnalysisError::Numeric {
            detail: format!("{e}"),
        })
    };
    let forward_in = rank_of(&group_to_bridge(ch, &cut.left, &cut.bridge))?;
    let forward_out = rank_of(&bridge_to_group(ch, &cut.bridge, &cut.right))?;
    let reverse_in = rank_of(&group_to_bridge(ch, &cut.right, &cut.bridge))?;
    let reverse_out = rank_of(&bridge_to_group(ch, &cut.bridge, &cut.left))?;
    let forward = forward_in.min(forward_out);
    let reverse = reverse_in.min(reverse_out);
    Ok(CutsetBound {
        forward,
        reverse,
        total: forward + reverse,
    })
}

// ---------------------------------------------------------------------------
// Monte Carlo cancellation verification
// ---------------------------------------------------------------------------

/// Outcome of a Monte Carlo cancellation survey.
#[derive(Clone, PartialEq, Debug)]
pub struct ResidualSurvey {
    /// Largest relative unwanted-stream coefficient seen across trials.
    pub max_relative: f64,
    /// Trials completed.
    pub trials: u64,
    /// Degenerate draws that were resampled along the way.
    pub resamples: u64,
}

fn cache_trial_residual(ch: &ChannelRealization) -> Result<f64, AnalysisError> {
    let weights = schemes::cache_beamformers(ch)?;
    let norm = weights.norm();
    let mut worst = 0.0f64;
    // Push each common stream through the second hop alone and read the
    // destinations that must not hear it.
    for (stream_tx, silent_dests) in [
        ([weights.r1.on_a, weights.r2.on_a, weights.r3.on_a], [Dest::D2, Dest::D4]),
        ([weights.r1.on_b, weights.r2.on_b, weights.r3.on_b], [Dest::D1, Dest::D3]),
    ] {
        let mut tx = netmodel::RelaySignals::zero(ch.variant());
        tx.r1 = Some(stream_tx[0]);
        tx.r2[0] = stream_tx[1];
        tx.r3 = Some(stream_tx[2]);
        let y = netmodel::second_hop(ch, &tx, &[C0; 4])?;
        for d in silent_dests {
            let ratio = libm::sqrt(y[d.index()].norm_sqr()) / (ch.h_max() * norm);
            worst = worst.max(ratio);
        }
    }
    Ok(worst)
}

fn mimo_trial_residual(ch: &ChannelRealization) -> Result<f64, AnalysisError> {
    let sol = beamform::solve_unit_v2(ch).map_err(|e| AnalysisError::Numeric {
        detail: format!("{e}"),
    })?;
    let coefficients = beamform::unwanted_coefficients(ch, &sol.v2)?;
    let norm = sol.v2.frobenius_norm();
    let mut worst = 0.0f64;
    for list in &coefficients {
        for c in list {
            worst = worst.max(libm::sqrt(c.norm_sqr()) / (ch.h_max() * norm));
        }
    }
    Ok(worst)
}

/// Sample `n_trials` realizations, run `scheme` symbol-level with noise
/// off, and report the worst unwanted-stream coefficient relative to
/// `h_max * beamformer norm`. Deterministic in `(scheme, n_trials, seed)`.
///
/// The no-cache scheme has no unwanted stream once the destination
/// subtracts its co-located transmission, so its residual is zero by
/// construction.
pub fn monte_carlo_residual(
    scheme: Scheme,
    n_trials: u64,
    seed: u64,
    h_min: f64,
    h_max: f64,
) -> Result<ResidualSurvey, AnalysisError> {
    if n_trials == 0 {
        return Err(AnalysisError::Estimation {
            detail: String::from("need at least one trial"),
        });
    }
    let mut worst = 0.0f64;
    let mut resamples: u64 = 0;
    for t in 0..n_trials {
        let trial_seed = rng::sub_seed(seed, "mc/trial", t);
        let (ch, attempts) = sample_for_scheme(scheme, trial_seed, h_min, h_max)?;
        resamples += attempts as u64;
        let trial_worst = match scheme {
            Scheme::NoCache => 0.0,
            Scheme::Cache | Scheme::TimeShare(_) => cache_trial_residual(&ch)?,
            Scheme::Mimo { .. } => mimo_trial_residual(&ch)?,
        };
        worst = worst.max(trial_worst);
    }
    Ok(ResidualSurvey {
        max_relative: worst,
        trials: n_trials,
        resamples,
    })
}
