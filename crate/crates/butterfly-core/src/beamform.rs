//! Multi-antenna center-relay beamforming: build the interference-nulling
//! constraint system, solve it through the nullspace machinery, and turn the
//! solution into per-destination gains and rates.
//!
//! With `n` antennas at the center relay and the side relays silenced, the
//! relay forwards `X_R2 = V2 * Y_R2` (one slot late). Each destination must
//! not hear the two sources that are neither its wanted source nor its
//! co-located one, which gives eight bilinear constraints on the `n*n`
//! entries of `V2`. For `n = 3` the system is 8 x 9 with generic rank 7
//! (see [`generic_rank`] for why the eight rows always carry one linear
//! dependency), leaving a two-dimensional nullspace; any vector in it
//! cancels all cross traffic while the four desired gains stay nonzero for
//! almost every channel draw.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::analysis;
use crate::linalg::{
    self, CMat, LinalgError, NullspaceMethod, NullspaceResult,
};
use crate::netmodel::{
    self, ChannelRealization, Dest, Node, Relay, Source, TopologyVariant,
};
use crate::schemes::{SchemeError, SchemeReport};

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Relative rank tolerance shared by every nullspace decision here.
pub const RANK_TOL: f64 = 1e-9;

/// Relative bound on the substituted nulling residuals of a solution.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// The eight (destination, interfering source) pairs that must be nulled,
/// in fixed row order.
pub const NULLED_PAIRS: [(Dest, Source); 8] = [
    (Dest::D1, Source::S2),
    (Dest::D1, Source::S4),
    (Dest::D3, Source::S4),
    (Dest::D3, Source::S2),
    (Dest::D2, Source::S1),
    (Dest::D2, Source::S3),
    (Dest::D4, Source::S3),
    (Dest::D4, Source::S1),
];

/// Failure modes of the beamforming pipeline.
#[derive(Clone, PartialEq, Debug)]
pub enum BeamformError {
    /// The operation needs a multi-antenna center relay.
    Unsupported { variant: TopologyVariant },
    /// The constraint system did not have the generic rank, or a desired
    /// gain vanished: a measure-zero channel draw.
    DegenerateChannel { detail: String },
    /// Substituting the solution back into the constraints left residuals
    /// above tolerance.
    VerificationFailed { detail: String },
    /// A dense routine rejected its input.
    Linalg(LinalgError),
}

impl fmt::Display for BeamformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BeamformError::Unsupported { variant } => {
                write!(f, "beamforming needs a multi-antenna center relay, got {variant:?}")
            }
            BeamformError::DegenerateChannel { detail } => {
                write!(f, "degenerate channel: {detail}")
            }
            BeamformError::VerificationFailed { detail } => {
                write!(f, "nulling verification failed: {detail}")
            }
            BeamformError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for BeamformError {}

impl From<LinalgError> for BeamformError {
    fn from(e: LinalgError) -> Self {
        BeamformError::Linalg(e)
    }
}

fn require_multi_antenna(ch: &ChannelRealization) -> Result<usize, BeamformError> {
    match ch.variant() {
        TopologyVariant::SingleAntennaRelay => Err(BeamformError::Unsupported {
            variant: ch.variant(),
        }),
        TopologyVariant::MultiAntennaRelay(n) | TopologyVariant::MultiAntennaRelayOnly(n) => Ok(n),
    }
}

// ---------------------------------------------------------------------------
// Constraint system
// ---------------------------------------------------------------------------

/// The nulling constraints as a dense matrix over the flattened relay
/// weights, with the row labels kept alongside.
#[derive(Clone, Debug)]
pub struct NullingSystem {
    /// 8 x (n^2) constraint matrix (or 8 x (n^2 + 2) with side columns).
    pub matrix: CMat,
    /// Row labels, same order as the matrix rows.
    pub rows: [(Dest, Source); 8],
    /// Antennas at the center relay.
    pub n_antennas: usize,
    /// Whether the trailing two columns are the side-relay scalars.
    pub side_columns: bool,
}

/// Flattening convention: `V2[a][b]` maps to column `a * n + b`.
pub fn flatten_index(n: usize, a: usize, b: usize) -> usize {
    a * n + b
}

/// Build the 8 x n^2 nulling system over the center-relay weights alone
/// (side relays silenced).
///
/// Row `(d, s)` holds the coefficients of `H_{R2,d} * V2 * H_{s,R2}` as a
/// linear form in the entries of `V2`: column `a*n + b` carries
/// `H_{R2,d}[a] * H_{s,R2}[b]`.
pub fn build_nulling_system(ch: &ChannelRealization) -> Result<NullingSystem, BeamformError> {
    let n = require_multi_antenna(ch)?;
    let mut data = vec![C0; 8 * n * n];
    for (r, (d, s)) in NULLED_PAIRS.iter().enumerate() {
        let rx = ch.from_r2(*d);
        let tx = ch.to_r2(*s);
        for a in 0..n {
            for b in 0..n {
                data[r * n * n + flatten_index(n, a, b)] = rx[a] * tx[b];
            }
        }
    }
    Ok(NullingSystem {
        matrix: CMat::from_rows(8, n * n, &data),
        rows: NULLED_PAIRS,
        n_antennas: n,
        side_columns: false,
    })
}

/// Build the full 8 x (n^2 + 2) system that also lets the side relays
/// amplify-forward with scalars `v1`, `v3` (the last two columns).
///
/// Only four rows touch the side columns: `R1` bridges `S1 -> D2` and
/// `S4 -> D3`, `R3` bridges `S2 -> D1` and `S3 -> D4`. On a topology
/// without side relays those columns are structurally zero. The full system
/// exists for parameter-counting studies; the shipped scheme fixes
/// `v1 = v3 = 0`.
pub fn build_full_system(ch: &ChannelRealization) -> Result<NullingSystem, BeamformError> {
    let base = build_nulling_system(ch)?;
    let n = base.n_antennas;
    let cols = n * n + 2;
    let mut data = vec![C0; 8 * cols];
    for r in 0..8 {
        data[r * cols..r * cols + n * n].copy_from_slice(base.matrix.row(r));
    }
    if let Some(side) = ch.side() {
        let v1_col = n * n;
        let v3_col = n * n + 1;
        for (r, (d, s)) in NULLED_PAIRS.iter().enumerate() {
            match (*d, *s) {
                (Dest::D2, Source::S1) => data[r * cols + v1_col] = side.r1_d2 * side.s1_r1,
                (Dest::D3, Source::S4) => data[r * cols + v1_col] = side.r1_d3 * side.s4_r1,
                (Dest::D1, Source::S2) => data[r * cols + v3_col] = side.r3_d1 * side.s2_r3,
                (Dest::D4, Source::S3) => data[r * cols + v3_col] = side.r3_d4 * side.s3_r3,
                _ => {}
            }
        }
    }
    Ok(NullingSystem {
        matrix: CMat::from_rows(8, cols, &data),
        rows: NULLED_PAIRS,
        n_antennas: n,
        side_columns: true,
    })
}

/// Generic rank of the 8 x n^2 nulling system.
///
/// The four rows protecting `D1`/`D3` are Kronecker products drawn from
/// `span{H_{R2,1}, H_{R2,3}} (x) span{H_{2,R2}, H_{4,R2}}` and the four
/// protecting `D2`/`D4` from `span{H_{R2,2}, H_{R2,4}} (x) span{H_{1,R2},
/// H_{3,R2}}`. Each factor pair spans `min(2, n)` dimensions, and in `C^n`
/// two generic 2-dimensional subspaces intersect in `max(0, 4 - n)`
/// dimensions, so the two 4-dimensional row blocks share a subspace of
/// dimension `max(0, 4 - n)^2`. The rank therefore never reaches 8 for
/// `n = 3`: it is 7, with one unavoidable dependency among the eight rows.
pub fn generic_rank(n_antennas: usize) -> usize {
    let span = n_antennas.min(2);
    let block = span * span;
    let overlap = (2 * span).saturating_sub(n_antennas);
    2 * block - overlap * overlap
}

/// Generic nullspace dimension of the 8 x n^2 nulling system:
/// `n^2 - generic_rank(n)`.
pub fn generic_nullity(n_antennas: usize) -> usize {
    n_antennas * n_antennas - generic_rank(n_antennas)
}

/// Directly evaluate the bilinear form of one constraint row from the raw
/// channels and a candidate `V2` (plus optional side scalars).
pub fn bilinear_residual(
    ch: &ChannelRealization,
    v2: &CMat,
    v1: Complex64,
    v3: Complex64,
    d: Dest,
    s: Source,
) -> Complex64 {
    let rx = ch.from_r2(d);
    let tx = ch.to_r2(s);
    let n = v2.rows();
    let mut acc = C0;
    for a in 0..n {
        for b in 0..n {
            acc += rx[a] * v2[(a, b)] * tx[b];
        }
    }
    if let Some(side) = ch.side() {
        acc += match (d, s) {
            (Dest::D2, Source::S1) => v1 * side.r1_d2 * side.s1_r1,
            (Dest::D3, Source::S4) => v1 * side.r1_d3 * side.s4_r1,
            (Dest::D1, Source::S2) => v3 * side.r3_d1 * side.s2_r3,
            (Dest::D4, Source::S3) => v3 * side.r3_d4 * side.s3_r3,
            _ => C0,
        };
    }
    acc
}

// ---------------------------------------------------------------------------
// Nullspace access and the dual-route cross-check
// ---------------------------------------------------------------------------

/// Nullspace of a constraint matrix through the default route (pivoted QR).
pub fn nullspace(m: &CMat, rel_tol: f64) -> Result<NullspaceResult, BeamformError> {
    Ok(linalg::nullspace_qr(m, rel_tol)?)
}

/// Nullspace through an explicitly chosen route.
pub fn nullspace_with(
    method: NullspaceMethod,
    m: &CMat,
    rel_tol: f64,
) -> Result<NullspaceResult, BeamformError> {
    let r = match method {
        NullspaceMethod::QrFactorization => linalg::nullspace_qr(m, rel_tol)?,
        NullspaceMethod::RowReduction => linalg::nullspace_rowreduce(m, rel_tol)?,
    };
    Ok(r)
}

/// Agreement report between the two independent nullspace routes.
#[derive(Clone, Debug)]
pub struct CrossCheck {
    pub qr: NullspaceResult,
    pub row_reduction: NullspaceResult,
    /// Largest principal angle between the two nullspaces, radians. `None`
    /// when the dimensions disagree or both are empty.
    pub principal_angle: Option<f64>,
}

impl CrossCheck {
    /// Both routes agree on dimension, and on the subspace when both are
    /// one-dimensional.
    pub fn agrees(&self, angle_tol: f64) -> bool {
        if self.qr.dim() != self.row_reduction.dim() {
            return false;
        }
        match self.principal_angle {
            Some(angle) => angle <= angle_tol,
            None => true,
        }
    }
}

/// Run both nullspace routes on the same matrix and compare them.
pub fn cross_check(m: &CMat, rel_tol: f64) -> Result<CrossCheck, BeamformError> {
    let qr = linalg::nullspace_qr(m, rel_tol)?;
    let rr = linalg::nullspace_rowreduce(m, rel_tol)?;
    let principal_angle = if qr.dim() == rr.dim() && qr.dim() >= 1 {
        Some(linalg::principal_angle(&qr.basis, &rr.basis))
    } else {
        None
    };
    Ok(CrossCheck {
        qr,
        row_reduction: rr,
        principal_angle,
    })
}

// ---------------------------------------------------------------------------
// Solving for the relay weights
// ---------------------------------------------------------------------------

/// A complete beamforming solution: the center-relay weight matrix, the
/// silent side scalars, the substituted constraint residuals, and the four
/// desired gains.
#[derive(Clone, PartialEq, Debug)]
pub struct BeamformingSolution {
    /// Side-relay amplify scalar at `R1` (zero in the shipped scheme).
    pub v1: Complex64,
    /// Side-relay amplify scalar at `R3` (zero in the shipped scheme).
    pub v3: Complex64,
    /// Center-relay weight matrix, `n x n`.
    pub v2: CMat,
    /// Substituted values of the eight nulling constraints, in
    /// [`NULLED_PAIRS`] order.
    pub residuals: Vec<Complex64>,
    /// Desired-stream gain `H_{R2,i} * V2 * H_{i,R2}` per destination.
    pub desired_gains: [Complex64; 4],
}

impl BeamformingSolution {
    pub fn n_antennas(&self) -> usize {
        self.v2.rows()
    }

    pub fn residual_max(&self) -> f64 {
        self.residuals
            .iter()
            .map(|r| libm::sqrt(r.norm_sqr()))
            .fold(0.0, f64::max)
    }
}

fn solution_from_vector(
    ch: &ChannelRealization,
    v: &[Complex64],
    n: usize,
) -> BeamformingSolution {
    let v2 = CMat::from_rows(n, n, v);
    let mut residuals = Vec::with_capacity(8);
    for (d, s) in NULLED_PAIRS {
        residuals.push(bilinear_residual(ch, &v2, C0, C0, d, s));
    }
    let mut desired_gains = [C0; 4];
    for d in Dest::ALL {
        let s = netmodel::intended_source(d);
        desired_gains[d.index()] = bilinear_residual(ch, &v2, C0, C0, d, s);
    }
    BeamformingSolution {
        v1: C0,
        v3: C0,
        v2,
        residuals,
        desired_gains,
    }
}

fn verify_solution(ch: &ChannelRealization, sol: &BeamformingSolution) -> Result<(), BeamformError> {
    let scale = sol.v2.frobenius_norm() * ch.h_max() * ch.h_max();
    let worst = sol.residual_max();
    if worst > RESIDUAL_TOL * scale {
        return Err(BeamformError::VerificationFailed {
            detail: format!("max nulling residual {worst:.3e} exceeds {RESIDUAL_TOL:.0e} relative"),
        });
    }
    for (i, g) in sol.desired_gains.iter().enumerate() {
        if libm::sqrt(g.norm_sqr()) <= RESIDUAL_TOL * scale {
            return Err(BeamformError::DegenerateChannel {
                detail: format!("desired gain at D{} vanished", i + 1),
            });
        }
    }
    Ok(())
}

/// Solve the nulling system for a unit-Frobenius-norm weight matrix.
///
/// The constraint matrix must have its generic rank and nullity (7 and 2
/// for three antennas); a lower rank is a measure-zero channel draw
/// reported as degenerate, and a zero generic nullity (two antennas) means
/// nulling by the center relay alone is impossible. Any nullspace vector
/// cancels all eight interference paths; the first basis vector is the
/// fixed deterministic choice, reshaped row-major after phase
/// canonicalization and verified by substitution.
pub fn solve_unit_v2(ch: &ChannelRealization) -> Result<BeamformingSolution, BeamformError> {
    let n = require_multi_antenna(ch)?;
    let expected_rank = generic_rank(n);
    let expected_dim = generic_nullity(n);
    if expected_dim == 0 {
        return Err(BeamformError::DegenerateChannel {
            detail: format!("{n} center-relay antennas leave no nulling direction"),
        });
    }
    let system = build_nulling_system(ch)?;
    let ns = nullspace(&system.matrix, RANK_TOL)?;
    if ns.rank != expected_rank || ns.dim() != expected_dim {
        return Err(BeamformError::DegenerateChannel {
            detail: format!(
                "nulling system rank {} (nullspace dim {}), expected rank {expected_rank} (dim {expected_dim})",
                ns.rank,
                ns.dim(),
            ),
        });
    }
    let sol = solution_from_vector(ch, &ns.basis[0], n);
    verify_solution(ch, &sol)?;
    Ok(sol)
}

/// Received covariance at the center relay with all four sources at power
/// `P`: `P * sum_i H_{i,R2} H_{i,R2}^H + I`.
pub fn received_covariance(ch: &ChannelRealization, power: f64) -> CMat {
    let n = ch.center_antennas();
    let mut cov = CMat::identity(n);
    for s in Source::ALL {
        let h = ch.to_r2(s);
        for a in 0..n {
            for b in 0..n {
                cov[(a, b)] += Complex64::new(power, 0.0) * h[a] * h[b].conj();
            }
        }
    }
    cov
}

/// Average transmit power of the relay applying `v2` to its received
/// vector: `tr(V2 C V2^H)` with `C` the received covariance.
pub fn relay_transmit_power(ch: &ChannelRealization, v2: &CMat, power: f64) -> f64 {
    let cov = received_covariance(ch, power);
    let product = v2.mul(&cov).mul(&v2.hermitian());
    let mut trace = 0.0;
    for a in 0..v2.rows() {
        trace += product[(a, a)].re;
    }
    trace
}

/// Solve the nulling system and scale the weights so the relay's average
/// transmit power is exactly `P` against the analytic received covariance.
pub fn solve_v2(ch: &ChannelRealization, power: f64) -> Result<BeamformingSolution, BeamformError> {
    if !(power.is_finite() && power > 0.0) {
        return Err(BeamformError::DegenerateChannel {
            detail: format!("power {power} must be positive and finite"),
        });
    }
    let unit = solve_unit_v2(ch)?;
    let tx_power = relay_transmit_power(ch, &unit.v2, power);
    let c = libm::sqrt(power / tx_power);
    let scaled = solution_from_vector(ch, unit.v2.scale(Complex64::new(c, 0.0)).data(), unit.n_antennas());
    verify_solution(ch, &scaled)?;
    Ok(scaled)
}

// ---------------------------------------------------------------------------
// Running the scheme
// ---------------------------------------------------------------------------

/// Effective unwanted-stream coefficients at each destination, measured by
/// pushing unit impulses from every source through the two hops with the
/// relay applying `v2` (noise off). Side relays are silent.
pub fn unwanted_coefficients(
    ch: &ChannelRealization,
    v2: &CMat,
) -> Result<[Vec<Complex64>; 4], SchemeError> {
    let mut out: [Vec<Complex64>; 4] = [vec![], vec![], vec![], vec![]];
    let zero_relay = netmodel::RelaySignals::zero(ch.variant());
    for s in Source::ALL {
        let mut x = [C0; 4];
        x[s.index()] = Complex64::new(1.0, 0.0);
        let rx = netmodel::first_hop(ch, &x, &zero_relay)?;
        let mut tx = netmodel::RelaySignals::zero(ch.variant());
        tx.r2 = v2.matvec(&rx.r2);
        let y = netmodel::second_hop(ch, &tx, &[C0; 4])?;
        for d in Dest::ALL {
            if s == netmodel::intended_source(d) || s == netmodel::co_located_source(d) {
                continue;
            }
            out[d.index()].push(y[d.index()]);
        }
    }
    Ok(out)
}

/// Run the multi-antenna scheme at power `P`: all four sources transmit,
/// the center relay forwards through the nulling weights one slot late, and
/// every destination decodes its stream free of cross traffic.
///
/// Whether the topology carries (silent) side relays or omits them changes
/// nothing: the same channels are drawn for the shared links, so gains,
/// residuals, and rates come out identical.
pub fn run_mimo_scheme(ch: &ChannelRealization, power: f64) -> Result<SchemeReport, SchemeError> {
    let sol = solve_v2(ch, power).map_err(|e| match e {
        BeamformError::Unsupported { variant } => SchemeError::UnsupportedScheme {
            scheme: "mimo",
            variant,
        },
        BeamformError::DegenerateChannel { detail } => SchemeError::DegenerateChannel { detail },
        other => SchemeError::DegenerateChannel {
            detail: format!("{other}"),
        },
    })?;

    let residuals = unwanted_coefficients(ch, &sol.v2)?;
    let n = sol.n_antennas();
    let mut noise_amp = [0.0f64; 4];
    for d in Dest::ALL {
        // The relay forwards its own reception noise through V2: the
        // destination sees H_{R2,d} * V2 * z with unit-variance z.
        let rx = ch.from_r2(d);
        let mut amp = 0.0;
        for b in 0..n {
            let mut entry = C0;
            for (a, r) in rx.iter().enumerate() {
                entry += r * sol.v2[(a, b)];
            }
            amp += entry.norm_sqr();
        }
        noise_amp[d.index()] = amp;
    }

    let mut rates = [0.0f64; 4];
    for d in Dest::ALL {
        let i = d.index();
        let sinr = analysis::sinr(sol.desired_gains[i], &residuals[i], noise_amp[i], power)
            .expect("mimo SINR inputs are valid by construction");
        rates[i] = analysis::rate(sinr).expect("SINR is nonnegative");
    }

    Ok(SchemeReport {
        scheme: "mimo",
        power,
        gains: sol.desired_gains,
        residuals,
        noise_amp,
        rates,
        active: vec![
            Node::Src(Source::S1),
            Node::Src(Source::S2),
            Node::Src(Source::S3),
            Node::Src(Source::S4),
            Node::Rel(Relay::R2),
        ],
    })
}

// ---------------------------------------------------------------------------
// Parameter counting
// ---------------------------------------------------------------------------

/// Free parameters versus nulling constraints for an `n`-antenna center
/// relay, optionally counting the two side-relay amplify scalars.
///
/// Returns `(parameters, constraints, parameters > constraints)`. This is
/// arithmetic only: a deficit proves nothing about degrees of freedom, and
/// no scheme is constructed from it.
pub fn feasibility_count(n_antennas: usize, include_side_scalars: bool) -> (usize, usize, bool) {
    let params = n_antennas * n_antennas + if include_side_scalars { 2 } else { 0 };
    (params, 8, params > 8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{sample_channels, Topology};
    use crate::rng;

    fn mimo(seed: u64, n: usize) -> ChannelRealization {
        sample_channels(Topology::new(TopologyVariant::MultiAntennaRelay(n)), seed, 0.5, 2.0)
            .expect("sampling must succeed")
    }

    fn random_v2(seed: u64, n: usize) -> CMat {
        let mut rng = rng::stream(seed, "test/v2", 0);
        let data: Vec<Complex64> = (0..n * n).map(|_| rng::complex_gaussian(&mut rng)).collect();
        CMat::from_rows(n, n, &data)
    }

    #[test]
    fn constraint_rows_match_direct_bilinear_evaluation() {
        for n in [2, 3, 4] {
            for seed in 0..10 {
                let ch = mimo(seed, n);
                let system = build_nulling_system(&ch).unwrap();
                let v2 = random_v2(seed + 100, n);
                let applied = system.matrix.matvec(v2.data());
                for (r, (d, s)) in NULLED_PAIRS.iter().enumerate() {
                    let direct = bilinear_residual(&ch, &v2, C0, C0, *d, *s);
                    let rel = (applied[r] - direct).norm_sqr().sqrt()
                        / direct.norm_sqr().sqrt().max(1e-300);
                    assert!(
                        rel <= 1e-12,
                        "n={n} seed={seed} row {r}: matrix row disagrees with direct form by {rel:.3e}"
                    );
                }
            }
        }
    }

    #[test]
    fn full_system_side_columns_match_direct_evaluation() {
        for seed in 0..10 {
            let ch = mimo(seed, 2);
            let system = build_full_system(&ch).unwrap();
            assert_eq!(system.matrix.cols(), 6);
            let v2 = random_v2(seed + 7, 2);
            let mut rng = rng::stream(seed, "test/side", 0);
            let v1 = rng::complex_gaussian(&mut rng);
            let v3 = rng::complex_gaussian(&mut rng);
            let mut flat: Vec<Complex64> = v2.data().to_vec();
            flat.push(v1);
            flat.push(v3);
            let applied = system.matrix.matvec(&flat);
            for (r, (d, s)) in NULLED_PAIRS.iter().enumerate() {
                let direct = bilinear_residual(&ch, &v2, v1, v3, *d, *s);
                assert!(
                    (applied[r] - direct).norm_sqr().sqrt() <= 1e-12 * direct.norm_sqr().sqrt().max(1.0),
                    "seed={seed} row {r}: full system row wrong"
                );
            }
        }
    }

    #[test]
    fn full_system_without_side_relays_has_zero_side_columns() {
        let ch = sample_channels(
            Topology::new(TopologyVariant::MultiAntennaRelayOnly(3)),
            5,
            0.5,
            2.0,
        )
        .unwrap();
        let system = build_full_system(&ch).unwrap();
        for r in 0..8 {
            assert_eq!(system.matrix[(r, 9)], C0);
            assert_eq!(system.matrix[(r, 10)], C0);
        }
    }

    #[test]
    fn three_antenna_system_has_rank_seven_nullity_two() {
        for seed in 0..50 {
            let ch = mimo(seed, 3);
            let system = build_nulling_system(&ch).unwrap();
            let ns = nullspace(&system.matrix, RANK_TOL).unwrap();
            assert_eq!(ns.rank, 7, "seed {seed}: one row dependency is structural");
            assert_eq!(ns.dim(), 2, "seed {seed}");
        }
    }

    #[test]
    fn generic_rank_follows_the_antenna_count() {
        assert_eq!(generic_rank(1), 1);
        assert_eq!(generic_rank(2), 4);
        assert_eq!(generic_rank(3), 7);
        assert_eq!(generic_rank(4), 8);
        assert_eq!(generic_rank(5), 8);
        assert_eq!(generic_nullity(2), 0);
        assert_eq!(generic_nullity(3), 2);
        assert_eq!(generic_nullity(4), 8);
        // The measured ranks of sampled systems match the structural
        // prediction for every antenna count that admits one.
        for (n, seeds) in [(2usize, 10u64), (3, 10), (4, 10)] {
            for seed in 0..seeds {
                let ch = mimo(seed, n);
                let system = build_nulling_system(&ch).unwrap();
                let ns = nullspace(&system.matrix, RANK_TOL).unwrap();
                assert_eq!(ns.rank, generic_rank(n), "n={n} seed={seed}");
                assert_eq!(ns.dim(), generic_nullity(n), "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn two_antenna_full_system_is_overconstrained() {
        for seed in 0..20 {
            let ch = mimo(seed, 2);
            let system = build_full_system(&ch).unwrap();
            let ns = nullspace(&system.matrix, RANK_TOL).unwrap();
            assert_eq!(ns.rank, 6, "seed {seed}: 6 parameters bound by 8 constraints");
            assert_eq!(ns.dim(), 0, "seed {seed}: no free direction remains");
        }
    }

    #[test]
    fn solution_nulls_all_eight_pairs_by_substitution() {
        for seed in 0..30 {
            let ch = mimo(seed, 3);
            let sol = solve_unit_v2(&ch).unwrap();
            let scale = sol.v2.frobenius_norm() * ch.h_max() * ch.h_max();
            assert!(
                sol.residual_max() <= RESIDUAL_TOL * scale,
                "seed {seed}: residual {:.3e}",
                sol.residual_max()
            );
            assert!((sol.v2.frobenius_norm() - 1.0).abs() < 1e-12, "unit Frobenius norm");
            assert_eq!(sol.v1, C0);
            assert_eq!(sol.v3, C0);
        }
    }

    #[test]
    fn desired_gains_stay_generic() {
        for seed in 0..100 {
            let ch = mimo(seed, 3);
            let sol = solve_unit_v2(&ch).unwrap();
            let floor = 1e-6 * ch.h_min() * ch.h_min();
            for (i, g) in sol.desired_gains.iter().enumerate() {
                assert!(
                    g.norm_sqr().sqrt() > floor,
                    "seed {seed}: gain at D{} is {:.3e}, floor {floor:.3e}",
                    i + 1,
                    g.norm_sqr().sqrt()
                );
            }
        }
    }

    #[test]
    fn both_routes_agree_on_the_nulling_system() {
        for seed in 0..100 {
            let ch = mimo(seed, 3);
            let system = build_nulling_system(&ch).unwrap();
            let check = cross_check(&system.matrix, RANK_TOL).unwrap();
            assert!(
                check.agrees(1e-8),
                "seed {seed}: dims {}/{}, angle {:?}",
                check.qr.dim(),
                check.row_reduction.dim(),
                check.principal_angle
            );
        }
    }

    #[test]
    fn scaled_solution_meets_the_power_constraint() {
        for seed in [0, 7, 19] {
            let ch = mimo(seed, 3);
            for power in [1.0, 100.0, 1e6] {
                let sol = solve_v2(&ch, power).unwrap();
                let tx = relay_transmit_power(&ch, &sol.v2, power);
                assert!(
                    (tx - power).abs() <= 1e-9 * power,
                    "seed {seed}, P={power}: relay transmits {tx}"
                );
            }
        }
    }

    #[test]
    fn covariance_matches_longhand_accumulation() {
        let ch = mimo(3, 3);
        let power = 17.0;
        let cov = received_covariance(&ch, power);
        for a in 0..3 {
            for b in 0..3 {
                let mut want = if a == b { Complex64::new(1.0, 0.0) } else { C0 };
                for s in Source::ALL {
                    let h = ch.to_r2(s);
                    want += Complex64::new(power, 0.0) * h[a] * h[b].conj();
                }
                assert!((cov[(a, b)] - want).norm_sqr().sqrt() < 1e-12);
            }
        }
    }

    #[test]
    fn side_relay_presence_does_not_change_the_solution() {
        for seed in 0..20 {
            let with_side = sample_channels(
                Topology::new(TopologyVariant::MultiAntennaRelay(3)),
                seed,
                0.5,
                2.0,
            )
            .unwrap();
            let without = sample_channels(
                Topology::new(TopologyVariant::MultiAntennaRelayOnly(3)),
                seed,
                0.5,
                2.0,
            )
            .unwrap();
            let a = run_mimo_scheme(&with_side, 1000.0).unwrap();
            let b = run_mimo_scheme(&without, 1000.0).unwrap();
            assert_eq!(a.gains, b.gains, "seed {seed}: gains must be bitwise identical");
            assert_eq!(a.rates, b.rates, "seed {seed}: rates must be bitwise identical");
            assert_eq!(a.residuals, b.residuals, "seed {seed}");
        }
    }

    #[test]
    fn mimo_report_noise_amplification_matches_row_norms() {
        let ch = mimo(11, 3);
        let power = 500.0;
        let report = run_mimo_scheme(&ch, power).unwrap();
        let sol = solve_v2(&ch, power).unwrap();
        for d in Dest::ALL {
            let rx = ch.from_r2(d);
            let mut want = 0.0;
            for b in 0..3 {
                let mut e = C0;
                for (a, r) in rx.iter().enumerate() {
                    e += r * sol.v2[(a, b)];
                }
                want += e.norm_sqr();
            }
            assert!((report.noise_amp[d.index()] - want).abs() < 1e-12 * want.max(1.0));
        }
        assert!(report.rates.iter().all(|&r| r > 0.0));
    }

    #[test]
    fn single_antenna_topology_is_rejected() {
        let ch = sample_channels(Topology::new(TopologyVariant::SingleAntennaRelay), 1, 0.5, 2.0)
            .unwrap();
        assert!(matches!(
            build_nulling_system(&ch),
            Err(BeamformError::Unsupported { .. })
        ));
        assert!(matches!(
            run_mimo_scheme(&ch, 1.0),
            Err(SchemeError::UnsupportedScheme { .. })
        ));
    }

    #[test]
    fn parameter_counting_examples() {
        assert_eq!(feasibility_count(2, true), (6, 8, false));
        assert_eq!(feasibility_count(3, false), (9, 8, true));
        assert_eq!(feasibility_count(1, true), (3, 8, false));
        assert_eq!(feasibility_count(3, true), (11, 8, true));
    }

    #[test]
    fn solve_is_deterministic() {
        let ch = mimo(21, 3);
        let a = solve_v2(&ch, 123.0).unwrap();
        let b = solve_v2(&ch, 123.0).unwrap();
        assert_eq!(a, b);
    }
}
