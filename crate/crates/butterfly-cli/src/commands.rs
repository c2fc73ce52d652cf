//! Subcommand implementations: sweep orchestration, the verification
//! battery, cut-set bounds, and the parameter-counting table.

use std::fs;
use std::path::Path;

use butterfly_core::analysis::{
    self, genie_cutset_bound, monte_carlo_residual, preset_cut, sample_for_scheme,
};
use butterfly_core::beamform::{
    self, build_nulling_system, cross_check, feasibility_count, generic_nullity, generic_rank,
    solve_v2,
};
use butterfly_core::netmodel::{self, ChannelRealization, Node, Topology, TopologyVariant};
use butterfly_core::rng;
use butterfly_core::schemes::{self, Scheme};

use crate::config::Config;
use crate::error::CliError;
use crate::io;

/// Largest admissible principal angle between the two nullspace routes.
pub const CROSS_CHECK_TOL: f64 = 1e-8;

/// Instances the cross-check battery compares.
pub const CROSS_CHECK_INSTANCES: u64 = 100;

/// Relative slack on the measured average relay transmit power.
pub const POWER_CHECK_TOL: f64 = 0.05;

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn sample_with_warning(
    scheme: Scheme,
    seed: u64,
    cfg: &Config,
) -> Result<ChannelRealization, CliError> {
    let (ch, resamples) = sample_for_scheme(scheme, seed, cfg.h_min, cfg.h_max)?;
    if resamples > 0 {
        eprintln!(
            "warning: seed {seed} drew a degenerate channel; resampled {resamples} time(s)"
        );
    }
    Ok(ch)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

pub fn cmd_simulate(cfg: &Config) -> Result<(), CliError> {
    cfg.validate_for_slope()?;
    let scheme = cfg.scheme()?;
    let powers = cfg.powers()?;
    ensure_out_dir(&cfg.out)?;

    let mut totals = Vec::with_capacity(cfg.trials as usize);
    for t in 0..cfg.trials {
        let trial_seed = cfg.seed + t;
        let ch = sample_with_warning(scheme, trial_seed, cfg)?;

        let points = analysis::sweep(&ch, scheme, &powers)?;
        let est = analysis::dof_slope(&points)?;

        io::write_rates_csv(&cfg.out.join(format!("rates-{trial_seed}.csv")), &points)?;
        io::write_text(
            &cfg.out.join(format!("dof-{trial_seed}.json")),
            &io::dof_json(&est),
        )?;
        io::write_text(
            &cfg.out.join(format!("channels-{trial_seed}.json")),
            &io::channels_json(&ch),
        )?;

        let top_power = *powers.last().expect("validated grid is nonempty");
        if !matches!(scheme, Scheme::TimeShare(_)) {
            let report = analysis::scheme_report(&ch, scheme, top_power)?;
            io::write_text(
                &cfg.out.join(format!("report-{trial_seed}.json")),
                &io::report_json(&report),
            )?;
        }
        if matches!(scheme, Scheme::Mimo { .. }) {
            let sol = solve_v2(&ch, top_power)?;
            io::write_text(
                &cfg.out.join(format!("beamformer-{trial_seed}.json")),
                &io::beamformer_json(&sol),
            )?;
        }

        println!(
            "seed {trial_seed}: slopes [{:.4}, {:.4}, {:.4}, {:.4}] total {:.4} r2 {:.6}",
            est.slopes[0], est.slopes[1], est.slopes[2], est.slopes[3], est.total, est.r_squared
        );
        totals.push(est.total);
    }

    let mean: f64 = totals.iter().sum::<f64>() / totals.len() as f64;
    println!(
        "{} over {} trial(s): mean total slope {mean:.4}; outputs in {}",
        cfg.scheme,
        cfg.trials,
        cfg.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct CheckLog {
    failures: Vec<String>,
}

impl CheckLog {
    fn new() -> Self {
        CheckLog { failures: Vec::new() }
    }

    fn record(&mut self, name: &str, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("{name}: {verdict} ({detail})");
        if !pass {
            self.failures.push(format!("{name} ({detail})"));
        }
    }

    fn finish(self) -> Result<(), CliError> {
        if self.failures.is_empty() {
            Ok(())
        } else {
            Err(CliError::Verification(self.failures.join("; ")))
        }
    }
}

/// Probe a serialized channel file for the degeneracies its topology can hit.
pub fn cmd_verify_channels(path: &Path) -> Result<(), CliError> {
    let ch = io::load_channels(path)?;
    match ch.variant() {
        TopologyVariant::SingleAntennaRelay => {
            let gains = schemes::cache_delivery_gains(&ch)?;
            println!(
                "channel file {} ok: cache delivery gains [{:.3e}, {:.3e}, {:.3e}, {:.3e}]",
                path.display(),
                gains.desired[0].norm_sqr().sqrt(),
                gains.desired[1].norm_sqr().sqrt(),
                gains.desired[2].norm_sqr().sqrt(),
                gains.desired[3].norm_sqr().sqrt()
            );
        }
        _ => {
            let sol = beamform::solve_unit_v2(&ch)?;
            println!(
                "channel file {} ok: nulling residual max {:.3e}",
                path.display(),
                sol.residual_max()
            );
        }
    }
    Ok(())
}

pub fn cmd_verify(cfg: &Config, trials: u64) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Config(String::from("verify needs at least one trial")));
    }
    let mut log = CheckLog::new();
    let mimo = Scheme::Mimo { use_side_relays: true };

    for (label, scheme) in [("cache", Scheme::Cache), ("mimo", mimo)] {
        let survey = monte_carlo_residual(scheme, trials, cfg.seed, cfg.h_min, cfg.h_max)?;
        log.record(
            &format!("residual({label}) <= {:.1e}", cfg.tol_residual),
            survey.max_relative <= cfg.tol_residual,
            format!(
                "max {:.3e} over {} trials, {} resample(s)",
                survey.max_relative, survey.trials, survey.resamples
            ),
        );
    }

    let want_rank = generic_rank(3);
    let want_dim = generic_nullity(3);
    let mut census_hits: u64 = 0;
    let mut angle_max = 0.0f64;
    let mut angle_checked: u64 = 0;
    let mut angle_all_finite = true;
    for t in 0..trials {
        let trial_seed = rng::sub_seed(cfg.seed, "census", t);
        let ch = sample_with_warning(mimo, trial_seed, cfg)?;
        let system = build_nulling_system(&ch)?;
        if angle_checked < CROSS_CHECK_INSTANCES {
            let check = cross_check(&system.matrix, cfg.tol_rank)?;
            if check.qr.rank == want_rank && check.qr.dim() == want_dim {
                census_hits += 1;
            }
            match check.principal_angle {
                Some(angle) => angle_max = angle_max.max(angle),
                None => angle_all_finite = false,
            }
            angle_checked += 1;
        } else {
            let null = beamform::nullspace(&system.matrix, cfg.tol_rank)?;
            if null.rank == want_rank && null.dim() == want_dim {
                census_hits += 1;
            }
        }
    }
    log.record(
        &format!("nullspace census: rank {want_rank}, dim={want_dim}"),
        census_hits == trials,
        format!("{census_hits}/{trials}"),
    );
    log.record(
        &format!("cross-check principal angle <= {CROSS_CHECK_TOL:.0e}"),
        angle_all_finite && angle_max <= CROSS_CHECK_TOL,
        format!("max {angle_max:.3e} over {angle_checked} instances"),
    );

    let single = Topology::new(TopologyVariant::SingleAntennaRelay);
    let ch = netmodel::sample_channels(single, cfg.seed, cfg.h_min, cfg.h_max)?;
    let bound = genie_cutset_bound(&preset_cut(ch.variant()), &ch)?;
    log.record(
        "genie bound=2",
        bound.total == 2,
        format!("forward {} reverse {}", bound.forward, bound.reverse),
    );

    let power = 100.0;
    let frames = schemes::af_frames(&ch, power, cfg.seed, cfg.frame_slots, true)?;
    let first_silent = frames[0].relay_tx.r2[0].norm_sqr() == 0.0;
    let mean_power: f64 = frames
        .iter()
        .map(|f| f.relay_tx.r2[0].norm_sqr())
        .sum::<f64>()
        / frames.len() as f64;
    let power_ok = (mean_power / power - 1.0).abs() <= POWER_CHECK_TOL;
    log.record(
        &format!("relay power within {:.0}% over {} slots", POWER_CHECK_TOL * 100.0, cfg.frame_slots),
        first_silent && power_ok,
        format!("mean {mean_power:.2} vs {power:.0}, first slot silent: {first_silent}"),
    );

    log.finish()
}

// ---------------------------------------------------------------------------
// bound
// ---------------------------------------------------------------------------

fn cut_side_tags(nodes: &[Node]) -> String {
    let tags: Vec<&str> = nodes.iter().map(|n| n.tag()).collect();
    format!("{{{}}}", tags.join(", "))
}

pub fn cmd_bound(cfg: &Config) -> Result<(), CliError> {
    let scheme = cfg.scheme()?;
    let variant = cfg.variant()?;
    let ch = netmodel::sample_channels(Topology::new(variant), cfg.seed, cfg.h_min, cfg.h_max)?;

    let cut = match &cfg.cut {
        Some(c) => c.clone(),
        None => preset_cut(variant),
    };
    let bound = genie_cutset_bound(&cut, &ch)?;
    let bridge_tags: Vec<&str> = cut.bridge.iter().map(|r| r.tag()).collect();
    println!(
        "cut: {} | [{}] | {}",
        cut_side_tags(&cut.left),
        bridge_tags.join(", "),
        cut_side_tags(&cut.right)
    );
    println!(
        "bound: forward {} reverse {} total {}",
        bound.forward, bound.reverse, bound.total
    );

    match cfg.validate_for_slope() {
        Ok(()) => {
            let run_ch = sample_with_warning(scheme, cfg.seed, cfg)?;
            let est = analysis::measure_dof(&run_ch, scheme, &cfg.powers()?)?;
            println!("measured slope ({}): {:.4}", cfg.scheme, est.total);
        }
        Err(_) => println!("measured slope ({}): skipped, grid too narrow", cfg.scheme),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// feasibility
// ---------------------------------------------------------------------------

pub fn cmd_feasibility() -> Result<(), CliError> {
    println!("antennas  side_scalars  params  constraints  feasible");
    for n in 1..=3usize {
        for side in [true, false] {
            let (params, constraints, feasible) = feasibility_count(n, side);
            println!(
                "{n:<8}  {:<12}  {params:<6}  {constraints:<11}  {}",
                if side { "yes" } else { "no" },
                if feasible { "yes" } else { "no" }
            );
        }
    }
    Ok(())
}
