//! Result serialization: JSON for channels, reports, slope estimates, and
//! beamformers; CSV for rate sweeps.
//!
//! Every floating-point number is written with 17 significant digits so a
//! value read back parses to the identical `f64` and repeated runs produce
//! byte-identical files. JSON is emitted by hand to keep that formatting
//! and a fixed key order; reading goes through `serde_json`.

use std::fs;
use std::path::Path;

use butterfly_core::analysis::{DofEstimate, RatePoint};
use butterfly_core::beamform::BeamformingSolution;
use butterfly_core::netmodel::{
    ChannelRealization, Dest, SideChannels, Source, TopologyVariant,
};
use butterfly_core::schemes::SchemeReport;
use butterfly_core::Complex64;

use crate::error::CliError;

/// 17-significant-digit rendering; round-trips every finite `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_complex(z: Complex64) -> String {
    format!("[{}, {}]", fmt_f64(z.re), fmt_f64(z.im))
}

fn fmt_complex_list(zs: &[Complex64]) -> String {
    let inner: Vec<String> = zs.iter().map(|z| fmt_complex(*z)).collect();
    format!("[{}]", inner.join(", "))
}

fn fmt_f64_list(xs: &[f64]) -> String {
    let inner: Vec<String> = xs.iter().map(|x| fmt_f64(*x)).collect();
    format!("[{}]", inner.join(", "))
}

pub fn variant_name(v: TopologyVariant) -> &'static str {
    match v {
        TopologyVariant::SingleAntennaRelay => "single",
        TopologyVariant::MultiAntennaRelay(_) => "mimo",
        TopologyVariant::MultiAntennaRelayOnly(_) => "mimo_no_side",
    }
}

// ---------------------------------------------------------------------------
// Channel realization JSON
// ---------------------------------------------------------------------------

pub fn channels_json(ch: &ChannelRealization) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"variant\": \"{}\",\n", variant_name(ch.variant())));
    out.push_str(&format!("  \"center_antennas\": {},\n", ch.center_antennas()));
    out.push_str(&format!("  \"seed\": {},\n", ch.seed()));
    out.push_str(&format!("  \"h_min\": {},\n", fmt_f64(ch.h_min())));
    out.push_str(&format!("  \"h_max\": {},\n", fmt_f64(ch.h_max())));
    out.push_str("  \"to_r2\": {\n");
    for (i, s) in Source::ALL.iter().enumerate() {
        let comma = if i + 1 < Source::ALL.len() { "," } else { "" };
        out.push_str(&format!(
            "    \"{}\": {}{comma}\n",
            s.tag(),
            fmt_complex_list(ch.to_r2(*s))
        ));
    }
    out.push_str("  },\n");
    out.push_str("  \"from_r2\": {\n");
    for (i, d) in Dest::ALL.iter().enumerate() {
        let comma = if i + 1 < Dest::ALL.len() { "," } else { "" };
        out.push_str(&format!(
            "    \"{}\": {}{comma}\n",
            d.tag(),
            fmt_complex_list(ch.from_r2(*d))
        ));
    }
    out.push_str("  },\n");
    match ch.side() {
        Some(side) => {
            out.push_str("  \"side\": {\n");
            let entries = [
                ("S1->R1", side.s1_r1),
                ("S4->R1", side.s4_r1),
                ("S2->R3", side.s2_r3),
                ("S3->R3", side.s3_r3),
                ("R1->D2", side.r1_d2),
                ("R1->D3", side.r1_d3),
                ("R3->D1", side.r3_d1),
                ("R3->D4", side.r3_d4),
            ];
            for (i, (name, z)) in entries.iter().enumerate() {
                let comma = if i + 1 < entries.len() { "," } else { "" };
                out.push_str(&format!("    \"{name}\": {}{comma}\n", fmt_complex(*z)));
            }
            out.push_str("  }\n");
        }
        None => out.push_str("  \"side\": null\n"),
    }
    out.push_str("}\n");
    out
}

fn json_f64(v: &serde_json::Value, what: &str) -> Result<f64, CliError> {
    v.as_f64()
        .ok_or_else(|| CliError::Config(format!("{what} must be a number")))
}

fn json_complex(v: &serde_json::Value, what: &str) -> Result<Complex64, CliError> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| CliError::Config(format!("{what} must be a [re, im] pair")))?;
    Ok(Complex64::new(
        json_f64(&pair[0], what)?,
        json_f64(&pair[1], what)?,
    ))
}

fn json_complex_vec(v: &serde_json::Value, what: &str) -> Result<Vec<Complex64>, CliError> {
    let list = v
        .as_array()
        .ok_or_else(|| CliError::Config(format!("{what} must be a list of [re, im] pairs")))?;
    list.iter().map(|z| json_complex(z, what)).collect()
}

pub fn load_channels(path: &Path) -> Result<ChannelRealization, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let root: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{} is not valid JSON: {e}", path.display())))?;

    let variant_str = root["variant"]
        .as_str()
        .ok_or_else(|| CliError::Config("channel file needs a \"variant\" string".into()))?;
    let n = root["center_antennas"].as_u64().unwrap_or(1) as usize;
    let variant = match variant_str {
        "single" => TopologyVariant::SingleAntennaRelay,
        "mimo" => TopologyVariant::MultiAntennaRelay(n),
        "mimo_no_side" => TopologyVariant::MultiAntennaRelayOnly(n),
        other => {
            return Err(CliError::Config(format!(
                "unknown topology variant \"{other}\" (expected single, mimo, or mimo_no_side)"
            )))
        }
    };
    let seed = root["seed"].as_u64().unwrap_or(0);
    let h_min = json_f64(&root["h_min"], "h_min")?;
    let h_max = json_f64(&root["h_max"], "h_max")?;

    let mut to_r2: [Vec<Complex64>; 4] = [vec![], vec![], vec![], vec![]];
    for s in Source::ALL {
        to_r2[s.index()] = json_complex_vec(&root["to_r2"][s.tag()], s.tag())?;
    }
    let mut from_r2: [Vec<Complex64>; 4] = [vec![], vec![], vec![], vec![]];
    for d in Dest::ALL {
        from_r2[d.index()] = json_complex_vec(&root["from_r2"][d.tag()], d.tag())?;
    }

    let side = if root["side"].is_null() {
        None
    } else {
        let s = &root["side"];
        Some(SideChannels {
            s1_r1: json_complex(&s["S1->R1"], "S1->R1")?,
            s4_r1: json_complex(&s["S4->R1"], "S4->R1")?,
            s2_r3: json_complex(&s["S2->R3"], "S2->R3")?,
            s3_r3: json_complex(&s["S3->R3"], "S3->R3")?,
            r1_d2: json_complex(&s["R1->D2"], "R1->D2")?,
            r1_d3: json_complex(&s["R1->D3"], "R1->D3")?,
            r3_d1: json_complex(&s["R3->D1"], "R3->D1")?,
            r3_d4: json_complex(&s["R3->D4"], "R3->D4")?,
        })
    };

    ChannelRealization::from_parts(variant, seed, h_min, h_max, to_r2, from_r2, side)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Report, slope, and beamformer JSON
// ---------------------------------------------------------------------------

pub fn report_json(report: &SchemeReport) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"scheme\": \"{}\",\n", report.scheme));
    out.push_str(&format!("  \"power\": {},\n", fmt_f64(report.power)));
    out.push_str(&format!("  \"gains\": {},\n", fmt_complex_list(&report.gains)));
    out.push_str(&format!(
        "  \"residual_max\": {},\n",
        fmt_f64(report.residual_max())
    ));
    out.push_str(&format!(
        "  \"noise_amp\": {},\n",
        fmt_f64_list(&report.noise_amp)
    ));
    out.push_str(&format!("  \"rates\": {},\n", fmt_f64_list(&report.rates)));
    out.push_str(&format!("  \"sum_rate\": {}\n", fmt_f64(report.sum_rate())));
    out.push_str("}\n");
    out
}

pub fn dof_json(est: &DofEstimate) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"slopes\": {},\n", fmt_f64_list(&est.slopes)));
    out.push_str(&format!("  \"total\": {},\n", fmt_f64(est.total)));
    out.push_str(&format!("  \"r2\": {},\n", fmt_f64(est.r_squared)));
    out.push_str(&format!("  \"grid\": {}\n", fmt_f64_list(&est.grid)));
    out.push_str("}\n");
    out
}

pub fn beamformer_json(sol: &BeamformingSolution) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"v1\": {},\n", fmt_complex(sol.v1)));
    out.push_str(&format!("  \"v3\": {},\n", fmt_complex(sol.v3)));
    out.push_str(&format!("  \"V2\": {},\n", fmt_complex_list(sol.v2.data())));
    out.push_str(&format!(
        "  \"residuals\": {},\n",
        fmt_complex_list(&sol.residuals)
    ));
    out.push_str(&format!(
        "  \"desired_gains\": {}\n",
        fmt_complex_list(&sol.desired_gains)
    ));
    out.push_str("}\n");
    out
}

// ---------------------------------------------------------------------------
// Rate sweep CSV
// ---------------------------------------------------------------------------

pub fn write_rates_csv(path: &Path, points: &[RatePoint]) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    writer
        .write_record(["P_dB", "R1", "R2", "R3", "R4", "sum"])
        .map_err(|e| CliError::Io(e.to_string()))?;
    for point in points {
        let p_db = 10.0 * point.power.log10();
        let mut record = vec![fmt_f64(p_db)];
        record.extend(point.rates.iter().map(|r| fmt_f64(*r)));
        record.push(fmt_f64(point.sum));
        writer
            .write_record(&record)
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

pub fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
