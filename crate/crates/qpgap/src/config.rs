//! Device configuration files.
//!
//! A config is a JSON object carrying `schema_version`; see
//! `docs/schema.md` for every field. Parsing is strict: unknown keys are
//! rejected so a misspelt field cannot silently fall back to a default.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qpgap_core::dynamics::{NoiseModel, ParityRateModel};
use qpgap_core::physcore::{Constants, BCS_RATIO};
use qpgap_core::quasiparticle::{
    profile_from_stack, GapProfile, QpEnvironment, StackSegment, ThicknessTcTable,
    DEFAULT_BARRIER_SAFETY,
};
use qpgap_core::transmon::{
    fit_ej_ec, CavityCoupling, FrequencyTargets, TransmonFit, TransmonParams,
};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub transmon: TransmonSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavitySpec>,
    pub gap_profile: GapProfileSpec,
    #[serde(default)]
    pub qp: QpSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub coherence: CoherenceSpec,
    #[serde(default)]
    pub seed: u64,
}

/// Either `(ej_ghz, ec_ghz)` or `targets`, never both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmonSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ej_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ec_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<TargetsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsSpec {
    pub f_ge_ng0_ghz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_ge_ng05_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_ef_ghz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySpec {
    /// g / 2 pi, MHz.
    pub g_mhz: f64,
    pub nu_r_ghz: f64,
    pub q_loaded: f64,
    /// Measured chi / 2 pi in MHz; used by `fit t2` in place of the
    /// computed value when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_mhz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapProfileSpec {
    pub segments: Vec<SegmentSpec>,
    pub junction_um: f64,
    /// `[thickness_nm, tc_k]` anchors for thickness-specified segments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness_tc: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub length_um: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness_nm: Option<f64>,
    #[serde(default, rename = "delta_K", skip_serializing_if = "Option::is_none")]
    pub delta_k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QpSpec {
    pub x_nqp: f64,
    pub diffusion_m2_s: f64,
    /// `[energy above gap K, tau_eps s]` anchors.
    pub tau_anchors: Vec<[f64; 2]>,
    pub xi_um: f64,
    pub nu0_per_ev_um3: f64,
    pub t_qp_k: f64,
    /// Tc of the junction electrodes for the decay-rate and thermal
    /// formulas. Defaults to the lower junction-adjacent gap of the profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub junction_tc_k: Option<f64>,
    pub barrier_safety: f64,
    pub bcs_ratio: f64,
}

impl Default for QpSpec {
    fn default() -> Self {
        let env = QpEnvironment::default();
        QpSpec {
            x_nqp: env.x_nqp,
            diffusion_m2_s: env.diffusion_m2_s,
            tau_anchors: env.tau_anchors.iter().map(|&(e, t)| [e, t]).collect(),
            xi_um: env.xi_um,
            nu0_per_ev_um3: env.nu0_per_ev_um3,
            t_qp_k: env.t_qp_k,
            junction_tc_k: None,
            barrier_safety: DEFAULT_BARRIER_SAFETY,
            bcs_ratio: BCS_RATIO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Fixed parity rate, s^-1. When absent the rate follows from the gap
    /// profile at the scan temperature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_parity: Option<f64>,
    pub tls_rate_per_s: f64,
    pub jump_max: f64,
    pub base_rate_per_s: f64,
    pub c_th_per_s: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        let n = NoiseModel::default();
        let r = ParityRateModel::default();
        NoiseSpec {
            gamma_parity: None,
            tls_rate_per_s: n.tls_rate,
            jump_max: n.jump_max,
            base_rate_per_s: r.base_rate,
            c_th_per_s: r.c_th,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    /// Frequency grid; derived from the branch frequencies when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_min_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_max_ghz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_freq: Option<usize>,
    pub pixel_time_s: f64,
    pub repetitions: u32,
    pub linewidth_mhz: f64,
    pub snr: f64,
    pub duration_s: f64,
    pub temperature_k: f64,
    pub initial_ng: f64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            f_min_ghz: None,
            f_max_ghz: None,
            n_freq: None,
            pixel_time_s: 0.2,
            repetitions: 100,
            linewidth_mhz: 1.0,
            snr: 20.0,
            duration_s: 60.0,
            temperature_k: 0.03,
            initial_ng: 0.1,
        }
    }
}

/// Base-temperature coherence and the generators for synthetic data.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_us: Option<f64>,
    /// Thermal-photon floor of the readout resonator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonator_n0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dephasing_offset_per_s: Option<f64>,
}

/// A config resolved into model objects.
#[derive(Debug, Clone)]
pub struct Device {
    pub config: DeviceConfig,
    pub params: TransmonParams,
    /// Present when the parameters came from frequency targets.
    pub transmon_fit: Option<TransmonFit>,
    pub coupling: Option<CavityCoupling>,
    pub profile: GapProfile,
    pub env: QpEnvironment,
    pub constants: Constants,
    pub rate_model: ParityRateModel,
    pub config_hash: String,
}

impl Device {
    /// Gap of the junction electrodes used in the qubit-level formulas, K.
    pub fn junction_delta_k(&self) -> f64 {
        match self.config.qp.junction_tc_k {
            Some(tc) => self.constants.bcs_ratio * tc,
            None => self.profile.junction_delta(),
        }
    }

    pub fn noise_model(&self, gamma_parity: f64) -> NoiseModel {
        NoiseModel {
            gamma_parity,
            tls_rate: self.config.noise.tls_rate_per_s,
            jump_max: self.config.noise.jump_max,
        }
    }

    /// Parity rate at `t_k`: the configured override or the profile model.
    pub fn parity_rate(&self, t_k: f64) -> CliResult<f64> {
        match self.config.noise.gamma_parity {
            Some(g) => Ok(g),
            None => Ok(self.rate_model.rate(&self.profile, &self.env, t_k)?),
        }
    }
}

/// 1-based line of the first occurrence of `"key"` in `text`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.find(&needle)
        .map(|at| text[..at].matches('\n').count() + 1)
}

fn invalid(text: &str, key: &str, msg: impl std::fmt::Display) -> CliError {
    match line_of(text, key) {
        Some(line) => CliError::Input(format!("line {line}: `{key}`: {msg}")),
        None => CliError::Input(format!("`{key}`: {msg}")),
    }
}

/// Canonical hash of a config: SHA-256 of its compact serialisation, so
/// whitespace and key order in the file do not matter.
pub fn config_hash(config: &DeviceConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("config serialises");
    hex::encode(Sha256::digest(&canonical))
}

pub fn parse_config(text: &str) -> CliResult<DeviceConfig> {
    let config: DeviceConfig = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("line {} column {}: {e}", e.line(), e.column())))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(invalid(
            text,
            "schema_version",
            format!(
                "unsupported version {} (expected {SCHEMA_VERSION})",
                config.schema_version
            ),
        ));
    }
    Ok(config)
}

pub fn load_config(path: &std::path::Path) -> CliResult<DeviceConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| e.context(&path.display().to_string()))
}

pub fn load_device(path: &std::path::Path) -> CliResult<Device> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    resolve_text(&text).map_err(|e| e.context(&path.display().to_string()))
}

/// Parses and validates a config, fitting (E_J, E_C) from frequency
/// targets when those are given.
pub fn resolve_text(text: &str) -> CliResult<Device> {
    let config = parse_config(text)?;
    resolve(config, text)
}

fn resolve(config: DeviceConfig, text: &str) -> CliResult<Device> {
    let t = &config.transmon;
    let (params, transmon_fit) = match (t.ej_ghz, t.ec_ghz, &t.targets) {
        (Some(ej), Some(ec), None) => (
            TransmonParams::new(ej, ec, 0.0).map_err(|e| invalid(text, "ej_ghz", e))?,
            None,
        ),
        (None, None, Some(tg)) => {
            let fit = fit_ej_ec(&FrequencyTargets {
                f_ge_ng0_ghz: tg.f_ge_ng0_ghz,
                f_ge_ng05_ghz: tg.f_ge_ng05_ghz,
                f_ef_ghz: tg.f_ef_ghz,
            })
            .map_err(|e| {
                if e.is_numerical() {
                    CliError::from(e)
                } else {
                    invalid(text, "targets", e)
                }
            })?;
            (fit.params, Some(fit))
        }
        _ => {
            return Err(invalid(
                text,
                "transmon",
                "give either both `ej_ghz` and `ec_ghz` or `targets`, not both",
            ))
        }
    };
    let params = params.with_truncation(t.truncation.unwrap_or(0));

    let coupling = config
        .cavity
        .as_ref()
        .map(|c| CavityCoupling::new(c.g_mhz, c.nu_r_ghz, c.q_loaded))
        .transpose()
        .map_err(|e| invalid(text, "cavity", e))?;

    let q = &config.qp;
    if !(q.bcs_ratio > 0.0) {
        return Err(invalid(text, "bcs_ratio", "must be positive"));
    }
    let constants = Constants::with_bcs_ratio(q.bcs_ratio);
    let env = QpEnvironment {
        x_nqp: q.x_nqp,
        diffusion_m2_s: q.diffusion_m2_s,
        tau_anchors: q.tau_anchors.iter().map(|a| (a[0], a[1])).collect(),
        xi_um: q.xi_um,
        nu0_per_ev_um3: q.nu0_per_ev_um3,
        t_qp_k: q.t_qp_k,
    };
    env.validate().map_err(|e| invalid(text, "qp", e))?;
    if let Some(tc) = q.junction_tc_k {
        if !(tc > 0.0 && tc.is_finite()) {
            return Err(invalid(text, "junction_tc_k", "must be positive"));
        }
    }
    if !(3.0..=5.0).contains(&q.barrier_safety) {
        return Err(invalid(text, "barrier_safety", "must lie in [3, 5]"));
    }

    let g = &config.gap_profile;
    let table = match &g.thickness_tc {
        Some(a) => ThicknessTcTable::new(a.iter().map(|p| (p[0], p[1])).collect())
            .map_err(|e| invalid(text, "thickness_tc", e))?,
        None => ThicknessTcTable::default(),
    };
    let mut stack = Vec::with_capacity(g.segments.len());
    for (i, s) in g.segments.iter().enumerate() {
        stack.push(match (s.thickness_nm, s.delta_k) {
            (Some(nm), None) => StackSegment::thickness(s.length_um, nm),
            (None, Some(d)) => StackSegment::delta(s.length_um, d),
            _ => {
                return Err(invalid(
                    text,
                    "segments",
                    format!("segment {i}: give exactly one of `thickness_nm` and `delta_K`"),
                ))
            }
        });
    }
    let profile = profile_from_stack(&stack, g.junction_um, &table, &constants)
        .map_err(|e| invalid(text, "gap_profile", e))?;

    let n = &config.noise;
    let rate_model = ParityRateModel {
        base_rate: n.base_rate_per_s,
        c_th: n.c_th_per_s,
        safety: q.barrier_safety,
    };
    if !(n.base_rate_per_s >= 0.0 && n.c_th_per_s >= 0.0) {
        return Err(invalid(text, "noise", "rates must be non-negative"));
    }
    NoiseModel {
        gamma_parity: n.gamma_parity.unwrap_or(0.0),
        tls_rate: n.tls_rate_per_s,
        jump_max: n.jump_max,
    }
    .validate()
    .map_err(|e| invalid(text, "noise", e))?;

    let s = &config.scan;
    let scan_ok = s.pixel_time_s > 0.0
        && s.repetitions > 0
        && s.linewidth_mhz > 0.0
        && s.snr > 0.0
        && s.duration_s > 0.0
        && s.temperature_k > 0.0
        && s.initial_ng.is_finite();
    if !scan_ok {
        return Err(invalid(
            text,
            "scan",
            "times, linewidth, SNR and temperature must be positive",
        ));
    }
    let grid = [
        s.f_min_ghz.is_some(),
        s.f_max_ghz.is_some(),
        s.n_freq.is_some(),
    ];
    if grid.iter().any(|&b| b) && !grid.iter().all(|&b| b) {
        return Err(invalid(
            text,
            "scan",
            "give all of f_min_ghz, f_max_ghz and n_freq or none",
        ));
    }

    let c = &config.coherence;
    for (key, v) in [("t1_us", c.t1_us), ("t2_us", c.t2_us)] {
        if v.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
            return Err(invalid(text, key, "must be positive"));
        }
    }

    Ok(Device {
        config_hash: config_hash(&config),
        config,
        params,
        transmon_fit,
        coupling,
        profile,
        env,
        constants,
        rate_model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "schema_version": 1,
  "name": "t",
  "transmon": { "ej_ghz": 7.417, "ec_ghz": 0.403 },
  "gap_profile": {
    "segments": [ { "length_um": 5, "thickness_nm": 25 }, { "length_um": 5, "delta_K": 2.0 } ],
    "junction_um": 5
  }
}"#;

    #[test]
    fn minimal_config_resolves() {
        let d = resolve_text(MINIMAL).unwrap();
        assert_eq!(d.params.ej_ghz, 7.417);
        assert_eq!(d.config.scan, ScanSpec::default());
        assert_eq!(d.profile.segments().len(), 2);
    }

    #[test]
    fn round_trip_is_lossless() {
        let c = parse_config(MINIMAL).unwrap();
        let text = serde_json::to_string_pretty(&c).unwrap();
        assert_eq!(parse_config(&text).unwrap(), c);
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = parse_config(MINIMAL).unwrap();
        let compact: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        let b = parse_config(&compact.to_string()).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        let mut c = a.clone();
        c.seed = 1;
        assert_ne!(config_hash(&a), config_hash(&c));
    }

    #[test]
    fn syntax_error_names_the_line() {
        let broken = MINIMAL.replace("\"ec_ghz\": 0.403", "\"ec_ghz\": ");
        let CliError::Input(msg) = resolve_text(&broken).unwrap_err() else {
            panic!()
        };
        assert!(msg.starts_with("line 4"), "{msg}");
    }

    #[test]
    fn semantic_error_names_the_line() {
        let bad = MINIMAL.replace("\"ec_ghz\": 0.403", "\"ec_ghz\": -1");
        let e = resolve_text(&bad).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("line 4"), "{e}");
        let both = MINIMAL.replace(
            "\"ec_ghz\": 0.403",
            "\"ec_ghz\": 0.403, \"targets\": { \"f_ge_ng0_ghz\": 4.4, \"f_ef_ghz\": 4.0 }",
        );
        assert!(resolve_text(&both).is_err());
    }

    #[test]
    fn unknown_field_and_version_rejected() {
        let typo = MINIMAL
            .replace("\"seed\"", "\"sead\"")
            .replace("\"name\": \"t\"", "\"name\": \"t\", \"sead\": 1");
        assert!(resolve_text(&typo).is_err());
        let v2 = MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 2");
        let e = resolve_text(&v2).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn segment_needs_exactly_one_gap_spec() {
        let bad = MINIMAL.replace(
            "\"thickness_nm\": 25",
            "\"thickness_nm\": 25, \"delta_K\": 2.2",
        );
        assert!(resolve_text(&bad)
            .unwrap_err()
            .to_string()
            .contains("segment 0"));
    }

    #[test]
    fn targets_trigger_inversion() {
        let t = MINIMAL.replace(
            "\"ej_ghz\": 7.417, \"ec_ghz\": 0.403",
            "\"targets\": { \"f_ge_ng0_ghz\": 4.448, \"f_ge_ng05_ghz\": 4.438 }",
        );
        let d = resolve_text(&t).unwrap();
        assert!(d.transmon_fit.is_some());
        assert!(
            (d.params.ej_ghz / d.params.ec_ghz - 18.4).abs() < 2.0,
            "{:?}",
            d.params
        );
    }
}
