//! The subcommands as pure functions from inputs to output files.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use qpgap_core::dynamics::{
    estimate_parity_lifetime, simulate_offset_charge, simulate_parity, LifetimeVerdict, Parity,
    PeakDetector, ScanConfig, ScanPlan, SpectroscopyScan,
};
use qpgap_core::fitting::{
    default_temperatures, fit_t1_vs_temperature, fit_t2_vs_temperature, synthesize_t1,
    synthesize_t2, DataSeries, FitResult, SeriesKind, ShotNoise, T1Model, T1Params,
};
use qpgap_core::physcore::{kelvin_to_ev, kelvin_to_ghz};
use qpgap_core::quasiparticle::{
    barrier_adequate, crossover_temperature, diffusion_length, nqp_decay_rate, thermal_qp_fraction,
    trap_adequate, volume_density, x_from_rate, BarrierVerdict, TrapVerdict,
};
use qpgap_core::transmon::{
    charge_dispersion, chi, eigenspectrum, parity_frequencies, resonator_dispersion, Transition,
};

use crate::config::Device;
use crate::data::series_table;
use crate::error::{CliError, CliResult};
use crate::svg::{self, Series, Style};
use crate::table::{Cell, Format, Table};

/// Files produced by a command, named relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub files: Vec<(String, Vec<u8>)>,
    /// File printed to stdout when no output directory is given.
    pub primary: usize,
    /// Human-readable summary lines.
    pub summary: String,
}

impl Output {
    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|f| f.0 == name)
            .map(|f| f.1.as_slice())
    }

    pub fn primary_bytes(&self) -> &[u8] {
        &self.files[self.primary].1
    }

    /// Every non-SVG file, the outputs that must be byte-reproducible.
    pub fn data_files(&self) -> impl Iterator<Item = &(String, Vec<u8>)> {
        self.files.iter().filter(|f| !f.0.ends_with(".svg"))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub format: Format,
    pub svg: bool,
    pub seed: Option<u64>,
}

fn metadata(
    command: &str,
    device: &Device,
    seed: Option<u64>,
    summary: Map<String, Value>,
) -> Vec<u8> {
    let v = json!({
        "command": command,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "device": device.config.name,
        "config_hash": device.config_hash,
        "seed": seed,
        "summary": Value::Object(summary),
    });
    let mut s = serde_json::to_vec_pretty(&v).expect("json");
    s.push(b'\n');
    s
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn table_file(stem: &str, table: &Table, format: &Format) -> (String, Vec<u8>) {
    (
        format!("{stem}.{}", format.extension()),
        table.render(format),
    )
}

// ---------------------------------------------------------------- spectrum

pub struct SpectrumArgs {
    /// Number of intervals on `n_g` in `[0, 1/2]`.
    pub ng_steps: usize,
}

impl Default for SpectrumArgs {
    fn default() -> Self {
        SpectrumArgs { ng_steps: 50 }
    }
}

pub fn spectrum(device: &Device, args: &SpectrumArgs, opts: &Options) -> CliResult<Output> {
    if args.ng_steps == 0 {
        return Err(CliError::input("--ng-steps must be at least 1"));
    }
    let p = device.params;
    let mut table = Table::new([
        "ng",
        "f_ge_ghz",
        "f_ef_ghz",
        "f_ge_odd_ghz",
        "parity_splitting_ghz",
    ]);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=args.ng_steps {
        let ng = 0.5 * i as f64 / args.ng_steps as f64;
        let s = eigenspectrum(&p.with_ng(ng), 3)?;
        let pf = parity_frequencies(&p.with_ng(ng))?;
        lo = lo.min(s.f_ge());
        hi = hi.max(s.f_ge());
        table.push(vec![
            ng.into(),
            s.f_ge().into(),
            s.f_ef().into(),
            pf.odd_ghz.into(),
            pf.splitting().into(),
        ]);
    }
    let eps_ge = charge_dispersion(&p, Transition::Ge)?;
    let eps_ef = charge_dispersion(&p, Transition::Ef)?;
    let s0 = eigenspectrum(&p, 3)?;

    let mut sum = Map::new();
    sum.insert("ej_ghz".into(), num(p.ej_ghz));
    sum.insert("ec_ghz".into(), num(p.ec_ghz));
    sum.insert("ej_over_ec".into(), num(p.ej_over_ec()));
    sum.insert("f_ge_min_ghz".into(), num(lo));
    sum.insert("f_ge_max_ghz".into(), num(hi));
    sum.insert("eps_ge_ghz".into(), num(eps_ge));
    sum.insert("eps_ef_ghz".into(), num(eps_ef));
    sum.insert("anharmonicity_ghz".into(), num(s0.f_ef() - s0.f_ge()));
    let mut text = format!(
        "{}: EJ = {} GHz, EC = {} GHz, EJ/EC = {:.1}\n\
         f_ge = {lo:.4}-{hi:.4} GHz, eps_ge = {eps_ge:.4} GHz, eps_ef = {eps_ef:.4} GHz\n",
        device.config.name,
        p.ej_ghz,
        p.ec_ghz,
        p.ej_over_ec()
    );
    if let Some(fit) = &device.transmon_fit {
        sum.insert(
            "fit_residuals_ghz".into(),
            Value::Array(fit.residuals_ghz.iter().map(|&r| num(r)).collect()),
        );
        text.push_str(&format!(
            "EJ, EC inverted from frequency targets in {} iterations\n",
            fit.iterations
        ));
    }
    if let Some(c) = &device.coupling {
        // the dispersive sum has its own validity condition; report rather than fail
        let chis: Vec<Value> = [0.0, 0.5]
            .iter()
            .map(|&ng| chi(&p.with_ng(ng), c).map_or(Value::Null, num))
            .collect();
        let chi0 = chis[0].clone();
        let chi5 = chis[1].clone();
        sum.insert("chi_ng0_mhz".into(), chi0.clone());
        sum.insert("chi_ng05_mhz".into(), chi5.clone());
        sum.insert("kappa_mhz".into(), num(c.kappa_mhz()));
        let disp = resonator_dispersion(&p, c);
        sum.insert(
            "resonator_dispersion_khz".into(),
            disp.as_ref().map_or(Value::Null, |&v| num(v)),
        );
        match chi(&p, c) {
            Ok(x) => text.push_str(&format!(
                "chi(ng=0) = {x:.3} MHz, kappa = {:.3} MHz\n",
                c.kappa_mhz()
            )),
            Err(e) => text.push_str(&format!("chi unavailable: {e}\n")),
        }
    }
    let mut files = vec![table_file("spectrum", &table, &opts.format)];
    files.push((
        "spectrum_meta.json".into(),
        metadata("spectrum", device, None, sum),
    ));
    if opts.svg {
        let col = |j: usize| -> Vec<(f64, f64)> {
            table
                .rows
                .iter()
                .filter_map(|r| match (&r[0], &r[j]) {
                    (Cell::Num(a), Cell::Num(b)) => Some((*a, *b)),
                    _ => None,
                })
                .collect()
        };
        files.push((
            "spectrum.svg".into(),
            svg::chart(
                &format!("{}: g-e transition", device.config.name),
                "offset charge ng",
                "frequency (GHz)",
                &[
                    Series {
                        label: "even".into(),
                        points: col(1),
                        style: Style::Line,
                    },
                    Series {
                        label: "odd".into(),
                        points: col(3),
                        style: Style::Line,
                    },
                ],
                false,
            )
            .into_bytes(),
        ));
    }
    Ok(Output {
        files,
        primary: 0,
        summary: text,
    })
}

// ---------------------------------------------------------------------- qp

pub struct QpArgs {
    pub temperatures_k: Vec<f64>,
}

impl Default for QpArgs {
    fn default() -> Self {
        QpArgs {
            temperatures_k: (0..15).map(|i| 0.02 + 0.02 * i as f64).collect(),
        }
    }
}

/// `start:stop:count` (inclusive) or a comma-separated list, in K.
pub fn parse_temperature_grid(s: &str) -> CliResult<Vec<f64>> {
    let bad = || {
        CliError::input(format!(
            "bad temperature grid {s:?}: use start:stop:count or a,b,c"
        ))
    };
    let grid: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        match n {
            0 => return Err(bad()),
            1 => vec![a],
            _ => (0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    } else {
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<CliResult<_>>()?
    };
    if grid.is_empty() || grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(CliError::input(format!(
            "temperatures must be positive: {s:?}"
        )));
    }
    Ok(grid)
}

pub fn barrier_text(v: &BarrierVerdict) -> String {
    if v.protected() {
        format!("protected (margin {:.0}x)", v.margin())
    } else {
        "unprotected".into()
    }
}

pub fn trap_text(v: &TrapVerdict) -> String {
    if v.adequate() {
        "adequate".into()
    } else {
        let worst = [v.left, v.right]
            .into_iter()
            .filter(|s| !s.adequate())
            .max_by(|a, b| (a.required_um - a.length_um).total_cmp(&(b.required_um - b.length_um)))
            .expect("an inadequate side");
        if worst.depth_k > 0.0 {
            format!(
                "inadequate (trap {:.3} um, diffusion length {:.0} um)",
                worst.length_um, worst.required_um
            )
        } else {
            "inadequate (no trap)".into()
        }
    }
}

pub fn qp(device: &Device, args: &QpArgs, opts: &Options) -> CliResult<Output> {
    if args.temperatures_k.is_empty() {
        return Err(CliError::input("empty temperature grid"));
    }
    let p = device.params;
    let env = &device.env;
    let delta_k = device.junction_delta_k();
    let delta_ghz = kelvin_to_ghz(delta_k);
    let delta_ev = kelvin_to_ev(delta_k);
    let f_ge = eigenspectrum(&p, 2)?.f_ge();

    let mut table = Table::new([
        "T_K",
        "x_qp",
        "x_thermal",
        "gamma1_qp_per_s",
        "parity_rate_per_s",
    ]);
    for &t in &args.temperatures_k {
        let x = thermal_qp_fraction(t, delta_k, env.x_nqp)?;
        table.push(vec![
            t.into(),
            x.into(),
            (x - env.x_nqp).into(),
            nqp_decay_rate(p.ej_ghz, p.ec_ghz, f_ge, delta_ghz, x)?.into(),
            device.rate_model.rate(&device.profile, env, t)?.into(),
        ]);
    }

    let crossover = crossover_temperature(env.x_nqp, delta_k)?;
    let n_env = volume_density(env.x_nqp, env.nu0_per_ev_um3, delta_ev)?;
    let barrier = barrier_adequate(&device.profile, env, device.rate_model.safety)?;
    let trap = trap_adequate(&device.profile, env)?;
    let l_half_kelvin = diffusion_length(0.5, env)?;

    let mut sum = Map::new();
    sum.insert("junction_delta_K".into(), num(delta_k));
    sum.insert("x_nqp".into(), num(env.x_nqp));
    sum.insert("crossover_K".into(), num(crossover));
    sum.insert("n_nqp_per_um3".into(), num(n_env));
    sum.insert("diffusion_length_0p5K_um".into(), num(l_half_kelvin));
    sum.insert(
        "tunnelling_barrier_K".into(),
        num(device.profile.tunnelling_barrier()),
    );
    sum.insert("barrier".into(), Value::from(barrier_text(&barrier)));
    sum.insert("barrier_margin".into(), num(barrier.margin()));
    sum.insert("trap".into(), Value::from(trap_text(&trap)));
    let mut text = format!(
        "{}: junction gap {delta_k:.3} K\n\
         x_nqp = {:.3e}: crossover {:.1} mK, n_nqp = {n_env:.2} um^-3\n\
         L_eps(0.5 K) = {l_half_kelvin:.0} um\n",
        device.config.name,
        env.x_nqp,
        crossover * 1e3
    );
    if let Some(t1_us) = device.config.coherence.t1_us {
        let x = x_from_rate(p.ej_ghz, p.ec_ghz, f_ge, delta_ghz, 1e6 / t1_us)?;
        let n = volume_density(x, env.nu0_per_ev_um3, delta_ev)?;
        sum.insert("t1_us".into(), num(t1_us));
        sum.insert("x_from_t1".into(), num(x));
        sum.insert("n_from_t1_per_um3".into(), num(n));
        text.push_str(&format!(
            "T1 = {t1_us} us read as QP limited: x = {x:.3e}, n = {n:.2} um^-3\n"
        ));
    }
    text.push_str(&format!(
        "barrier: {}; trap: {}\n",
        barrier_text(&barrier),
        trap_text(&trap)
    ));

    let mut files = vec![table_file("qp", &table, &opts.format)];
    files.push(("qp_meta.json".into(), metadata("qp", device, None, sum)));
    if opts.svg {
        let col = |j: usize| -> Vec<(f64, f64)> {
            table
                .rows
                .iter()
                .filter_map(|r| match (&r[0], &r[j]) {
                    (Cell::Num(a), Cell::Num(b)) => Some((*a, *b)),
                    _ => None,
                })
                .collect()
        };
        files.push((
            "qp.svg".into(),
            svg::chart(
                &format!("{}: QP rates", device.config.name),
                "T (K)",
                "rate (1/s)",
                &[
                    Series {
                        label: "gamma1 (QP)".into(),
                        points: col(3),
                        style: Style::Line,
                    },
                    Series {
                        label: "parity".into(),
                        points: col(4),
                        style: Style::Line,
                    },
                ],
                true,
            )
            .into_bytes(),
        ));
    }
    Ok(Output {
        files,
        primary: 0,
        summary: text,
    })
}

// --------------------------------------------------------------- parity-sim

#[derive(Debug, Clone, Default)]
pub struct ParitySimArgs {
    pub duration_s: Option<f64>,
    pub temperature_k: Option<f64>,
}

/// Grid covering both branches over all offset charges with a margin of
/// six linewidths and five points per linewidth.
pub fn auto_grid(device: &Device) -> CliResult<ScanConfig> {
    let s = &device.config.scan;
    if let (Some(a), Some(b), Some(n)) = (s.f_min_ghz, s.f_max_ghz, s.n_freq) {
        return Ok(ScanConfig::new(a, b, n));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for ng in [0.0, 0.25, 0.5] {
        let pf = parity_frequencies(&device.params.with_ng(ng))?;
        lo = lo.min(pf.even_ghz.min(pf.odd_ghz));
        hi = hi.max(pf.even_ghz.max(pf.odd_ghz));
    }
    let lw = s.linewidth_mhz * 1e-3;
    let (a, b) = (lo - 6.0 * lw, hi + 6.0 * lw);
    let n = ((b - a) / (lw / 5.0)).ceil() as usize + 1;
    Ok(ScanConfig::new(a, b, n))
}

pub fn verdict_text(v: &LifetimeVerdict) -> String {
    match *v {
        LifetimeVerdict::UpperBound(s) => format!("upper bound {s} s, two-branch"),
        LifetimeVerdict::LowerBound(s) => format!("lower bound {s} s, single-branch"),
        LifetimeVerdict::Estimate { seconds, switches } => {
            format!("estimate {seconds:.4} s from {switches} switches")
        }
        LifetimeVerdict::Inconclusive => "inconclusive".into(),
    }
}

/// Renders the scan with pixels in parallel; the result does not depend on
/// the thread count because every pixel draws from its own RNG stream.
pub fn render_scan(
    device: &Device,
    rate: f64,
    duration: f64,
    seed: u64,
) -> CliResult<(SpectroscopyScan, Vec<(f64, Parity)>)> {
    let s = &device.config.scan;
    let parity = simulate_parity(rate, duration, seed)?;
    let offset = simulate_offset_charge(&device.noise_model(rate), s.initial_ng, duration, seed)?;
    let mut grid = auto_grid(device)?;
    grid.pixel_time_s = s.pixel_time_s;
    grid.repetitions = s.repetitions;
    let plan = ScanPlan::new(
        &device.params,
        &parity,
        &offset,
        s.linewidth_mhz,
        s.snr,
        grid,
        seed,
    )?;
    let rows = (0..plan.n_pixels())
        .into_par_iter()
        .map(|k| plan.render_pixel(k))
        .collect();
    let mut flips = vec![(0.0, parity.initial)];
    let mut state = parity.initial;
    for &t in &parity.events {
        state = state.flipped();
        flips.push((t, state));
    }
    Ok((plan.assemble(rows), flips))
}

pub fn parity_sim(device: &Device, args: &ParitySimArgs, opts: &Options) -> CliResult<Output> {
    let s = &device.config.scan;
    let duration = args.duration_s.unwrap_or(s.duration_s);
    let temperature = args.temperature_k.unwrap_or(s.temperature_k);
    if !(duration > 0.0 && duration.is_finite()) || !(temperature > 0.0) {
        return Err(CliError::input("duration and temperature must be positive"));
    }
    let seed = opts.seed.unwrap_or(device.config.seed);
    let rate = device.parity_rate(temperature)?;
    let (scan, flips) = render_scan(device, rate, duration, seed)?;
    let verdict = estimate_parity_lifetime(&scan)?;

    let detector = PeakDetector::default();
    let mut peaks = Table::new(["pixel", "t_s", "peak_ghz", "height", "even_ghz", "odd_ghz"]);
    for (k, row) in scan.rows.iter().enumerate() {
        let found = detector.detect(&row.amplitudes, &scan.freqs_ghz, scan.linewidth_mhz);
        for (f, h) in found.positions_ghz.iter().zip(&found.heights) {
            peaks.push(vec![
                k.into(),
                scan.times_s[k].into(),
                (*f).into(),
                (*h).into(),
                row.even_ghz.into(),
                row.odd_ghz.into(),
            ]);
        }
    }
    let mut trace = Table::new(["t_s", "parity"]);
    for (t, p) in &flips {
        trace.push(vec![
            (*t).into(),
            if *p == Parity::Odd { "odd" } else { "even" }.into(),
        ]);
    }

    let scan_bytes = match opts.format {
        Format::Csv => {
            let mut cols = vec![
                "t_s".to_string(),
                "offset_charge".into(),
                "odd_weight".into(),
            ];
            cols.extend(scan.freqs_ghz.iter().map(|f| format!("{f:.6}")));
            let mut t = Table::new(cols);
            for (k, r) in scan.rows.iter().enumerate() {
                let mut row: Vec<Cell> = vec![
                    scan.times_s[k].into(),
                    r.offset_charge.into(),
                    r.odd_weight.into(),
                ];
                row.extend(r.amplitudes.iter().map(|&a| Cell::Num(a)));
                t.push(row);
            }
            t.to_csv()
        }
        Format::Json => {
            let rows: Vec<Value> = scan
                .rows
                .iter()
                .enumerate()
                .map(|(k, r)| {
                    json!({
                        "t_s": num(scan.times_s[k]),
                        "offset_charge": num(r.offset_charge),
                        "odd_weight": num(r.odd_weight),
                        "amplitudes": r.amplitudes.iter().map(|&a| num(a)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let mut b = serde_json::to_vec(&json!({
                "freqs_ghz": scan.freqs_ghz.iter().map(|&f| num(f)).collect::<Vec<_>>(),
                "rows": rows,
            }))
            .expect("json");
            b.push(b'\n');
            b
        }
    };

    let mut sum = Map::new();
    sum.insert("temperature_K".into(), num(temperature));
    sum.insert("parity_rate_per_s".into(), num(rate));
    sum.insert("duration_s".into(), num(duration));
    sum.insert("pixel_time_s".into(), num(scan.pixel_time_s));
    sum.insert("pixels".into(), Value::from(scan.n_pixels()));
    sum.insert("f_min_ghz".into(), num(scan.freqs_ghz[0]));
    sum.insert(
        "f_max_ghz".into(),
        num(*scan.freqs_ghz.last().expect("grid")),
    );
    sum.insert("n_freq".into(), Value::from(scan.freqs_ghz.len()));
    sum.insert("true_switches".into(), Value::from(flips.len() - 1));
    sum.insert("verdict".into(), Value::from(verdict_text(&verdict)));
    sum.insert(
        "lifetime_s".into(),
        verdict.seconds().map_or(Value::Null, num),
    );

    let text = format!(
        "{}: T = {temperature} K, parity rate {rate:.3e} s^-1, {} pixels of {} s\nverdict: {}\n",
        device.config.name,
        scan.n_pixels(),
        scan.pixel_time_s,
        verdict_text(&verdict)
    );
    let mut files = vec![
        (format!("scan.{}", opts.format.extension()), scan_bytes),
        table_file("peaks", &peaks, &opts.format),
        table_file("parity_trace", &trace, &opts.format),
        (
            "parity_sim_meta.json".into(),
            metadata("parity-sim", device, Some(seed), sum),
        ),
    ];
    if opts.svg {
        let rows: Vec<Vec<f64>> = scan.rows.iter().map(|r| r.amplitudes.clone()).collect();
        files.push((
            "scan.svg".into(),
            svg::heatmap(
                &format!("{}: two-tone scan", device.config.name),
                "frequency (GHz)",
                "time (s)",
                (scan.freqs_ghz[0], *scan.freqs_ghz.last().expect("grid")),
                (0.0, scan.duration_s()),
                &rows,
                400,
            )
            .into_bytes(),
        ));
    }
    Ok(Output {
        files,
        primary: 3,
        summary: text,
    })
}

// --------------------------------------------------------------------- fit

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FitKind {
    T1,
    T2,
}

impl FitKind {
    pub fn series_kind(self) -> SeriesKind {
        match self {
            FitKind::T1 => SeriesKind::T1,
            FitKind::T2 => SeriesKind::T2Star,
        }
    }

    fn stem(self) -> &'static str {
        match self {
            FitKind::T1 => "t1",
            FitKind::T2 => "t2",
        }
    }
}

/// Shot-noise parameters of the device: measured chi when given, the
/// computed ng = 0 value otherwise.
pub fn shot_noise(device: &Device) -> CliResult<ShotNoise> {
    let c = device
        .coupling
        .as_ref()
        .ok_or_else(|| CliError::input("`cavity` is required for T2 models"))?;
    let chi_mhz = match device.config.cavity.as_ref().and_then(|c| c.chi_mhz) {
        Some(x) => x,
        None => chi(&device.params, c)?,
    };
    Ok(ShotNoise {
        chi_mhz,
        kappa_mhz: c.kappa_mhz(),
        nu_r_ghz: c.nu_r_ghz,
    })
}

/// T1 entering the T2 model: interpolated data when given, else the
/// configured base-temperature T1.
pub fn t1_model(device: &Device, t1_data: Option<&DataSeries>) -> CliResult<T1Model> {
    match (t1_data, device.config.coherence.t1_us) {
        (Some(d), _) => Ok(T1Model::from_series(d)),
        (None, Some(us)) => Ok(T1Model::Constant(1e6 / us)),
        (None, None) => Err(CliError::input(
            "T2 fits need a T1 model: pass --t1-data or set coherence.t1_us",
        )),
    }
}

fn result_json(r: &FitResult) -> Value {
    let params: Vec<Value> = r
        .names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            json!({
                "name": n,
                "unit": r.units[i],
                "value": num(r.values[i]),
                "std_error": r.std_errors.as_ref().map_or(Value::Null, |e| num(e[i])),
            })
        })
        .collect();
    json!({
        "parameters": params,
        "covariance": r.covariance.as_ref().map(|c| c.iter().map(|&v| num(v)).collect::<Vec<_>>()),
        "residual_sum": num(r.residual_sum),
        "dof": r.dof,
        "absolute_sigma": r.absolute_sigma,
        "iterations": r.iterations,
        "step_norm": num(r.step_norm),
    })
}

fn result_text(r: &FitResult) -> String {
    let mut s = String::new();
    for (i, n) in r.names.iter().enumerate() {
        let err = r
            .std_errors
            .as_ref()
            .map_or("n/a (rank deficient)".to_string(), |e| {
                format!("{:.4e}", e[i])
            });
        s.push_str(&format!(
            "  {n} = {:.6e} +/- {err} {}\n",
            r.values[i], r.units[i]
        ));
    }
    s.push_str(&format!(
        "  residual sum {:.4} over {} dof ({}), {} iterations, final step {:.2e}\n",
        r.residual_sum,
        r.dof,
        if r.absolute_sigma {
            "absolute sigma"
        } else {
            "scaled by reduced chi-square"
        },
        r.iterations,
        r.step_norm
    ));
    s
}

#[allow(clippy::too_many_arguments)]
fn fit_outputs(
    kind: FitKind,
    device: &Device,
    data: &DataSeries,
    r: &FitResult,
    model: impl Fn(f64) -> f64,
    extra: Map<String, Value>,
    text: String,
    opts: &Options,
) -> Output {
    let stem = kind.stem();
    let mut resid = Table::new([
        "T_K",
        "data_rate_per_s",
        "model_rate_per_s",
        "residual_per_s",
    ]);
    for &(t, y, m) in &r.residuals {
        resid.push(vec![t.into(), y.into(), m.into(), (y - m).into()]);
    }
    let mut report = match result_json(r) {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    report.extend(extra);
    let mut files = vec![
        (
            format!("fit_{stem}.json"),
            metadata(&format!("fit {stem}"), device, None, report),
        ),
        table_file(&format!("fit_{stem}_residuals"), &resid, &opts.format),
    ];
    if opts.svg {
        let (lo, hi) = r
            .residuals
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), p| {
                (a.min(p.0), b.max(p.0))
            });
        let curve: Vec<(f64, f64)> = (0..=200)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / 200.0;
                (t, model(t))
            })
            .collect();
        let pts = series_table(data)
            .rows
            .iter()
            .filter_map(|row| match (&row[0], &row[1]) {
                (Cell::Num(a), Cell::Num(b)) => Some((*a, *b)),
                _ => None,
            })
            .collect();
        files.push((
            format!("fit_{stem}.svg"),
            svg::chart(
                &format!("{}: {} fit", device.config.name, stem.to_uppercase()),
                "T (K)",
                "rate (1/s)",
                &[
                    Series {
                        label: "data".into(),
                        points: pts,
                        style: Style::Points,
                    },
                    Series {
                        label: "model".into(),
                        points: curve,
                        style: Style::Line,
                    },
                ],
                true,
            )
            .into_bytes(),
        ));
    }
    Output {
        files,
        primary: 0,
        summary: text,
    }
}

pub fn fit(
    kind: FitKind,
    device: &Device,
    data: &DataSeries,
    t1_data: Option<&DataSeries>,
    opts: &Options,
) -> CliResult<Output> {
    match kind {
        FitKind::T1 => {
            let f = fit_t1_vs_temperature(data)?;
            let mut extra = Map::new();
            extra.insert("x_nqp_inferred".into(), num(f.x_nqp_inferred));
            extra.insert("crossover_K".into(), f.crossover_k.map_or(Value::Null, num));
            let mut text = format!(
                "{}: T1 fit, Gamma1(T) = plateau + A sqrt(2 pi T / Delta) exp(-Delta / T), {} points\n",
                device.config.name,
                data.points.len()
            );
            text.push_str(&result_text(&f.result));
            text.push_str(&format!(
                "  x_nqp_inferred = plateau / A = {:.4e} (valid if the plateau is QP limited)\n",
                f.x_nqp_inferred
            ));
            if let Some(c) = f.crossover_k {
                text.push_str(&format!("  crossover temperature {:.1} mK\n", c * 1e3));
            }
            let p: T1Params = f.params;
            Ok(fit_outputs(
                kind,
                device,
                data,
                &f.result,
                |t| p.rate(t),
                extra,
                text,
                opts,
            ))
        }
        FitKind::T2 => {
            let shot = shot_noise(device)?;
            let t1 = t1_model(device, t1_data)?;
            let f = fit_t2_vs_temperature(data, &shot, &t1)?;
            let mut extra = Map::new();
            extra.insert("chi_mhz".into(), num(shot.chi_mhz));
            extra.insert("kappa_mhz".into(), num(shot.kappa_mhz));
            extra.insert("nu_r_ghz".into(), num(shot.nu_r_ghz));
            extra.insert(
                "effective_temperature_K".into(),
                f.effective_temperature_k.map_or(Value::Null, num),
            );
            let mut text = format!(
                "{}: T2* fit, 1/T2* = Gamma1/2 + Gamma_phi(n_th(T) + n0) + offset, {} points\n\
                 chi = {:.3} MHz, kappa = {:.3} MHz, nu_r = {} GHz\n",
                device.config.name,
                data.points.len(),
                shot.chi_mhz,
                shot.kappa_mhz,
                shot.nu_r_ghz
            );
            text.push_str(&result_text(&f.result));
            if let Some(t) = f.effective_temperature_k {
                text.push_str(&format!(
                    "  resonator temperature of the floor n0: {:.1} mK\n",
                    t * 1e3
                ));
            }
            let (n0, off) = (f.n0, f.gamma_offset);
            Ok(fit_outputs(
                kind,
                device,
                data,
                &f.result,
                |t| shot.t2_star_rate(t, &t1, n0, off),
                extra,
                text,
                opts,
            ))
        }
    }
}

// ------------------------------------------------------------------- synth

/// Synthetic data from the config's generators with 5 % noise.
pub fn synth(kind: FitKind, device: &Device, opts: &Options) -> CliResult<Output> {
    const REL_NOISE: f64 = 0.05;
    let seed = opts.seed.unwrap_or(device.config.seed);
    let c = &device.config.coherence;
    let t1_us = c
        .t1_us
        .ok_or_else(|| CliError::input("synth needs coherence.t1_us"))?;
    let temps = default_temperatures();
    let series = match kind {
        FitKind::T1 => {
            let tc = device
                .config
                .qp
                .junction_tc_k
                .ok_or_else(|| CliError::input("synth t1 needs qp.junction_tc_k"))?;
            let plateau = 1e6 / t1_us;
            let truth = T1Params {
                gamma_plateau: plateau,
                tc_k: tc,
                amplitude: plateau / device.env.x_nqp,
            };
            synthesize_t1(&truth, &temps, REL_NOISE, seed)?
        }
        FitKind::T2 => {
            let n0 = c
                .resonator_n0
                .ok_or_else(|| CliError::input("synth t2 needs coherence.resonator_n0"))?;
            let off = c.dephasing_offset_per_s.unwrap_or(0.0);
            synthesize_t2(
                &shot_noise(device)?,
                &T1Model::Constant(1e6 / t1_us),
                n0,
                off,
                &temps,
                REL_NOISE,
                seed,
            )?
        }
    };
    let mut t = Table::new(["T_K", "value_us", "sigma_us"]);
    for p in &series.points {
        let us = 1e6 / p.rate_per_s;
        let sig = p.sigma_per_s.map_or(f64::NAN, |s| us * s / p.rate_per_s);
        t.push(vec![p.t_k.into(), us.into(), sig.into()]);
    }
    let stem = kind.stem();
    Ok(Output {
        files: vec![(format!("synthetic_{stem}.csv"), t.to_csv())],
        primary: 0,
        summary: format!(
            "{}: {} synthetic {} points, seed {seed}\n",
            device.config.name,
            series.points.len(),
            stem.to_uppercase()
        ),
    })
}
