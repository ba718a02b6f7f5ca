use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;

use rand::Rng;

use super::config::RunConfig;
use crate::analysis::{
    asymptotic_rate, benchmark_rates, high_snr_loss_adc_rho, plan_adc_bits, plan_dac_bits, rate_grid, rate_loss_dac,
    OperatingPoint, PlannerQuery,
};
use crate::channel::{gaussian_matrix, generate_channel, substream, SystemConfig};
use crate::montecarlo::{estimate_rate_sweep, SimOptions, TrialDumpWriter};
use crate::numfmt::sig12;
use crate::precoding::wishart_trace;
use crate::quantization::{
    cached_codebook, distortion_factor, distortion_factor_approx, quantize_stream, Resolution, DISTORTION_TABLE,
};
use crate::{Complex64, Error, Result};

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn csv_text(header: String, rows: Vec<Vec<String>>, columns: &[&str]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for row in rows {
        w.write_record(row)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(format!("{header}\n{}", String::from_utf8(body).expect("csv output is UTF-8")))
}

/// Closed-form rate per SNR point and converter setting, optionally with
/// simulated estimates alongside.
pub fn cmd_rate_sweep(cfg: &RunConfig) -> Result<String> {
    cfg.check(true)?;
    let seed = cfg.master_seed.expect("checked");
    let beta = cfg.beta();
    let mut dump = match (&cfg.raw_dump, cfg.simulate) {
        (Some(path), true) => Some(TrialDumpWriter::new(BufWriter::new(File::create(path)?))?),
        _ => None,
    };
    let opts = SimOptions::new(cfg.n_trials, seed)
        .with_symbols(cfg.symbols_per_trial)
        .with_mode(cfg.mode)
        .with_execution(cfg.execution());

    let mut rows = Vec::new();
    for &(dac, adc) in &cfg.converters {
        let label = format!("{dac}/{adc}");
        let sim = if cfg.simulate {
            let sys = SystemConfig::from_snr(
                cfg.n_antennas,
                cfg.n_users,
                cfg.total_power,
                db_to_linear(cfg.snr_db[0]),
                dac,
                adc,
            )?;
            let sweep = estimate_rate_sweep(&sys, &cfg.snr_db, &opts)?;
            if let Some(d) = dump.as_mut() {
                d.append(&label, &sweep)?;
            }
            Some(sweep.estimates)
        } else {
            None
        };
        for (i, &db) in cfg.snr_db.iter().enumerate() {
            let closed = asymptotic_rate(&OperatingPoint::new(beta, db_to_linear(db), dac, adc));
            let (mean, se) = match &sim {
                Some(est) => (sig12(est[i].mean_rate), sig12(est[i].std_error)),
                None => (String::new(), String::new()),
            };
            rows.push(vec![sig12(db), sig12(closed), mean, se, label.clone()]);
        }
    }
    if let Some(d) = dump {
        d.finish()?;
    }
    csv_text(
        cfg.header("rate-sweep"),
        rows,
        &["snr_db", "closed_form_rate", "sim_rate_mean", "sim_rate_se", "config"],
    )
}

/// Closed-form rate over the full `dac_bits × adc_bits` grid at
/// `contour_snr_db`.
pub fn cmd_contour(cfg: &RunConfig) -> Result<String> {
    cfg.check(true)?;
    let grid = rate_grid(cfg.beta(), db_to_linear(cfg.contour_snr_db), &cfg.dac_bits, &cfg.adc_bits);
    let mut rows = Vec::new();
    for (i, d) in grid.dac.iter().enumerate() {
        for (j, a) in grid.adc.iter().enumerate() {
            rows.push(vec![d.to_string(), a.to_string(), sig12(grid.rates[i][j])]);
        }
    }
    csv_text(cfg.header("contour"), rows, &["b_da", "b_ad", "rate"])
}

/// Which converter is given; the other one is planned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedSide {
    Adc(u32),
    Dac(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanArgs {
    pub fixed: FixedSide,
    pub loss: f64,
    pub beta: f64,
    pub snr_check_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutput {
    pub text: String,
    pub csv: String,
    pub planned_bits: u32,
}

pub fn cmd_plan(args: &PlanArgs) -> Result<PlanOutput> {
    let mut text = String::new();
    let columns = [
        "fixed_side",
        "fixed_bits",
        "loss_budget",
        "beta",
        "planned_bits",
        "raw_bound",
        "bits_approx_a",
        "bits_approx_b",
        "high_snr_loss_model",
        "high_snr_loss_table",
        "snr_check_db",
        "loss_at_snr",
    ];
    let (row, planned) = match args.fixed {
        FixedSide::Adc(b_ad) => {
            let plan = plan_dac_bits(&PlannerQuery::new(b_ad, args.loss, args.beta)?)?;
            let _ = writeln!(text, "fixed ADC: {b_ad} bits, loss budget r1 = {} bits/s/Hz, beta = {}", args.loss, args.beta);
            let _ = writeln!(text, "DAC bits (exact): {} (unrounded {:.4})", plan.bits, plan.raw);
            let _ = writeln!(text, "DAC bits (approx. a, rho_AD << 1): {}", plan.bits_approx_a);
            let _ = writeln!(text, "DAC bits (approx. b, also beta << 1): {}", plan.bits_approx_b);
            let _ = writeln!(
                text,
                "predicted high-SNR loss at {} bits: {:.4} (approximate rho_DA), {:.4} (tabulated rho_DA)",
                plan.bits, plan.loss_model, plan.loss_table
            );
            let check = args.snr_check_db.map(|db| {
                let op = OperatingPoint::new(args.beta, db_to_linear(db), Resolution::Bits(plan.bits), Resolution::Bits(b_ad));
                (db, rate_loss_dac(&op))
            });
            if let Some((db, loss)) = check {
                let _ = writeln!(text, "DAC rate loss at {db} dB: {loss:.4} bits/s/Hz");
            }
            let row = vec![
                "adc".into(),
                b_ad.to_string(),
                sig12(args.loss),
                sig12(args.beta),
                plan.bits.to_string(),
                sig12(plan.raw),
                plan.bits_approx_a.to_string(),
                plan.bits_approx_b.to_string(),
                sig12(plan.loss_model),
                sig12(plan.loss_table),
                check.map_or_else(String::new, |c| sig12(c.0)),
                check.map_or_else(String::new, |c| sig12(c.1)),
            ];
            (row, plan.bits)
        }
        FixedSide::Dac(b_da) => {
            let plan = plan_adc_bits(&PlannerQuery::new(b_da, args.loss, args.beta)?)?;
            let rho_da = distortion_factor(Resolution::Bits(b_da));
            let model = high_snr_loss_adc_rho(rho_da, distortion_factor_approx(plan.bits), args.beta);
            let table = high_snr_loss_adc_rho(rho_da, distortion_factor(Resolution::Bits(plan.bits)), args.beta);
            let _ = writeln!(text, "fixed DAC: {b_da} bits, loss budget r2 = {} bits/s/Hz, beta = {}", args.loss, args.beta);
            let _ = writeln!(text, "ADC bits: {} (unrounded {:.4})", plan.bits, plan.raw);
            let _ = writeln!(
                text,
                "predicted high-SNR loss at {} bits: {model:.4} (approximate rho_AD), {table:.4} (tabulated rho_AD)",
                plan.bits
            );
            let check = args.snr_check_db.map(|db| {
                let op = OperatingPoint::new(args.beta, db_to_linear(db), Resolution::Bits(b_da), Resolution::Bits(plan.bits));
                (db, benchmark_rates(&op).ideal_adc - asymptotic_rate(&op))
            });
            if let Some((db, loss)) = check {
                let _ = writeln!(text, "ADC rate loss at {db} dB: {loss:.4} bits/s/Hz");
            }
            let row = vec![
                "dac".into(),
                b_da.to_string(),
                sig12(args.loss),
                sig12(args.beta),
                plan.bits.to_string(),
                sig12(plan.raw),
                String::new(),
                String::new(),
                sig12(model),
                sig12(table),
                check.map_or_else(String::new, |c| sig12(c.0)),
                check.map_or_else(String::new, |c| sig12(c.1)),
            ];
            (row, plan.bits)
        }
    };
    let header = format!(
        "# qmimo plan fixed={} loss={} beta={} snr_check_db={}",
        match args.fixed {
            FixedSide::Adc(b) => format!("adc:{b}"),
            FixedSide::Dac(b) => format!("dac:{b}"),
        },
        args.loss,
        args.beta,
        args.snr_check_db.map_or_else(|| "none".into(), |d| d.to_string())
    );
    let csv = csv_text(header, vec![row], &columns)?;
    Ok(PlanOutput { text, csv, planned_bits: planned })
}

/// Outcome of one self-check.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub suites: Vec<SuiteResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let _ = writeln!(out, "{} {}: {}", if s.passed { "PASS" } else { "FAIL" }, s.name, s.detail);
        }
        let failed = self.suites.iter().filter(|s| !s.passed).count();
        if failed == 0 {
            out.push_str("all suites passed\n");
        } else {
            let _ = writeln!(out, "{failed} of {} suites failed", self.suites.len());
        }
        out
    }
}

/// Seed for `validate` when the configuration does not give one.
pub const VALIDATE_SEED: u64 = 1;

fn suite_quantizer_table() -> SuiteResult {
    let (mut worst, mut at) = (0.0f64, 0);
    for (i, &tab) in DISTORTION_TABLE.iter().enumerate() {
        let b = i as u32 + 1;
        let dev = (cached_codebook(b).rho() / tab - 1.0).abs();
        if dev > worst {
            worst = dev;
            at = b;
        }
    }
    SuiteResult {
        name: "quantizer-table",
        passed: worst < 0.02,
        detail: format!("designed vs tabulated distortion, b=1..8: max relative deviation {:.3}% at b={at} (limit 2%)", worst * 100.0),
    }
}

fn suite_wishart(cfg: &RunConfig, seed: u64) -> Result<SuiteResult> {
    let sys = SystemConfig::new(cfg.n_antennas, cfg.n_users, 1.0, 1.0, Resolution::Ideal, Resolution::Ideal)?;
    let n = 200;
    let mut sum = 0.0;
    for t in 0..n {
        let h = generate_channel(&sys, &mut substream(seed, t));
        sum += wishart_trace(&h)?;
    }
    let mean = sum / n as f64;
    let limit = cfg.n_users as f64 / (cfg.n_antennas - cfg.n_users) as f64;
    let dev = (mean / limit - 1.0).abs();
    Ok(SuiteResult {
        name: "wishart",
        passed: dev < 0.02,
        detail: format!(
            "mean inverse trace over {n} draws at N={}, M={}: {mean:.5} vs {limit:.5} ({:.2}%, limit 2%)",
            cfg.n_antennas,
            cfg.n_users,
            dev * 100.0
        ),
    })
}

fn suite_orthogonality(seed: u64) -> Result<SuiteResult> {
    let mut worst = 0.0f64;
    for b in 1..=8u32 {
        let cb = cached_codebook(b);
        let x = gaussian_matrix(1_000_000, 1, 1.0, &mut substream(seed, 1000 + b as u64));
        let mut q = x.as_slice().to_vec();
        quantize_stream(&mut q, cb, 1.0)?;
        let g = 1.0 - cb.rho();
        let mut cross = Complex64::default();
        let (mut ee, mut xx) = (0.0, 0.0);
        for (qv, xv) in q.iter().zip(x.as_slice()) {
            let e = qv - xv * g;
            cross += e * xv.conj();
            ee += e.norm_sqr();
            xx += xv.norm_sqr();
        }
        worst = worst.max(cross.norm() / (ee * xx).sqrt());
    }
    Ok(SuiteResult {
        name: "bussgang-orthogonality",
        passed: worst < 0.01,
        detail: format!("max |r| between distortion and input, b=1..8, 10^6 samples: {worst:.5} (limit 0.01)"),
    })
}

fn suite_reductions(seed: u64) -> SuiteResult {
    let mut rng = substream(seed, 9999);
    let l2 = |x: f64| (1.0 + x).log2();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let beta = rng.random_range(0.01..0.9);
        let snr = 10f64.powf(rng.random_range(-3.0..4.0));
        let rd = rng.random_range(1e-6..0.5);
        let ra = rng.random_range(1e-6..0.5);
        let k = 1.0 / beta - 1.0;
        let op = OperatingPoint::from_rho(beta, snr, rd, ra);
        let cases = [
            (op.with_rho(0.0, ra), l2((1.0 - ra) * k * snr / (ra * k * snr + 1.0))),
            (op.with_rho(rd, 0.0), l2((1.0 - rd) * k * snr / (rd * snr + 1.0))),
            (op.with_rho(0.0, 0.0), l2(k * snr)),
        ];
        for (point, expected) in cases {
            let got = asymptotic_rate(&point);
            worst = worst.max((got - expected).abs() / expected.max(1.0));
        }
    }
    SuiteResult {
        name: "reduction-identities",
        passed: worst < 1e-12,
        detail: format!("1000 random points, ideal-DAC/ideal-ADC/ideal specializations: max error {worst:.2e} (limit 1e-12)"),
    }
}

/// Runs the built-in self-checks.
pub fn cmd_validate(cfg: &RunConfig) -> Result<ValidationReport> {
    cfg.check(false)?;
    let seed = cfg.master_seed.unwrap_or(VALIDATE_SEED);
    Ok(ValidationReport {
        suites: vec![
            suite_quantizer_table(),
            suite_wishart(cfg, seed)?,
            suite_orthogonality(seed)?,
            suite_reductions(seed),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seeded() -> RunConfig {
        RunConfig { master_seed: Some(3), ..RunConfig::default() }
    }

    #[test]
    fn ideal_row_at_zero_db() {
        let cfg = RunConfig { snr_db: vec![0.0], converters: vec![(Resolution::Ideal, Resolution::Ideal)], ..seeded() };
        let out = cmd_rate_sweep(&cfg).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert!(lines[0].starts_with("# qmimo rate-sweep "));
        assert_eq!(lines[1], "snr_db,closed_form_rate,sim_rate_mean,sim_rate_se,config");
        assert_eq!(lines[2], "0,3,,,inf/inf");
    }

    #[test]
    fn sweep_needs_seed() {
        assert!(matches!(cmd_rate_sweep(&RunConfig::default()), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn contour_covers_grid() {
        let out = cmd_contour(&seeded()).unwrap();
        assert_eq!(out.lines().count(), 2 + 81);
        assert!(out.lines().any(|l| l.starts_with("inf,inf,0.765534")));
    }

    #[test]
    fn plan_examples() {
        let p = |fixed, loss| cmd_plan(&PlanArgs { fixed, loss, beta: 0.125, snr_check_db: Some(10.0) }).unwrap();
        assert_eq!(p(FixedSide::Adc(6), 2.0).planned_bits, 4);
        assert_eq!(p(FixedSide::Adc(6), 6.0).planned_bits, 2);
        let adc = p(FixedSide::Dac(6), 1.0);
        assert_eq!(adc.planned_bits, 8);
        assert!(adc.text.contains("ADC bits: 8"));
        assert_eq!(adc.csv.lines().count(), 3);
    }

    #[test]
    fn plan_infeasible() {
        let r = cmd_plan(&PlanArgs { fixed: FixedSide::Adc(1), loss: 10.0, beta: 0.9, snr_check_db: None });
        assert!(matches!(r, Err(Error::InfeasibleBudget { .. })));
    }
}
