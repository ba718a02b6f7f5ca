//! Lloyd-Max design for a unit-variance Gaussian source.

use std::fmt::Write as _;
use std::sync::OnceLock;

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::{Error, Result};

pub const MAX_DESIGN_BITS: u32 = 12;

const MAX_ITERATIONS: usize = 10_000;
const TOLERANCE: f64 = 1e-10;

/// MSE-optimal scalar quantizer for `N(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerCodebook {
    bits: u32,
    thresholds: Vec<f64>,
    levels: Vec<f64>,
    rho: f64,
}

impl QuantizerCodebook {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Interior cell boundaries, `2ᵇ − 1` of them, increasing.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Reconstruction levels, `2ᵇ` of them, increasing.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// `E{(Q(z) − z)²}` for `z ~ N(0, 1)`, evaluated in closed form.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Plain-text table: one `key values...` line each for `bits`, `rho`,
    /// `thresholds` and `levels`. Numbers are written with 17 significant
    /// digits so the table reloads bit-exactly.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# lloyd-max codebook, unit-variance gaussian");
        let _ = writeln!(out, "bits {}", self.bits);
        let _ = writeln!(out, "rho {:.16e}", self.rho);
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "thresholds {}", join(&self.thresholds));
        let _ = writeln!(out, "levels {}", join(&self.levels));
        out
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut bits = None;
        let mut rho = None;
        let mut thresholds = None;
        let mut levels = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default();
            let nums = parts
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Codebook(format!("line {}: {e}", lineno + 1)))?;
            match key {
                "bits" => {
                    let b = match nums.as_slice() {
                        [b] if *b >= 1.0 && b.fract() == 0.0 && *b <= 30.0 => *b as u32,
                        _ => return Err(Error::Codebook(format!("line {}: bad bit count", lineno + 1))),
                    };
                    bits = Some(b);
                }
                "rho" => match nums.as_slice() {
                    [r] => rho = Some(*r),
                    _ => return Err(Error::Codebook(format!("line {}: bad rho", lineno + 1))),
                },
                "thresholds" => thresholds = Some(nums),
                "levels" => levels = Some(nums),
                other => {
                    return Err(Error::Codebook(format!("line {}: unknown key `{other}`", lineno + 1)))
                }
            }
        }
        let missing = |k: &str| Error::Codebook(format!("missing `{k}`"));
        let cb = Self {
            bits: bits.ok_or_else(|| missing("bits"))?,
            rho: rho.ok_or_else(|| missing("rho"))?,
            thresholds: thresholds.ok_or_else(|| missing("thresholds"))?,
            levels: levels.ok_or_else(|| missing("levels"))?,
        };
        cb.check()?;
        Ok(cb)
    }

    fn check(&self) -> Result<()> {
        let n = 1usize << self.bits;
        if self.levels.len() != n || self.thresholds.len() != n - 1 {
            return Err(Error::Codebook(format!(
                "{} bits needs {} levels and {} thresholds, found {} and {}",
                self.bits,
                n,
                n - 1,
                self.levels.len(),
                self.thresholds.len()
            )));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::Codebook(format!("rho {} outside (0, 1)", self.rho)));
        }
        for (i, t) in self.thresholds.iter().enumerate() {
            if !(self.levels[i] < *t && *t < self.levels[i + 1]) {
                return Err(Error::Codebook(format!("threshold {i} does not separate its levels")));
            }
        }
        Ok(())
    }
}

fn pdf(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }
}

/// Upper tail `P(Z > x)`.
fn upper_tail(x: f64) -> f64 {
    if x == f64::INFINITY {
        0.0
    } else if x == f64::NEG_INFINITY {
        1.0
    } else {
        0.5 * erfc(x / std::f64::consts::SQRT_2)
    }
}

/// `P(a < Z ≤ b)`, computed from whichever tail keeps precision.
fn cell_probability(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        upper_tail(a) - upper_tail(b)
    } else if b <= 0.0 {
        upper_tail(-b) - upper_tail(-a)
    } else {
        1.0 - upper_tail(-a) - upper_tail(b)
    }
}

/// `φ(a) − φ(b)` without cancellation for narrow cells.
fn pdf_difference(a: f64, b: f64) -> f64 {
    if a.is_infinite() || b.is_infinite() {
        return pdf(a) - pdf(b);
    }
    if a.abs() <= b.abs() {
        -pdf(a) * (-0.5 * (b - a) * (b + a)).exp_m1()
    } else {
        pdf(b) * (-0.5 * (a - b) * (a + b)).exp_m1()
    }
}

/// Conditional mean of `Z` over `(a, b]`.
fn centroid(a: f64, b: f64) -> f64 {
    pdf_difference(a, b) / cell_probability(a, b)
}

fn edges(thresholds: &[f64], i: usize) -> (f64, f64) {
    let lo = if i == 0 { f64::NEG_INFINITY } else { thresholds[i - 1] };
    let hi = thresholds.get(i).copied().unwrap_or(f64::INFINITY);
    (lo, hi)
}

fn tail_term(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        x * pdf(x)
    }
}

/// `E{(Q(Z) − Z)²}` in closed form from the cell moments.
pub(crate) fn gaussian_mse(thresholds: &[f64], levels: &[f64]) -> f64 {
    levels
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let (a, b) = edges(thresholds, i);
            let p = cell_probability(a, b);
            let second = p + tail_term(a) - tail_term(b);
            let first = pdf_difference(a, b);
            second - 2.0 * y * first + y * y * p
        })
        .sum()
}

fn symmetrize(v: &mut [f64]) {
    let n = v.len();
    for i in 0..n / 2 {
        let m = 0.5 * (v[n - 1 - i] - v[i]);
        v[i] = -m;
        v[n - 1 - i] = m;
    }
    if n % 2 == 1 {
        v[n / 2] = 0.0;
    }
}

fn midpoints(levels: &[f64]) -> Vec<f64> {
    levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Centroids of the cells induced by `levels`.
fn lloyd_map(levels: &[f64]) -> Vec<f64> {
    let t = midpoints(levels);
    (0..levels.len()).map(|i| {
        let (a, b) = edges(&t, i);
        centroid(a, b)
    }).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// One Newton step on `F(y) = y − lloyd_map(y) = 0`. The Jacobian is
/// tridiagonal: level `i` only sees its neighbours through the two
/// midpoints bounding its cell.
fn newton_step(levels: &[f64], mapped: &[f64]) -> Option<Vec<f64>> {
    let n = levels.len();
    let t = midpoints(levels);
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        let (a, b) = edges(&t, i);
        let p = cell_probability(a, b);
        let c = mapped[i];
        // ∂c/∂a = φ(a)(c − a)/p, ∂c/∂b = φ(b)(b − c)/p
        let da = if a.is_infinite() { 0.0 } else { pdf(a) * (c - a) / p };
        let db = if b.is_infinite() { 0.0 } else { pdf(b) * (b - c) / p };
        lower[i] = -0.5 * da;
        upper[i] = -0.5 * db;
        diag[i] = 1.0 - 0.5 * (da + db);
        rhs[i] = -(levels[i] - c);
    }
    // Thomas algorithm
    for i in 1..n {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut step = vec![0.0; n];
    step[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        step[i] = (rhs[i] - upper[i] * step[i + 1]) / diag[i];
    }
    let next: Vec<f64> = levels.iter().zip(&step).map(|(y, s)| y + s).collect();
    let ordered = next.windows(2).all(|w| w[0] < w[1]);
    (ordered && next.iter().all(|v| v.is_finite())).then_some(next)
}

/// Design the `bits`-bit Lloyd-Max quantizer for a unit-variance Gaussian.
///
/// Thresholds start at equal-probability quantiles of `N(0, 3)` (the
/// high-resolution optimal point density). Each iteration takes a Newton
/// step on the centroid/midpoint fixed-point equations and keeps it if it
/// shrinks the fixed-point residual; otherwise it falls back to a plain
/// Lloyd update. Iteration stops once no level moves by more than `1e-10`,
/// or after 10⁴ iterations.
///
/// # Panics
///
/// If `bits` is outside `1..=12`.
pub fn design_lloyd_max(bits: u32) -> QuantizerCodebook {
    assert!(
        (1..=MAX_DESIGN_BITS).contains(&bits),
        "Lloyd-Max design supports 1..={MAX_DESIGN_BITS} bits, got {bits}"
    );
    let n = 1usize << bits;
    let init = Normal::new(0.0, 3f64.sqrt()).expect("normal");
    let mut thresholds: Vec<f64> = (1..n).map(|i| init.inverse_cdf(i as f64 / n as f64)).collect();
    symmetrize(&mut thresholds);
    let mut levels: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = edges(&thresholds, i);
            centroid(a, b)
        })
        .collect();

    let mut mapped = lloyd_map(&levels);
    let mut residual = max_abs_diff(&levels, &mapped);
    for _ in 0..MAX_ITERATIONS {
        let candidate = newton_step(&levels, &mapped).map(|mut next| {
            symmetrize(&mut next);
            let m = lloyd_map(&next);
            let r = max_abs_diff(&next, &m);
            (next, m, r)
        });
        let (next, next_mapped, next_residual) = match candidate {
            Some(c) if c.2 < residual => c,
            _ => {
                let mut next = mapped.clone();
                symmetrize(&mut next);
                let m = lloyd_map(&next);
                let r = max_abs_diff(&next, &m);
                (next, m, r)
            }
        };
        let moved = max_abs_diff(&next, &levels);
        levels = next;
        mapped = next_mapped;
        residual = next_residual;
        if moved < TOLERANCE {
            break;
        }
    }
    thresholds = midpoints(&levels);
    let rho = gaussian_mse(&thresholds, &levels);
    QuantizerCodebook { bits, thresholds, levels, rho }
}

/// Shared, lazily designed codebook for `bits`.
pub fn cached_codebook(bits: u32) -> &'static QuantizerCodebook {
    static CACHE: [OnceLock<QuantizerCodebook>; MAX_DESIGN_BITS as usize] = [const { OnceLock::new() }; MAX_DESIGN_BITS as usize];
    assert!((1..=MAX_DESIGN_BITS).contains(&bits), "no codebook for {bits} bits");
    CACHE[bits as usize - 1].get_or_init(|| design_lloyd_max(bits))
}

/// Reconstruction level of the cell containing `z`. A value equal to a
/// threshold maps to the upper level; values beyond the outer thresholds
/// saturate to the extreme levels.
pub fn quantize_real(z: f64, cb: &QuantizerCodebook) -> f64 {
    let idx = cb.thresholds.partition_point(|&t| t <= z);
    cb.levels[idx]
}
