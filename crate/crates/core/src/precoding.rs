//! Zero-forcing precoding with exact total-power normalization.

use crate::channel::ChannelRealization;
use crate::{CMatrix, Error, Result};

/// Largest accepted condition number of `HHᴴ`.
pub const CONDITION_LIMIT: f64 = 1e12;

/// `P = √(P / tr{(HHᴴ)⁻¹}) · Hᴴ(HHᴴ)⁻¹`.
#[derive(Debug, Clone)]
pub struct ZfPrecoder {
    /// `N × M` precoding matrix.
    pub p: CMatrix,
    /// Total transmit power the matrix is normalised to.
    pub power: f64,
    /// Effective channel gain `c`, with `HP = c·I`.
    pub gain: f64,
    /// `tr{(HHᴴ)⁻¹}` of the channel it was built for.
    pub inverse_trace: f64,
}

struct Pseudo {
    /// `(HHᴴ)⁻¹H`, shape `M × N`.
    right_inverse_h: CMatrix,
    inverse_trace: f64,
}

fn pseudo_inverse(h: &CMatrix) -> Result<Pseudo> {
    let gram = h * h.adjoint();
    let eig = gram.clone().symmetric_eigenvalues();
    let max = eig.max();
    let min = eig.min();
    if min.is_nan() || min <= 0.0 || max / min > CONDITION_LIMIT {
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        return Err(Error::SingularChannel { condition });
    }
    let chol = gram
        .cholesky()
        .ok_or(Error::SingularChannel { condition: f64::INFINITY })?;
    let x = chol.solve(h);
    // X Xᴴ = (HHᴴ)⁻¹, so its trace is the squared Frobenius norm of X.
    let inverse_trace = x.norm_squared();
    Ok(Pseudo { right_inverse_h: x, inverse_trace })
}

/// Build the zero-forcing precoder for `h` with total power `power`.
pub fn zf_precoder(h: &ChannelRealization, power: f64) -> Result<ZfPrecoder> {
    let pseudo = pseudo_inverse(&h.h)?;
    let gain = (power / pseudo.inverse_trace).sqrt();
    let p = pseudo.right_inverse_h.adjoint() * nalgebra::Complex::new(gain, 0.0);
    Ok(ZfPrecoder { p, power, gain, inverse_trace: pseudo.inverse_trace })
}

/// `tr{(HHᴴ)⁻¹}`.
pub fn wishart_trace(h: &ChannelRealization) -> Result<f64> {
    pseudo_inverse(&h.h).map(|p| p.inverse_trace)
}

/// Diagonal of `PPᴴ` (per-antenna transmit power), length `N`.
pub fn diag_of_gram(p: &ZfPrecoder) -> Vec<f64> {
    p.p.row_iter().map(|row| row.iter().map(|v| v.norm_sqr()).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_channel, substream, SystemConfig};
    use crate::quantization::Resolution;
    use crate::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn cfg(n: usize, m: usize) -> SystemConfig {
        SystemConfig::new(n, m, 1.0, 1.0, Resolution::Ideal, Resolution::Ideal).unwrap()
    }

    #[test]
    fn scalar_channel_is_matched_filter() {
        let h = ChannelRealization::new(CMatrix::from_element(1, 1, c(1.0)));
        let zf = zf_precoder(&h, 4.0).unwrap();
        assert!((zf.p[(0, 0)] - c(2.0)).norm() < 1e-14);
        assert_eq!(diag_of_gram(&zf).len(), 1);
        assert!((diag_of_gram(&zf)[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn wishart_trace_closed_cases() {
        let id = ChannelRealization::new(CMatrix::identity(2, 2));
        assert!((wishart_trace(&id).unwrap() - 2.0).abs() < 1e-14);
        let two = ChannelRealization::new(CMatrix::from_element(1, 1, c(2.0)));
        assert!((wishart_trace(&two).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_channel_is_rejected() {
        let mut h = CMatrix::zeros(2, 4);
        h[(0, 0)] = c(1.0);
        h[(1, 0)] = c(2.0);
        let h = ChannelRealization::new(h);
        assert!(matches!(zf_precoder(&h, 1.0), Err(Error::SingularChannel { .. })));
        assert!(matches!(wishart_trace(&h), Err(Error::SingularChannel { .. })));
    }

    #[test]
    fn power_and_nulling_identities_hold_per_draw() {
        let config = cfg(64, 12);
        for t in 0..20 {
            let h = generate_channel(&config, &mut substream(1, t));
            let zf = zf_precoder(&h, 3.0).unwrap();
            let tr: f64 = diag_of_gram(&zf).iter().sum();
            assert!((tr / 3.0 - 1.0).abs() < 1e-10);
            let hp = &h.h * &zf.p;
            let expected = CMatrix::identity(12, 12) * c(zf.gain);
            let err = (hp - expected).iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(err < 1e-8, "err {err}");
            assert!((zf.gain - (3.0 / zf.inverse_trace).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn large_system_limits_at_n128() {
        let config = cfg(128, 16);
        let trials = 200;
        let mut tr_sum = 0.0;
        let mut diag_mean = 0.0;
        for t in 0..trials {
            let h = generate_channel(&config, &mut substream(2024, t));
            tr_sum += wishart_trace(&h).unwrap();
            let zf = zf_precoder(&h, 1.0).unwrap();
            let hp = &h.h * &zf.p;
            let target = 7f64.sqrt();
            for k in 0..16 {
                assert!((hp[(k, k)].re / target - 1.0).abs() < 0.05);
                for j in 0..16 {
                    if j != k {
                        assert!(hp[(k, j)].norm() < 1e-8);
                    }
                }
            }
            let d = diag_of_gram(&zf);
            diag_mean += d.iter().sum::<f64>() / 128.0;
        }
        let mean_tr = tr_sum / trials as f64;
        assert!((mean_tr / (1.0 / 7.0) - 1.0).abs() < 0.02, "mean trace {mean_tr}");
        let dm = diag_mean / trials as f64;
        assert!((dm * 128.0 - 1.0).abs() < 0.02);
    }

    /// RMS relative deviation of diag(PPᴴ) from P/N, averaged over draws.
    fn diag_spread(n: usize, trials: u64) -> f64 {
        let config = cfg(n, n / 8);
        (0..trials)
            .map(|t| {
                let h = generate_channel(&config, &mut substream(5, t));
                let d = diag_of_gram(&zf_precoder(&h, 1.0).unwrap());
                let per = 1.0 / n as f64;
                (d.iter().map(|v| (v / per - 1.0).powi(2)).sum::<f64>() / n as f64).sqrt()
            })
            .sum::<f64>()
            / trials as f64
    }

    #[test]
    fn per_antenna_power_concentrates() {
        // each entry fluctuates like a 2M-dof chi-square, about 1/√M relative
        let s128 = diag_spread(128, 50);
        let s512 = diag_spread(512, 10);
        assert!((s128 - 0.25).abs() < 0.03, "{s128}");
        assert!(s512 < 0.6 * s128, "{s512} vs {s128}");
    }

    #[test]
    fn gain_spread_shrinks_with_n() {
        let mut spreads = Vec::new();
        for n in [32usize, 128, 512] {
            let config = cfg(n, n / 8);
            let target = 7f64.sqrt();
            let trials = 40;
            let dev: f64 = (0..trials)
                .map(|t| {
                    let h = generate_channel(&config, &mut substream(77, t));
                    (zf_precoder(&h, 1.0).unwrap().gain - target).powi(2)
                })
                .sum::<f64>()
                / trials as f64;
            spreads.push(dev.sqrt());
        }
        assert!(spreads[0] > spreads[1] && spreads[1] > spreads[2], "{spreads:?}");
    }
}
