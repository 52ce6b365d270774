//! Normal and chi-square distribution functions.
//!
//! The normal CDF is evaluated through `erfc` (FreeBSD msun rational
//! approximations, accurate to about one ulp). The normal quantile is
//! Wichura's AS241 `PPND16`, with relative error around 1e-16 over the
//! whole open unit interval. Chi-square tails are only needed for one and
//! two degrees of freedom, where they have closed forms in terms of `erfc`
//! and `exp`.

#![allow(clippy::excessive_precision)] // published AS241 coefficients

use std::f64::consts::FRAC_1_SQRT_2;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal upper tail `1 - Φ(x)`, without cancellation for large `x`.
#[inline]
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Inverse standard normal CDF (AS241, `PPND16`).
///
/// Returns `-inf`/`+inf` at 0 and 1 and NaN outside `[0, 1]`.
pub fn normal_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }

    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let z = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -z
    } else {
        z
    }
}

/// Two-sided critical value `Φ⁻¹(1 - α/2)`.
pub fn two_sided_critical(alpha: f64) -> f64 {
    -normal_quantile(alpha / 2.0)
}

/// Chi-square CDF with one degree of freedom.
pub fn chi2_1_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        libm::erf((0.5 * x).sqrt())
    }
}

/// Chi-square upper tail with one degree of freedom.
pub fn chi2_1_sf(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        libm::erfc((0.5 * x).sqrt())
    }
}

/// Chi-square CDF with two degrees of freedom.
pub fn chi2_2_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-0.5 * x).exp_m1()
    }
}

/// Chi-square upper tail with two degrees of freedom.
pub fn chi2_2_sf(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        (-0.5 * x).exp()
    }
}

/// Quantile of chi-square(2) at probability `1 - alpha`.
pub fn chi2_2_upper_quantile(alpha: f64) -> f64 {
    -2.0 * alpha.ln()
}

/// Quantile of chi-square(1) at probability `1 - alpha`.
pub fn chi2_1_upper_quantile(alpha: f64) -> f64 {
    let z = two_sided_critical(alpha);
    z * z
}

/// `ln(2π)`.
pub(crate) const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[inline]
fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quantile_landmarks() {
        assert_eq!(normal_quantile(0.5), 0.0);
        assert_abs_diff_eq!(normal_quantile(0.975), 1.959_963_984_540_054, epsilon = 1e-14);
        assert_abs_diff_eq!(normal_quantile(0.025), -1.959_963_984_540_054, epsilon = 1e-14);
        assert_abs_diff_eq!(normal_quantile(1e-10), -6.361_340_902_404_056, epsilon = 1e-12);
        assert!(normal_quantile(0.0).is_infinite());
        assert!(normal_quantile(1.5).is_nan());
    }

    #[test]
    fn chi_square_closed_forms() {
        assert_abs_diff_eq!(chi2_2_upper_quantile(0.05), 5.991_464_547_107_979, epsilon = 1e-12);
        assert_abs_diff_eq!(chi2_1_upper_quantile(0.05), 3.841_458_820_694_124, epsilon = 1e-12);
        assert_abs_diff_eq!(chi2_1_sf(3.841_458_820_694_124), 0.05, epsilon = 1e-14);
        assert_abs_diff_eq!(chi2_2_sf(9.633), 0.008_095_070_360_852, epsilon = 1e-12);
        assert_abs_diff_eq!(chi2_1_cdf(1.0) + chi2_1_sf(1.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn cdf_sf_symmetry() {
        for &x in &[-5.0, -1.3, 0.0, 0.7, 4.2] {
            assert_abs_diff_eq!(normal_cdf(x), normal_sf(-x), epsilon = 1e-16);
        }
    }
}
