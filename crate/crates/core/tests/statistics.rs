//! Distributional checks on the random draws, using seeded Monte Carlo runs
//! and Pearson chi-square tests against the uniform law.

#[path = "support/oracle.rs"]
mod oracle;

use oracle::chi_square_uniform_p;
use specaug::maskkit::{freq_mask, time_mask, FreqMaskParams, TimeMaskParams};
use specaug::policy::{split_stream, RngStream};
use specaug::warpkit::sample_warp;
use specaug::Spectrogram;

const P_FLOOR: f64 = 0.001;

fn flat(nu: usize, tau: usize) -> Spectrogram {
    let values = (0..nu * tau).map(|i| (i % 7) as f32 - 3.0).collect();
    Spectrogram::new(nu, tau, values).unwrap().normalize().unwrap()
}

#[test]
fn warp_shift_and_origin_are_uniform() {
    let mut shifts = vec![0u64; 161];
    let mut origins = vec![0u64; 839];
    for i in 0..10_000 {
        let draw = sample_warp(80, 1000, 80, &mut split_stream(2024, i));
        let t0 = draw.spec.origin.unwrap();
        assert!((81..=919).contains(&t0));
        shifts[(draw.spec.shift + 80) as usize] += 1;
        origins[t0 - 81] += 1;
    }
    let p = chi_square_uniform_p(&shifts);
    assert!(p > P_FLOOR, "shift p-value {p}");
    let p = chi_square_uniform_p(&origins);
    assert!(p > P_FLOOR, "origin p-value {p}");
}

#[test]
fn frequency_mask_widths_are_uniform() {
    let spec = flat(80, 20);
    let mut rng = split_stream(17, 0);
    let params = FreqMaskParams { max_width: 27, count: 1 };
    let mut counts = vec![0u64; 28];
    let mut total = 0usize;
    for _ in 0..10_000 {
        let (_, recs) = freq_mask(&spec, params, &mut rng).unwrap();
        counts[recs[0].width] += 1;
        total += recs[0].width;
    }
    let mean = total as f64 / 10_000.0;
    assert!((mean - 13.5).abs() <= 0.3, "mean width {mean}");
    let p = chi_square_uniform_p(&counts);
    assert!(p > P_FLOOR, "width p-value {p}");
}

#[test]
fn mask_starts_are_uniform_for_fixed_width() {
    // With cap 0 every width is 0 and the start covers [0, len).
    let spec = flat(40, 30);
    let mut rng = split_stream(3, 3);
    let mut counts = vec![0u64; 30];
    let params = TimeMaskParams { max_width: 0, max_fraction: 1.0, count: 1 };
    for _ in 0..15_000 {
        let (_, recs) = time_mask(&spec, params, &mut rng).unwrap();
        counts[recs[0].start] += 1;
    }
    let p = chi_square_uniform_p(&counts);
    assert!(p > P_FLOOR, "start p-value {p}");
}

#[test]
fn time_mask_widths_are_uniform_under_fraction_cap() {
    let spec = flat(10, 50);
    let mut rng = split_stream(8, 1);
    let params = TimeMaskParams { max_width: 70, max_fraction: 0.2, count: 2 };
    let mut counts = vec![0u64; 11];
    for _ in 0..5_000 {
        let (_, recs) = time_mask(&spec, params, &mut rng).unwrap();
        for r in recs {
            counts[r.width] += 1;
        }
    }
    let p = chi_square_uniform_p(&counts);
    assert!(p > P_FLOOR, "width p-value {p}");
}

#[test]
fn first_draws_across_streams_are_uniform() {
    let mut counts = vec![0u64; 256];
    for i in 0..1_000_000u64 {
        counts[(split_stream(42, i).next_u64() >> 56) as usize] += 1;
    }
    let p = chi_square_uniform_p(&counts);
    assert!(p > P_FLOOR, "byte p-value {p}");
}

#[test]
fn bounded_draws_are_uniform_for_awkward_bounds() {
    let mut rng = RngStream::new(9, 9);
    let mut counts = vec![0u64; 7];
    for _ in 0..70_000 {
        counts[rng.below(7) as usize] += 1;
    }
    assert!(chi_square_uniform_p(&counts) > P_FLOOR);
}

#[test]
fn derived_streams_are_uncorrelated_with_parent() {
    let parent = RngStream::new(1, 2);
    let mut a = parent.clone();
    let mut b = parent.derive(1);
    let n = 20_000;
    let (mut sa, mut sb, mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let (x, y) = (a.next_f64(), b.next_f64());
        sa += x;
        sb += y;
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    let n = n as f64;
    let cov = sab / n - (sa / n) * (sb / n);
    let corr = cov / ((saa / n - (sa / n).powi(2)).sqrt() * (sbb / n - (sb / n).powi(2)).sqrt());
    // Five standard errors of a zero correlation.
    assert!(corr.abs() < 5.0 / n.sqrt(), "correlation {corr}");
}
