mod common;

use common::*;
use fusionqa_core::contrast::{csa, csa_band_report, michelson, Scope};
use fusionqa_core::edge_map::{label_edges, sobel_magnitude, threshold_sweep, DEFAULT_THRESHOLDS};
use fusionqa_core::histogram::{build_histogram, histogram_delta, Histogram256};
use fusionqa_core::raster::{extract_block, l_component, pixel_stats, upsample_nearest};
use fusionqa_core::regions::find_homogeneous_blocks;
use fusionqa_core::snr::{snr_region, snr_whole};
use fusionqa_core::synth::{generate_scene, simulate_fusion, SceneParams};
use fusionqa_core::{Band, BandId, MultibandImage, RegionSpec};
use proptest::prelude::*;

fn band_strategy(max_w: usize, max_h: usize) -> impl Strategy<Value = Band> {
    (1..=max_w, 1..=max_h).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<u8>(), w * h)
            .prop_map(move |px| Band::new(w, h, px).unwrap())
    })
}

/// Non-constant population with a non-zero mean.
fn population() -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(any::<u8>(), 2..300)
        .prop_filter("non-constant", |p| p.iter().any(|&v| v != p[0]))
}

fn hist_from(bins: &[u64]) -> Histogram256 {
    let mut c = [0u64; 256];
    c.copy_from_slice(bins);
    Histogram256::from_counts(BandId::R, Scope::Whole, c)
}

fn histogram_bins() -> impl Strategy<Value = Vec<u64>> {
    proptest::collection::vec(0u64..50, 256).prop_filter("non-empty", |b| b.iter().any(|&c| c > 0))
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn upsample_composes(band in band_strategy(8, 8), a in 1usize..=4, c in 1usize..=4) {
        let twice = upsample_nearest(&upsample_nearest(&band, a).unwrap(), c).unwrap();
        prop_assert_eq!(twice, upsample_nearest(&band, a * c).unwrap());
    }

    #[test]
    fn stats_match_two_pass_oracle(px in proptest::collection::vec(any::<u8>(), 1..500)) {
        let s = pixel_stats(&px).unwrap();
        let (mean, var) = naive_mean_var(&px);
        prop_assert!(rel_close(s.mean, mean, 1e-12));
        prop_assert!((s.std_dev.powi(2) - var).abs() <= 1e-9 * var.max(1.0));
        prop_assert_eq!(s.n, px.len());
        prop_assert_eq!(s.min, *px.iter().min().unwrap());
        prop_assert_eq!(s.max, *px.iter().max().unwrap());
    }

    #[test]
    fn extract_block_copies_pixels(band in band_strategy(20, 20), fx in 0.0f64..1.0, fy in 0.0f64..1.0, fw in 0.0f64..1.0, fh in 0.0f64..1.0) {
        let x0 = (fx * band.width() as f64) as usize;
        let y0 = (fy * band.height() as f64) as usize;
        let w = 1 + (fw * (band.width() - x0 - 1) as f64) as usize;
        let h = 1 + (fh * (band.height() - y0 - 1) as f64) as usize;
        let block = extract_block(&band, &RegionSpec::new("r", x0, y0, w, h)).unwrap();
        for y in 0..h {
            for x in 0..w {
                prop_assert_eq!(block.get(x, y), band.get(x0 + x, y0 + y));
            }
        }
    }

    #[test]
    fn l_of_gray_is_the_band(band in band_strategy(16, 16)) {
        prop_assert_eq!(l_component(&MultibandImage::gray("g", &band)), band);
    }

    #[test]
    fn sobel_matches_naive_convolution(band in band_strategy(24, 24)) {
        let fast = sobel_magnitude(&band);
        for (a, b) in fast.magnitudes().iter().zip(naive_sobel(&band)) {
            prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0));
        }
    }

    #[test]
    fn sobel_is_translation_equivariant(band in band_strategy(20, 20)) {
        prop_assume!(band.width() >= 4 && band.height() >= 4);
        let (w, h) = band.dims();
        // shift content by (1, 1); the new first row/column repeats the old one
        let shifted = Band::from_fn(w, h, |x, y| band.get(x.saturating_sub(1), y.saturating_sub(1))).unwrap();
        let (g0, g1) = (sobel_magnitude(&band), sobel_magnitude(&shifted));
        for y in 2..h - 1 {
            for x in 2..w - 1 {
                prop_assert_eq!(g1.get(x, y), g0.get(x - 1, y - 1));
            }
        }
    }

    #[test]
    fn edge_sets_shrink_with_threshold(band in band_strategy(24, 24)) {
        let sweep = threshold_sweep(&band, &[0, 10, 20, 40, 60, 80, 100, 200, 255]).unwrap();
        for pair in sweep.windows(2) {
            for (&hi, &lo) in pair[1].mask.labels().iter().zip(pair[0].mask.labels()) {
                prop_assert!(!hi || lo);
            }
            prop_assert!(pair[1].rate <= pair[0].rate);
        }
    }

    #[test]
    fn csa_is_michelson_of_mean_pm_std(p in population()) {
        let (mean, var) = naive_mean_var(&p);
        let sd = var.sqrt();
        let m = ((mean + sd) - (mean - sd)) / ((mean + sd) + (mean - sd));
        prop_assert!((csa(&p).unwrap() - m).abs() <= 1e-12);
    }

    #[test]
    fn csa_in_unit_interval(p in population()) {
        let v = csa(&p).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn contrast_is_scale_invariant(p in population(), c in 1u8..=8) {
        let cap = 255 / c;
        let p: Vec<u8> = p.iter().map(|&v| (v as u16 % (cap as u16 + 1)) as u8).collect();
        prop_assume!(p.iter().any(|&v| v != p[0]));
        let scaled: Vec<u8> = p.iter().map(|&v| v * c).collect();
        prop_assert_eq!(michelson(&scaled).unwrap(), michelson(&p).unwrap());
        prop_assert!((csa(&scaled).unwrap() - csa(&p).unwrap()).abs() <= 1e-12);
        prop_assert!((snr_region(&scaled).unwrap() - snr_region(&p).unwrap()).abs() <= 1e-12 * snr_region(&p).unwrap());
    }

    #[test]
    fn offset_lowers_contrast(p in population(), k in 1u8..=60) {
        let p: Vec<u8> = p.iter().map(|&v| v.min(255 - k)).collect();
        prop_assume!(p.iter().any(|&v| v != p[0]));
        let lifted: Vec<u8> = p.iter().map(|&v| v + k).collect();
        prop_assert!(michelson(&lifted).unwrap() < michelson(&p).unwrap());
        prop_assert!(csa(&lifted).unwrap() < csa(&p).unwrap());
    }

    #[test]
    fn snr_region_is_reciprocal_of_csa(p in population()) {
        prop_assert!((snr_region(&p).unwrap() * csa(&p).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn edge_and_homogeneous_partition_the_band(band in band_strategy(24, 24)) {
        let masks: Vec<_> = threshold_sweep(&band, &DEFAULT_THRESHOLDS).unwrap().into_iter().map(|e| e.mask).collect();
        let rows = csa_band_report(BandId::R, &band, &masks).unwrap();
        for pair in rows.chunks(2) {
            prop_assert_eq!(pair[0].n + pair[1].n, band.len());
        }
    }

    #[test]
    fn snr_whole_falls_as_error_grows(
        m in band_strategy(12, 12),
        seed in any::<u64>(),
        a1 in 1u8..=5,
        a2 in 1u8..=5,
    ) {
        prop_assume!(a1 != a2);
        let (lo, hi) = (a1.min(a2), a1.max(a2));
        // error pattern in {0, 1} with at least one 1; M kept low enough not to clamp
        let m = m.map(|v| v / 2);
        let e: Vec<u8> = (0..m.len()).map(|i| ((seed >> (i % 64)) & 1) as u8).collect();
        prop_assume!(e.contains(&1));
        let with = |alpha: u8| Band::new(m.width(), m.height(), m.pixels().iter().zip(&e).map(|(&v, &d)| v + alpha * d).collect()).unwrap();
        prop_assert!(snr_whole(&with(hi), &m).unwrap() < snr_whole(&with(lo), &m).unwrap());
    }

    #[test]
    fn snr_whole_matches_naive_sum(f in band_strategy(16, 16), seed in any::<u64>()) {
        let m = f.map(|v| v.wrapping_add((seed % 7) as u8 + 1));
        prop_assert!(rel_close(snr_whole(&f, &m).unwrap(), naive_snr_whole(&f, &m), 1e-9));
    }

    #[test]
    fn histograms_conserve_pixels(band in band_strategy(24, 24), t in any::<u8>()) {
        let mask = label_edges(&sobel_magnitude(&band), t);
        let h = build_histogram(&band, BandId::G, Some(&mask)).unwrap();
        prop_assert_eq!(h.bins().iter().sum::<u64>(), mask.edge_count() as u64);
        prop_assert_eq!(h.total(), mask.edge_count() as u64);
        let whole = build_histogram(&band, BandId::G, None).unwrap();
        let homog = naive_histogram(&band, |x, y| !mask.is_edge(x, y));
        for ((&w, &e), &o) in whole.bins().iter().zip(h.bins()).zip(&homog) {
            prop_assert_eq!(w, e + o);
        }
    }

    #[test]
    fn histogram_delta_is_a_metric(a in histogram_bins(), b in histogram_bins(), c in histogram_bins()) {
        let (ha, hb, hc) = (hist_from(&a), hist_from(&b), hist_from(&c));
        let ab = histogram_delta(&ha, &hb).unwrap();
        let bc = histogram_delta(&hb, &hc).unwrap();
        let ac = histogram_delta(&ha, &hc).unwrap();
        prop_assert_eq!(ab, histogram_delta(&hb, &ha).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(histogram_delta(&ha, &ha).unwrap(), 0.0);
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn homogeneous_blocks_are_disjoint_and_stable(band in band_strategy(40, 40), bw in 1usize..=6, bh in 1usize..=6, count in 1usize..=8) {
        let cells = (band.width() / bw) * (band.height() / bh);
        prop_assume!(bw <= band.width() && bh <= band.height() && count <= cells);
        let blocks = find_homogeneous_blocks(&band, bw, bh, count).unwrap();
        prop_assert_eq!(blocks.len(), count);
        for (i, a) in blocks.iter().enumerate() {
            prop_assert!(a.check_bounds(band.width(), band.height()).is_ok());
            for b in &blocks[i + 1..] {
                prop_assert!(!a.overlaps(b));
            }
        }
        prop_assert_eq!(find_homogeneous_blocks(&band, bw, bh, count).unwrap(), blocks);
    }
}

#[test]
fn per_band_masks_follow_their_own_band() {
    let edge = Band::from_fn(12, 12, |x, _| if x < 6 { 0 } else { 200 }).unwrap();
    let flat = Band::filled(12, 12, 100).unwrap();
    let img = MultibandImage::new("x", edge.clone(), flat.clone(), edge).unwrap();
    let counts: Vec<usize> = img
        .bands()
        .iter()
        .map(|(_, b)| label_edges(&sobel_magnitude(b), 20).edge_count())
        .collect();
    assert!(counts[0] > 0);
    assert_eq!(counts[1], 0);
    assert_eq!(counts[0], counts[2]);
}

fn edge_csa(img: &MultibandImage, band: BandId, t: u8) -> f64 {
    let b = img.band(band).unwrap();
    let mask = label_edges(&sobel_magnitude(b), t);
    let px: Vec<u8> = b
        .pixels()
        .iter()
        .zip(mask.labels())
        .filter(|(_, &e)| e)
        .map(|(&v, _)| v)
        .collect();
    csa(&px).unwrap()
}

#[test]
fn edge_csa_grows_with_hf_gain() {
    let (pan, ms) = generate_scene(&SceneParams::default()).unwrap();
    let fused: Vec<_> = [0.0, 0.5, 1.0, 2.0]
        .iter()
        .map(|&g| simulate_fusion(&pan, &ms, g, [0, 0, 0]).unwrap())
        .collect();
    for band in BandId::RGB {
        for t in DEFAULT_THRESHOLDS {
            let v: Vec<f64> = fused.iter().map(|f| edge_csa(f, band, t)).collect();
            assert!(
                v.windows(2).all(|w| w[0] <= w[1]),
                "band {band} T={t}: {v:?}"
            );
        }
    }
}

#[test]
fn snr_whole_falls_with_shift() {
    let (pan, ms) = generate_scene(&SceneParams::default()).unwrap();
    for sign in [1, -1] {
        let mut last = f64::INFINITY;
        for s in [1, 2, 5, 10, 20, 40] {
            let f = simulate_fusion(&pan, &ms, 0.0, [sign * s, 0, 0]).unwrap();
            let v = snr_whole(f.r(), ms.r()).unwrap();
            assert!(v < last, "shift {}: {v} !< {last}", sign * s);
            last = v;
        }
    }
}
