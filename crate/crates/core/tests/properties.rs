use proptest::prelude::*;

use spataudio::audio::{read_wav, resample, write_wav, AudioBuffer, SampleFormat};
use spataudio::config::RenderConfig;
use spataudio::dsp::{envelope, fft_convolve};
use spataudio::scene::{depth_from_gray, normalize_center, CameraModel, Trajectory};
use spataudio::spatial3d::{elevation_gain, pan_lr, DistanceEffect};

fn samples(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pan_channels_sum_to_input(x in -1.0f64..=1.0, s in samples(256)) {
        let (l, r) = pan_lr(&s, x).unwrap();
        for i in 0..s.len() {
            prop_assert_eq!(l[i] + r[i], s[i]);
        }
    }

    #[test]
    fn pan_rejects_out_of_range(x in prop_oneof![1.0001f64..10.0, -10.0f64..-1.0001]) {
        prop_assert!(pan_lr(&[1.0], x).is_err());
    }

    #[test]
    fn elevation_gain_is_non_negative(f in 0.0f64..8000.0, y in -1.0f64..=1.0) {
        let g = elevation_gain(f, y);
        prop_assert!(g >= 0.0);
        if y >= 0.0 {
            prop_assert!(g >= 1.0);
        }
    }

    #[test]
    fn centres_map_into_unit_square(xc in 0.0f64..=1.0, yc in 0.0f64..=1.0) {
        let (x, y) = normalize_center(xc, yc).unwrap();
        prop_assert!((-1.0..=1.0).contains(&x) && (-1.0..=1.0).contains(&y));
        prop_assert!((x - (2.0 * xc - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn depth_is_monotone_and_bounded(a in -50.0f64..300.0, b in -50.0f64..300.0) {
        let cam = CameraModel::default();
        let (za, zb) = (depth_from_gray(a, &cam), depth_from_gray(b, &cam));
        prop_assert!((cam.d_min..=cam.d_max).contains(&za));
        if a < b {
            prop_assert!(za >= zb);
        }
    }

    #[test]
    fn trajectory_lookup_stays_in_hull(
        pts in prop::collection::vec((-1.0f64..=1.0, 0.1f64..=5.0), 1..8),
        t in -1.0f64..10.0,
    ) {
        let samples: Vec<_> = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, z))| spataudio::scene::SpatialSample::new(i as f64, x, 0.0, z))
            .collect();
        let traj = Trajectory::new(samples).unwrap();
        let p = traj.at(t);
        let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(p.x >= lo - 1e-12 && p.x <= hi + 1e-12);
    }

    #[test]
    fn convolution_is_commutative(a in samples(200), b in samples(60)) {
        let (ab, ba) = (fft_convolve(&a, &b), fft_convolve(&b, &a));
        prop_assert_eq!(ab.len(), a.len() + b.len() - 1);
        for (x, y) in ab.iter().zip(&ba) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn envelope_bounds_the_signal(s in samples(300)) {
        let e = envelope(&s);
        prop_assert_eq!(e.len(), s.len());
        for (v, env) in s.iter().zip(&e) {
            prop_assert!(*env >= v.abs() - 1e-9);
        }
    }

    #[test]
    fn distance_effect_is_block_size_invariant(
        s in samples(600),
        z in 0.1f64..=5.0,
        split in 1usize..600,
    ) {
        let cfg = RenderConfig::default();
        let whole = DistanceEffect::new(&cfg).process(&s, z).unwrap();
        let cut = split.min(s.len());
        let mut fx = DistanceEffect::new(&cfg);
        let mut parts = fx.process(&s[..cut], z).unwrap();
        parts.extend(fx.process(&s[cut..], z).unwrap());
        for (a, b) in whole.iter().zip(&parts) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pcm16_round_trip_is_within_one_step(s in samples(400)) {
        let buf = AudioBuffer::mono(16000, s.clone()).unwrap();
        let back = read_wav(&write_wav(&buf, SampleFormat::Pcm16)).unwrap();
        for (a, b) in s.iter().zip(back.channel(0)) {
            prop_assert!((a - b).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn float32_round_trip_is_lossless_for_f32(s in samples(400)) {
        let s: Vec<f64> = s.iter().map(|&v| v as f32 as f64).collect();
        let buf = AudioBuffer::stereo(44100, s.clone(), s.clone()).unwrap();
        prop_assert_eq!(read_wav(&write_wav(&buf, SampleFormat::Float32)).unwrap(), buf);
    }

    #[test]
    fn resample_length_follows_rate_ratio(
        n in 1usize..5000,
        (src, dst) in prop::sample::select(vec![
            (16000u32, 48000u32), (48000, 16000), (44100, 16000), (16000, 44100), (22050, 16000),
        ]),
    ) {
        let buf = AudioBuffer::mono(src, vec![0.1; n]).unwrap();
        let out = resample(&buf, dst).unwrap();
        let want = (n as f64 * dst as f64 / src as f64).round() as usize;
        prop_assert_eq!(out.len(), want);
        prop_assert_eq!(out.sample_rate(), dst);
    }
}
