use proptest::prelude::*;

use raht_codec::synth::{generate, SynthKind, SynthSpec};
use raht_codec::{
    decode, encode, parse_ply, psnr_y, voxelize, write_ply, Cloud, CloudF32, CodecStream, Geometry, OrderingMode,
    PlyFormat,
};

fn synthetic(kind: SynthKind, depth: u32, fill: f64, seed: u64) -> Cloud {
    voxelize(&generate(&SynthSpec { kind, depth, fill, seed }).unwrap(), depth).unwrap().cloud
}

fn cloud_strategy() -> impl Strategy<Value = Cloud> {
    (1u32..=5)
        .prop_flat_map(|depth| {
            let cells = 1u64 << (3 * depth);
            (Just(depth), prop::collection::btree_set(0..cells, 1..300))
        })
        .prop_flat_map(|(depth, codes)| {
            let n = codes.len();
            (Just(depth), Just(codes), prop::collection::vec(prop::array::uniform3(0.0..255.0f64), n))
        })
        .prop_map(|(depth, codes, attrs)| {
            Cloud::new(Geometry::new(depth, codes.into_iter().collect()).unwrap(), attrs).unwrap()
        })
}

#[test]
fn ply_file_through_codec() {
    let cloud = synthetic(SynthKind::Noise, 6, 0.02, 4);
    let ply = write_ply(&cloud, PlyFormat::BinaryLittleEndian);
    let reread = voxelize::<f64>(&parse_ply(&ply).unwrap(), 6).unwrap().cloud;
    assert_eq!(reread.geometry(), cloud.geometry());

    let bytes = encode(&reread, 2.0, OrderingMode::Depth, true).unwrap().to_bytes();
    let stream = CodecStream::from_bytes(&bytes).unwrap();
    let out: Cloud = decode(&stream, None).unwrap();
    let psnr = psnr_y(&reread, &out).unwrap();
    // Q/2 RMS bound at Q = 2.
    assert!(psnr >= 10.0 * (255.0f64 * 255.0).log10(), "{psnr}");
}

#[test]
fn single_precision_matches_double_closely() {
    let cloud = synthetic(SynthKind::Gradient, 5, 0.2, 8);
    let narrow: CloudF32 = cloud.cast();
    let wide_out: Cloud = decode(&encode(&cloud, 10.0, OrderingMode::Weight, true).unwrap(), None).unwrap();
    let narrow_out: CloudF32 = decode(&encode(&narrow, 10.0, OrderingMode::Weight, true).unwrap(), None).unwrap();
    let p64 = psnr_y(&cloud, &wide_out).unwrap();
    let p32 = psnr_y(&narrow, &narrow_out).unwrap();
    assert!((p64 - p32).abs() < 0.01, "{p64} vs {p32}");
}

#[test]
fn depth_order_beats_traversal_on_smooth_clouds() {
    for seed in 0..5 {
        let cloud = synthetic(SynthKind::Gradient, 6, 0.05, 100 + seed);
        for q in [10.0, 20.0, 40.0] {
            let d = encode(&cloud, q, OrderingMode::Depth, false).unwrap().bpv();
            let t = encode(&cloud, q, OrderingMode::Traversal, false).unwrap().bpv();
            assert!(d < t, "seed {seed} Q {q}: {d} >= {t}");
        }
    }
}

#[test]
fn constant_cloud_payload_is_tiny() {
    let cloud = synthetic(SynthKind::Constant, 6, 0.05, 1);
    let s = encode(&cloud, 10.0, OrderingMode::Depth, false).unwrap();
    let bits: usize = s.payloads.iter().map(|p| 8 * p.len()).sum();
    assert!(bits * 20 < cloud.len(), "{bits} payload bits for {} voxels", cloud.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decode_is_independent_of_mode(cloud in cloud_strategy(), q in 0.5f64..80.0, bundle in any::<bool>()) {
        let outs: Vec<Vec<[u64; 3]>> = OrderingMode::ALL
            .iter()
            .map(|&m| {
                let bytes = encode(&cloud, q, m, bundle).unwrap().to_bytes();
                let stream = CodecStream::from_bytes(&bytes).unwrap();
                let geometry = if bundle { None } else { Some(cloud.geometry()) };
                let out: Cloud = decode(&stream, geometry).unwrap();
                out.attributes().iter().map(|a| a.map(f64::to_bits)).collect()
            })
            .collect();
        prop_assert_eq!(&outs[0], &outs[1]);
        prop_assert_eq!(&outs[0], &outs[2]);
    }

    #[test]
    fn truncated_or_corrupt_streams_error(cloud in cloud_strategy(), cut in any::<prop::sample::Index>(), flip in any::<prop::sample::Index>()) {
        let bytes = encode(&cloud, 4.0, OrderingMode::Depth, true).unwrap().to_bytes();
        let short = &bytes[..cut.index(bytes.len())];
        prop_assert!(CodecStream::from_bytes(short).is_err());

        let mut corrupt = bytes.clone();
        let i = flip.index(corrupt.len());
        corrupt[i] ^= 0x5a;
        if let Ok(stream) = CodecStream::from_bytes(&corrupt) {
            // Must return, either way; a panic fails the property.
            let _ = decode::<f64>(&stream, None);
        }
    }
}
