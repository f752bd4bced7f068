use std::path::PathBuf;

use lathide::signal::wfdb::{decode_212, encode_212};
use lathide::signal::{
    block_signal, pack_message, read_wfdb_record, synthetic_record, unpack_message,
};
use proptest::prelude::*;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

#[test]
fn bundled_record_matches_generator() {
    let (header, dat) = synthetic_record("synth_ecg", 10_800, 360.0);
    assert_eq!(
        std::fs::read_to_string(data("synth_ecg.hea")).unwrap(),
        header.to_text()
    );
    assert_eq!(std::fs::read(data("synth_ecg.dat")).unwrap(), dat);
}

#[test]
fn bundled_record_reads_in_millivolts() {
    for channel in 0..2 {
        let buf = read_wfdb_record(data("synth_ecg"), channel).unwrap();
        assert_eq!(buf.len(), 10_800);
        assert_eq!(buf.sample_rate_hz, 360.0);
        let max = buf.samples.iter().copied().fold(f64::MIN, f64::max);
        assert!(max > 0.4 && max < 2.0, "{max}");
        // Samples sit on the 1/200 mV ADC grid.
        assert!(buf
            .samples
            .iter()
            .all(|v| ((v * 200.0).round() - v * 200.0).abs() < 1e-9));
    }
    let lead = read_wfdb_record(data("synth_ecg.hea"), 0).unwrap();
    let blocks = block_signal(&lead.samples, 8).unwrap();
    assert_eq!((blocks.blocks.len(), blocks.dropped), (1350, 0));
}

proptest! {
    #[test]
    fn codec_round_trip(samples in prop::collection::vec(-2048i16..=2047, 0..200)) {
        let bytes = encode_212(&samples);
        prop_assert_eq!(decode_212(&bytes, samples.len()).unwrap(), samples);
    }

    #[test]
    fn pack_round_trip(payload in prop::collection::vec(any::<u8>(), 0..64), k in 1u32..=16) {
        let symbols = pack_message(&payload, k).unwrap();
        prop_assert!(symbols.iter().all(|&s| s < 1 << k));
        prop_assert_eq!(unpack_message(&symbols, k, payload.len()).unwrap(), payload);
    }

    #[test]
    fn blocking_conserves(len in 0usize..300, n in 1usize..10) {
        let x: Vec<f64> = (0..len).map(|i| i as f64).collect();
        let b = block_signal(&x, n).unwrap();
        prop_assert_eq!(n * b.blocks.len() + b.dropped, len);
    }
}
