use std::f64::consts::PI;

use super::wfdb::{self, SignalSpec, WfdbHeader};

// (amplitude mV, offset from R peak s, width s) for P, Q, R, S, T.
const WAVES: [[(f64, f64, f64); 5]; 2] = [
    [
        (0.15, -0.20, 0.025),
        (-0.12, -0.035, 0.010),
        (1.20, 0.0, 0.012),
        (-0.28, 0.035, 0.012),
        (0.32, 0.28, 0.045),
    ],
    [
        (0.08, -0.20, 0.030),
        (-0.05, -0.030, 0.010),
        (0.55, 0.0, 0.015),
        (-0.60, 0.040, 0.015),
        (-0.18, 0.30, 0.050),
    ],
];

/// Deterministic ECG-like waveform in mV: Gaussian P-QRS-T complexes at a
/// slowly varying heart rate around 72 bpm, plus baseline wander. `lead`
/// selects one of two morphologies (taken modulo 2).
pub fn synthetic_ecg(n_samples: usize, sample_rate_hz: f64, lead: usize) -> Vec<f64> {
    let waves = &WAVES[lead % 2];
    let duration = n_samples as f64 / sample_rate_hz;
    let mut beats = Vec::new();
    let mut t = 0.4;
    while t < duration + 1.0 {
        beats.push(t);
        t += 60.0 / 72.0 * (1.0 + 0.06 * (2.0 * PI * 0.1 * t).sin());
    }
    let mut first = 0;
    (0..n_samples)
        .map(|i| {
            let t = i as f64 / sample_rate_hz;
            while first < beats.len() && beats[first] < t - 1.0 {
                first += 1;
            }
            let mut v = 0.08 * (2.0 * PI * 0.3 * t).sin();
            for &b in beats[first..].iter().take_while(|&&b| b < t + 1.0) {
                for &(a, off, w) in waves {
                    let x = (t - b - off) / w;
                    v += a * (-0.5 * x * x).exp();
                }
            }
            v
        })
        .collect()
}

/// Two-lead format 212 record built from [`synthetic_ecg`]: gain 200 adu/mV,
/// baseline 1024, both leads interleaved in `<name>.dat`. Returns the header
/// and the data file bytes.
pub fn synthetic_record(
    name: &str,
    n_samples: usize,
    sample_rate_hz: f64,
) -> (WfdbHeader, Vec<u8>) {
    const GAIN: f64 = 200.0;
    const BASELINE: i32 = 1024;
    let dat = format!("{name}.dat");
    let leads: Vec<Vec<i16>> = (0..2)
        .map(|lead| {
            synthetic_ecg(n_samples, sample_rate_hz, lead)
                .iter()
                .map(|v| ((v * GAIN).round() as i32 + BASELINE).clamp(-2048, 2047) as i16)
                .collect()
        })
        .collect();
    let signals = ["MLII", "V5"]
        .iter()
        .zip(&leads)
        .map(|(label, adc)| {
            let mut s = SignalSpec::new_212(&dat, GAIN, BASELINE, label);
            s.initial_value = adc.first().map(|&v| v as i32);
            s.checksum = Some(wfdb::checksum(adc) as i32);
            s
        })
        .collect();
    let interleaved: Vec<i16> = (0..n_samples)
        .flat_map(|i| [leads[0][i], leads[1][i]])
        .collect();
    let header = WfdbHeader {
        record_name: name.into(),
        n_signals: 2,
        sampling_frequency: sample_rate_hz,
        n_samples,
        signals,
    };
    (header, wfdb::encode_212(&interleaved))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_is_plausible() {
        let x = synthetic_ecg(3600, 360.0, 0);
        let max = x.iter().copied().fold(f64::MIN, f64::max);
        let min = x.iter().copied().fold(f64::MAX, f64::min);
        assert!(max > 1.0 && max < 1.6, "{max}");
        assert!(min < -0.2 && min > -0.8, "{min}");
        // About 12 R peaks in ten seconds.
        let peaks = x
            .windows(3)
            .filter(|w| w[1] > 0.8 && w[1] >= w[0] && w[1] > w[2])
            .count();
        assert!((10..=14).contains(&peaks), "{peaks}");
        assert_eq!(x, synthetic_ecg(3600, 360.0, 0));
        assert_ne!(x, synthetic_ecg(3600, 360.0, 1));
    }
}
