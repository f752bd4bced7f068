//! Distortion metrics, closed-form distortion theory with independent
//! oracles, and the AWGN attack channel.

mod attack;
mod metrics;
mod theory;

pub use attack::{awgn_attack, cell_uniform_hosts, message_error_rate, AttackModel, ErrorRate};
pub use metrics::{mse, prd, psnr, MetricsReport};
pub use theory::{
    distortion_saving_mc, mdqim_mse_exact_scalar, mdqim_mse_lower_bound, qim_mse_theoretical,
    SavingEstimate, TheoryReport,
};

/// Serializes non-finite floats as `null` and reads `null` back as +∞.
pub(crate) mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
