//! Output-gap functions, the gradient-correction observer, and
//! contraction certification.

pub mod certificate;
pub mod gap;
pub mod sim;

pub use certificate::{
    contraction_certificate, fit_decay_rate, gain_margin_probe, scan_gain,
    CertificateOutcome, GainScan, CONTRACTION_SLACK, MIN_CERTIFICATE_SAMPLES,
};
pub use gap::GapFunction;
pub use sim::{
    observer_field, simulate, DistanceMethod, ExitActor, Gain, ObserverConfig,
    ObserverRun, RegionExit,
};
