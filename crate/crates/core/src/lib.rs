//! Error probabilities of quantum receivers for pulse-position modulation.
//!
//! The crate models on/off photon detection of displaced thermal states,
//! binary discrimination bounds, and `M`-ary PPM receivers ranging from plain
//! direct detection to adaptive greedy and sliced Bayesian strategies. Error
//! probabilities are computed exactly by enumerating click outcomes where
//! that is feasible, and by seeded Monte Carlo otherwise.

// `!(x >= 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binary;
pub mod error;
pub mod exact;
pub mod montecarlo;
pub mod optics;
pub mod optimize;
pub mod ppm;
pub mod receivers;

pub use error::{Error, Result};
pub use optics::{ChannelParams, MeasurementSetting, SignalState};
pub use ppm::{ClickSequence, Posterior, PpmConfig};
pub use receivers::{MeasurementClass, ReceiverStrategy};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/detection.md")]
    mod detection {}
    #[doc = include_str!("../../../book/src/binary.md")]
    mod binary {}
    #[doc = include_str!("../../../book/src/ppm.md")]
    mod ppm {}
    #[doc = include_str!("../../../book/src/receivers.md")]
    mod receivers {}
    #[doc = include_str!("../../../book/src/slicing.md")]
    mod slicing {}
    #[doc = include_str!("../../../book/src/montecarlo.md")]
    mod montecarlo {}
}
