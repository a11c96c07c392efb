//! Forward model of a multiplexed click detector: response function, coherent
//! click statistics, the photon-to-click and loss matrices, and a shot-level
//! sampler.

mod channel;
mod photon;
mod response;
mod sampler;

pub(crate) use channel::ratio_to_f64;
pub use channel::{
    apply_channel, conversion_matrix, loss_matrix, ChannelMatrix, ChannelOutput, ChannelRole, Propagated,
    TAIL_WARNING_THRESHOLD,
};
pub use photon::{default_n_max, photon_flux, poisson_distribution, TruncatedPoisson, PLANCK, SPEED_OF_LIGHT};
pub use response::{coherent_click_distribution, response_gamma, ResponseParams};
pub use sampler::{sample_shots, ShotSampler};
