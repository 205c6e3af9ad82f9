//! String oblivious transfer over generalized erasure channels: channel
//! models, the protocol state machines, attacks and the experiment harness.

pub mod adversary;
pub mod bits;
pub mod channel;
pub mod harness;
pub mod interactive_hashing;
pub mod protocol;
pub mod real;
pub mod seeds;
pub mod stats;
pub mod subset_codec;
pub mod typicality;
pub mod uhash;

pub type Dmc64 = channel::Dmc<f64>;
pub type Dmc32 = channel::Dmc<f32>;
pub type GecSpec64 = channel::GecSpec<f64>;
pub type GecSpec32 = channel::GecSpec<f32>;
pub type InputDistribution64 = channel::InputDistribution<f64>;
pub type ChannelStats64 = channel::ChannelStats<f64>;
