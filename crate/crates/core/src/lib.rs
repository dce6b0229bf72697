pub mod benchgen;
pub mod features;
pub mod imaging;
pub mod metrics;
pub mod transforms;
