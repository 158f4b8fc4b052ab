//! Small fully connected networks with hand-written reverse mode, an Adam
//! optimizer and a JSON weights format.

mod adam;
mod mlp;
mod weights;

pub use adam::Adam;
pub use mlp::{ForwardCache, GradientBundle, Head, Layer, Mlp};
pub use weights::WeightsFile;
