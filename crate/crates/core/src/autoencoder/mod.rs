//! Single-latent autoencoder: architecture, network, losses, training and
//! model files.

mod arch;
mod io;
mod loss;
mod model;
mod network;
mod train;

pub use arch::{Activation, ArchSpec, LayerShape};
pub use io::{
    latent_histogram, load_model, model_from_json, model_to_json, save_model, LatentHistogram, FORMAT_VERSION,
};
pub use loss::{
    kl_ldl_gradient, loss_auc, loss_kl_ldl, loss_recon, total_loss, Constraint, LatentVariance, LossBreakdown,
    LossGradients, LossWeights, SIGMA_FLOOR,
};
pub use model::{CorpusTag, CurveDomain, LatentFit, SlrModel, TrainingMetadata};
pub use network::{backward, forward, forward_masked, Dense, DropoutMasks, ForwardPass, MlpWeights, Mode};
pub use train::{gradients, train, train_with_progress, TrainConfig, TrainReport, TrainingBatch};
