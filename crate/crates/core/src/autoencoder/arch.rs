use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curves::DEFAULT_SAMPLES;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
}

impl Activation {
    pub fn name(&self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
        }
    }
}

/// Autoencoder topology. The decoder mirrors the encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchSpec {
    pub input_size: usize,
    pub encoder_hidden: Vec<usize>,
    pub latent_dim: usize,
    pub activation: Activation,
    pub dropout_keep: f64,
}

/// Role of one dense layer in the stacked network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerShape {
    pub fan_in: usize,
    pub fan_out: usize,
    /// Output goes through the activation (hidden layers only).
    pub activated: bool,
    /// Input is a hidden-layer output and is subject to dropout.
    pub dropout_input: bool,
}

impl ArchSpec {
    pub fn new(encoder_hidden: Vec<usize>) -> Result<Self> {
        let arch = Self {
            input_size: DEFAULT_SAMPLES,
            encoder_hidden,
            latent_dim: 1,
            activation: Activation::Tanh,
            dropout_keep: 0.9,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn with_input_size(mut self, n: usize) -> Self {
        self.input_size = n;
        self
    }

    pub fn with_latent_dim(mut self, d: usize) -> Self {
        self.latent_dim = d;
        self
    }

    pub fn with_dropout_keep(mut self, p: f64) -> Self {
        self.dropout_keep = p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let depth = self.encoder_hidden.len();
        if !(1..=3).contains(&depth) {
            return Err(Error::InvalidArgument(format!(
                "encoder needs 1 to 3 hidden layers, got {depth}"
            )));
        }
        if self.input_size == 0 || self.latent_dim == 0 || self.encoder_hidden.contains(&0) {
            return Err(Error::InvalidArgument("layer sizes must be positive".into()));
        }
        if !(self.dropout_keep > 0.0 && self.dropout_keep <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "dropout keep probability must be in (0, 1], got {}",
                self.dropout_keep
            )));
        }
        Ok(())
    }

    pub fn decoder_hidden(&self) -> Vec<usize> {
        self.encoder_hidden.iter().rev().copied().collect()
    }

    /// Sizes of every layer from input to reconstruction.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_size];
        sizes.extend(&self.encoder_hidden);
        sizes.push(self.latent_dim);
        sizes.extend(self.decoder_hidden());
        sizes.push(self.input_size);
        sizes
    }

    /// Index (into the dense-layer list) of the layer producing the latent.
    pub fn latent_layer(&self) -> usize {
        self.encoder_hidden.len()
    }

    pub fn layers(&self) -> Vec<LayerShape> {
        let sizes = self.layer_sizes();
        let latent = self.latent_layer() + 1;
        let last = sizes.len() - 1;
        (0..last)
            .map(|j| LayerShape {
                fan_in: sizes[j],
                fan_out: sizes[j + 1],
                activated: j + 1 != latent && j + 1 != last,
                dropout_input: j != 0 && j != latent,
            })
            .collect()
    }

    /// Weights plus biases of the encoder (the decoder has the same count
    /// of connections).
    pub fn complexity(&self) -> usize {
        let mut prev = self.input_size;
        let mut total = 0;
        for &c in &self.encoder_hidden {
            total += prev * c + c;
            prev = c;
        }
        total + prev * self.latent_dim + self.latent_dim
    }

    /// `h1/h2/h3` with absent layers as 0.
    pub fn hidden_triplet(&self) -> [usize; 3] {
        let mut t = [0; 3];
        for (slot, v) in t.iter_mut().zip(&self.encoder_hidden) {
            *slot = *v;
        }
        t
    }
}

impl fmt::Display for ArchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hidden: Vec<String> = self.encoder_hidden.iter().map(|h| h.to_string()).collect();
        write!(f, "{}-[{}]-{}", self.input_size, hidden.join(","), self.latent_dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_roles() {
        let arch = ArchSpec::new(vec![20, 10]).unwrap();
        assert_eq!(arch.layer_sizes(), vec![1024, 20, 10, 1, 10, 20, 1024]);
        let layers = arch.layers();
        assert_eq!(layers.len(), 6);
        let activated: Vec<bool> = layers.iter().map(|l| l.activated).collect();
        assert_eq!(activated, vec![true, true, false, true, true, false]);
        let dropout: Vec<bool> = layers.iter().map(|l| l.dropout_input).collect();
        assert_eq!(dropout, vec![false, true, true, false, true, true]);
    }

    #[test]
    fn validation() {
        assert!(ArchSpec::new(vec![]).is_err());
        assert!(ArchSpec::new(vec![1, 2, 3, 4]).is_err());
        assert!(ArchSpec::new(vec![0]).is_err());
        assert!(ArchSpec::new(vec![5])
            .unwrap()
            .with_dropout_keep(0.0)
            .validate()
            .is_err());
    }

    #[test]
    fn complexity_formula() {
        let arch = ArchSpec::new(vec![100]).unwrap();
        assert_eq!(arch.complexity(), 1024 * 100 + 100 + 100 + 1);
        assert_eq!(arch.complexity(), 102_601);
        let tiny = ArchSpec::new(vec![1]).unwrap().with_input_size(1);
        assert_eq!(tiny.complexity(), 4);
    }
}
