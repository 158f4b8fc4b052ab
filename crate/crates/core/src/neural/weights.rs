use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::{Head, Layer, Mlp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LayerJson {
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

/// On-disk network: widths, row-major layer matrices, the seed that
/// initialized it and a caller-supplied creation stamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsFile {
    pub arch: Vec<usize>,
    pub head: Head,
    layers: Vec<LayerJson>,
    pub seed: u64,
    pub created_at: String,
}

impl WeightsFile {
    pub fn from_mlp(net: &Mlp, seed: u64, created_at: &str) -> Self {
        let layers = net
            .layers()
            .iter()
            .map(|l| LayerJson {
                w: l.w.chunks_exact(l.n_in).map(<[f64]>::to_vec).collect(),
                b: l.b.clone(),
            })
            .collect();
        Self {
            arch: net.arch(),
            head: net.head(),
            layers,
            seed,
            created_at: created_at.to_string(),
        }
    }

    pub fn to_mlp(&self) -> Result<Mlp> {
        if self.arch.len() != self.layers.len() + 1 {
            return Err(Error::Shape(format!(
                "arch {:?} needs {} layers, file has {}",
                self.arch,
                self.arch.len().saturating_sub(1),
                self.layers.len()
            )));
        }
        let mut layers = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            let (n_in, n_out) = (self.arch[i], self.arch[i + 1]);
            if l.w.len() != n_out || l.w.iter().any(|r| r.len() != n_in) {
                return Err(Error::Shape(format!(
                    "layer {i}: W is not {n_out}x{n_in} as arch {:?} requires",
                    self.arch
                )));
            }
            layers.push(Layer {
                w: l.w.concat(),
                b: l.b.clone(),
                n_in,
                n_out,
            });
        }
        Mlp::from_layers(layers, self.head)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn save_load_forward_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let net = Mlp::new(&[6, 50, 25, 10, 1], Head::Tanh, &mut rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.json");
        WeightsFile::from_mlp(&net, 9, "1970-01-01T00:00:00Z").save(&path).unwrap();
        let file = WeightsFile::load(&path).unwrap();
        assert_eq!(file.seed, 9);
        let back = file.to_mlp().unwrap();
        assert_eq!(back, net);
        let x = [0.1, -0.3, 0.7, 1.2, -2.0, 0.0];
        let (a, b) = (net.forward(&x).unwrap(), back.forward(&x).unwrap());
        assert_eq!(a[0].to_bits(), b[0].to_bits());
    }

    #[test]
    fn mismatched_shapes_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::new(&[3, 4, 1], Head::Identity, &mut rng).unwrap();
        let mut f = WeightsFile::from_mlp(&net, 1, "x");
        f.arch = vec![3, 5, 1];
        assert!(f.to_mlp().is_err());
        assert!(serde_json::from_str::<WeightsFile>("{\"arch\": [1,1]").is_err());
    }
}
