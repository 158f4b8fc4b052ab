use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Output activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    /// bounded to (-1, 1), for policies
    Tanh,
    /// for critics
    Identity,
}

/// Affine layer; `w` is row-major with shape `(n_out, n_in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub n_in: usize,
    pub n_out: usize,
}

impl Layer {
    fn zeros(n_in: usize, n_out: usize) -> Self {
        Self {
            w: vec![0.0; n_in * n_out],
            b: vec![0.0; n_out],
            n_in,
            n_out,
        }
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.w
            .chunks_exact(self.n_in)
            .zip(&self.b)
            .map(|(row, b)| row.iter().zip(x).fold(*b, |acc, (w, xi)| acc + w * xi))
            .collect()
    }
}

/// ReLU hidden layers followed by an affine output layer and `head`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
    head: Head,
}

/// Pre-activations and activations of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `acts[0]` is the input, `acts[l + 1]` the output of layer `l`
    acts: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("at least the input")
    }
}

/// Partial derivatives, shaped like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    pub layers: Vec<Layer>,
}

impl GradientBundle {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net.layers.iter().map(|l| Layer::zeros(l.n_in, l.n_out)).collect(),
        }
    }

    pub fn accumulate(&mut self, other: &GradientBundle) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.w.iter_mut().zip(&b.w).for_each(|(x, y)| *x += y);
            a.b.iter_mut().zip(&b.b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, k: f64) {
        for l in &mut self.layers {
            l.w.iter_mut().chain(l.b.iter_mut()).for_each(|x| *x *= k);
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        flatten(&self.layers)
    }
}

fn flatten(layers: &[Layer]) -> Vec<f64> {
    layers
        .iter()
        .flat_map(|l| l.w.iter().chain(&l.b).copied())
        .collect()
}

impl Mlp {
    /// `arch` lists every width, input first and output last. Weights are
    /// drawn uniformly from +-sqrt(6 / fan_in); biases start at zero.
    pub fn new<R: Rng + ?Sized>(arch: &[usize], head: Head, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(arch, head)?;
        for l in &mut net.layers {
            let bound = (6.0 / l.n_in as f64).sqrt();
            l.w.iter_mut().for_each(|w| *w = rng.gen_range(-bound..bound));
        }
        Ok(net)
    }

    pub fn zeros(arch: &[usize], head: Head) -> Result<Self> {
        if arch.len() < 2 || arch.contains(&0) {
            return Err(Error::Shape(format!("invalid architecture {arch:?}")));
        }
        let layers = arch.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        Ok(Self { layers, head })
    }

    /// Builds a network from explicit layers, checking that widths chain.
    pub fn from_layers(layers: Vec<Layer>, head: Head) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.w.len() != l.n_in * l.n_out || l.b.len() != l.n_out || l.n_in == 0 || l.n_out == 0 {
                return Err(Error::Shape(format!(
                    "layer {i}: W has {} entries and b {} for shape {}x{}",
                    l.w.len(),
                    l.b.len(),
                    l.n_out,
                    l.n_in
                )));
            }
            if i > 0 && layers[i - 1].n_out != l.n_in {
                return Err(Error::Shape(format!(
                    "layer {i} expects {} inputs but layer {} emits {}",
                    l.n_in,
                    i - 1,
                    layers[i - 1].n_out
                )));
            }
            if l.w.iter().chain(&l.b).any(|v| !v.is_finite()) {
                return Err(Error::Shape(format!("layer {i} has non-finite parameters")));
            }
        }
        Ok(Self { layers, head })
    }

    pub fn arch(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].n_in)
            .chain(self.layers.iter().map(|l| l.n_out))
            .collect()
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").n_out
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::Shape(format!(
                "{} parameters supplied for a network with {}",
                flat.len(),
                self.n_params()
            )));
        }
        let mut it = flat.iter().copied();
        for l in &mut self.layers {
            l.w.iter_mut().chain(l.b.iter_mut()).for_each(|p| *p = it.next().unwrap());
        }
        Ok(())
    }

    /// Multiplies the last layer's weights and biases by `k`.
    pub fn scale_output_layer(&mut self, k: f64) {
        let l = self.layers.last_mut().expect("nonempty");
        l.w.iter_mut().chain(l.b.iter_mut()).for_each(|p| *p *= k);
    }

    /// Moves every parameter toward `other`: `p <- (1 - tau) p + tau q`.
    pub fn soft_update(&mut self, other: &Mlp, tau: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (p, q) in a.w.iter_mut().chain(a.b.iter_mut()).zip(b.w.iter().chain(&b.b)) {
                *p = (1.0 - tau) * *p + tau * q;
            }
        }
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "network expects {} inputs, got {}",
                self.input_dim(),
                input.len()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let last = self.layers.len() - 1;
        let mut a = input.to_vec();
        for (i, l) in self.layers.iter().enumerate() {
            a = l.affine(&a);
            if i < last {
                a.iter_mut().for_each(|v| *v = v.max(0.0));
            } else if self.head == Head::Tanh {
                a.iter_mut().for_each(|v| *v = v.tanh());
            }
        }
        Ok(a)
    }

    pub fn forward_cached(&self, input: &[f64]) -> Result<ForwardCache> {
        self.check_input(input)?;
        let last = self.layers.len() - 1;
        let mut acts = vec![input.to_vec()];
        let mut pre = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            let z = l.affine(acts.last().unwrap());
            let a = if i < last {
                z.iter().map(|v| v.max(0.0)).collect()
            } else if self.head == Head::Tanh {
                z.iter().map(|v| v.tanh()).collect()
            } else {
                z.clone()
            };
            pre.push(z);
            acts.push(a);
        }
        Ok(ForwardCache { acts, pre })
    }

    /// Gradient of `upstream . output` with respect to the parameters and
    /// the input. ReLU uses subgradient 0 at 0.
    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<(GradientBundle, Vec<f64>)> {
        if upstream.len() != self.output_dim() || cache.pre.len() != self.layers.len() {
            return Err(Error::Shape(format!(
                "upstream has {} entries for {} outputs",
                upstream.len(),
                self.output_dim()
            )));
        }
        let last = self.layers.len() - 1;
        let mut grads = GradientBundle::zeros_like(self);
        let mut delta: Vec<f64> = match self.head {
            Head::Tanh => upstream
                .iter()
                .zip(&cache.acts[last + 1])
                .map(|(g, y)| g * (1.0 - y * y))
                .collect(),
            Head::Identity => upstream.to_vec(),
        };
        for i in (0..=last).rev() {
            let l = &self.layers[i];
            let x = &cache.acts[i];
            let g = &mut grads.layers[i];
            for (o, d) in delta.iter().enumerate() {
                g.b[o] = *d;
                if *d != 0.0 {
                    g.w[o * l.n_in..(o + 1) * l.n_in]
                        .iter_mut()
                        .zip(x)
                        .for_each(|(gw, xi)| *gw = d * xi);
                }
            }
            let mut down = vec![0.0; l.n_in];
            for (row, d) in l.w.chunks_exact(l.n_in).zip(&delta) {
                if *d != 0.0 {
                    down.iter_mut().zip(row).for_each(|(acc, w)| *acc += d * w);
                }
            }
            if i > 0 {
                down.iter_mut()
                    .zip(&cache.pre[i - 1])
                    .for_each(|(g, z)| if *z <= 0.0 { *g = 0.0 });
            }
            delta = down;
        }
        Ok((grads, delta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&[4, 8, 3], Head::Identity).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0, 0.5]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn single_affine_layer() {
        let l = Layer { w: vec![2.0], b: vec![1.0], n_in: 1, n_out: 1 };
        let net = Mlp::from_layers(vec![l], Head::Identity).unwrap();
        assert_eq!(net.forward(&[3.0]).unwrap(), vec![7.0]);
    }

    #[test]
    fn linear_gradient_is_outer_product() {
        let l = Layer { w: vec![0.3, -0.2, 0.5, 0.1, 0.0, 0.7], b: vec![0.0, 0.0], n_in: 3, n_out: 2 };
        let net = Mlp::from_layers(vec![l], Head::Identity).unwrap();
        let x = [1.0, 2.0, -1.0];
        let up = [0.5, -3.0];
        let (g, _) = net.backward(&net.forward_cached(&x).unwrap(), &up).unwrap();
        for o in 0..2 {
            for i in 0..3 {
                assert_eq!(g.layers[0].w[o * 3 + i], up[o] * x[i]);
            }
        }
        assert_eq!(g.layers[0].b, up.to_vec());
    }

    #[test]
    fn relu_at_zero_passes_no_gradient() {
        // hidden pre-activation is exactly 0
        let l1 = Layer { w: vec![1.0], b: vec![-1.0], n_in: 1, n_out: 1 };
        let l2 = Layer { w: vec![2.0], b: vec![0.0], n_in: 1, n_out: 1 };
        let net = Mlp::from_layers(vec![l1, l2], Head::Identity).unwrap();
        let (g, dx) = net.backward(&net.forward_cached(&[1.0]).unwrap(), &[1.0]).unwrap();
        assert_eq!(g.layers[0].w, vec![0.0]);
        assert_eq!(dx, vec![0.0]);
    }

    #[test]
    fn tanh_head_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::new(&[5, 16, 2], Head::Tanh, &mut rng).unwrap();
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
            for y in net.forward(&x).unwrap() {
                assert!(y > -1.0 && y < 1.0);
            }
        }
    }

    #[test]
    fn shape_errors() {
        let net = Mlp::zeros(&[3, 2], Head::Identity).unwrap();
        assert!(net.forward(&[1.0]).is_err());
        assert!(Mlp::zeros(&[3], Head::Identity).is_err());
        let bad = Layer { w: vec![0.0; 5], b: vec![0.0; 2], n_in: 3, n_out: 2 };
        assert!(Mlp::from_layers(vec![bad], Head::Identity).is_err());
        let a = Layer { w: vec![0.0; 6], b: vec![0.0; 2], n_in: 3, n_out: 2 };
        let b = Layer { w: vec![0.0; 3], b: vec![0.0; 1], n_in: 3, n_out: 1 };
        assert!(Mlp::from_layers(vec![a, b], Head::Identity).is_err());
    }

    #[test]
    fn flat_round_trip_and_soft_update() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = Mlp::new(&[3, 4, 2], Head::Tanh, &mut rng).unwrap();
        let mut b = Mlp::zeros(&[3, 4, 2], Head::Tanh).unwrap();
        b.set_flat(&a.to_flat()).unwrap();
        assert_eq!(a, b);
        let mut c = Mlp::zeros(&[3, 4, 2], Head::Tanh).unwrap();
        c.soft_update(&a, 1.0);
        assert_eq!(c, a);
        assert!(b.set_flat(&[0.0]).is_err());
        assert_eq!(a.n_params(), 3 * 4 + 4 + 4 * 2 + 2);
        assert_eq!(a.arch(), vec![3, 4, 2]);
    }
}
