use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Relu,
    LeakyRelu(f32),
}

impl Activation {
    /// Slope fed to the shared leaky-relu kernel; plain ReLU is slope 0.
    pub fn slope(&self) -> f32 {
        match self {
            Activation::Relu => 0.0,
            Activation::LeakyRelu(s) => *s,
        }
    }
}

pub const LAYERS: usize = 8;
pub const FILTERS: [usize; LAYERS] = [32, 32, 32, 256, 512, 256, 256, 1];
const FOVEANET_KERNELS: [usize; LAYERS] = [15, 13, 11, 9, 7, 5, 3, 1];
const FOVEANET4SAT_KERNELS: [usize; LAYERS] = [3, 3, 3, 3, 3, 3, 3, 1];
pub const DEFAULT_LEAKY_SLOPE: f32 = 0.01;

/// Structural description of one of the two architectures. Both are
/// 8-layer all-convolutional heatmap regressors; they differ in kernel
/// sizes, activation, and whether a single 2x2 max-pool after layer 1
/// halves the output resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchDescriptor {
    pub name: String,
    /// Temporal stack depth c; the input has c grayscale channels.
    pub channels_in: usize,
    pub filters: [usize; LAYERS],
    pub kernels: [usize; LAYERS],
    pub pool_after_layer1: bool,
    pub activation: Activation,
    /// 1-based layer indices whose activations are dropped out in training.
    pub dropout_layers: Vec<usize>,
    pub dropout_rate: f64,
}

impl ArchDescriptor {
    /// Large-kernel variant: 15-13-11-9-7-5-3-1 kernels, ReLU, one 2x2
    /// max-pool after layer 1, half-resolution output.
    pub fn foveanet(channels_in: usize) -> Result<Self> {
        let d = ArchDescriptor {
            name: "foveanet".to_string(),
            channels_in,
            filters: FILTERS,
            kernels: FOVEANET_KERNELS,
            pool_after_layer1: true,
            activation: Activation::Relu,
            dropout_layers: vec![6, 7],
            dropout_rate: 0.5,
        };
        d.validate()?;
        Ok(d)
    }

    /// Small-kernel variant: all 3x3 (1x1 last), leaky ReLU, no pooling,
    /// full-resolution output.
    pub fn foveanet4sat(channels_in: usize) -> Result<Self> {
        let d = ArchDescriptor {
            name: "foveanet4sat".to_string(),
            channels_in,
            filters: FILTERS,
            kernels: FOVEANET4SAT_KERNELS,
            pool_after_layer1: false,
            activation: Activation::LeakyRelu(DEFAULT_LEAKY_SLOPE),
            dropout_layers: vec![6, 7],
            dropout_rate: 0.5,
        };
        d.validate()?;
        Ok(d)
    }

    /// Registry lookup used by config files and the CLI.
    pub fn by_name(name: &str, channels_in: usize) -> Result<Self> {
        match name {
            "foveanet" => ArchDescriptor::foveanet(channels_in),
            "foveanet4sat" => ArchDescriptor::foveanet4sat(channels_in),
            other => Err(Error::data("ArchDescriptor", format!("unknown model {other:?}, expected foveanet or foveanet4sat"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::data("ArchDescriptor", msg));
        if ![1, 3, 5, 7].contains(&self.channels_in) {
            return err(format!("channels_in must be one of 1,3,5,7, got {}", self.channels_in));
        }
        if self.filters[LAYERS - 1] != 1 || self.kernels[LAYERS - 1] != 1 {
            return err("last layer must have one 1x1 filter".to_string());
        }
        if self.kernels.iter().any(|&k| k == 0 || k % 2 == 0) {
            return err(format!("kernel sizes must be odd for symmetric padding, got {:?}", self.kernels));
        }
        match self.name.as_str() {
            "foveanet" => {
                if !self.pool_after_layer1 || !matches!(self.activation, Activation::Relu) {
                    return err("foveanet requires pooling and relu".to_string());
                }
            }
            "foveanet4sat" => {
                if self.pool_after_layer1 || !matches!(self.activation, Activation::LeakyRelu(_)) {
                    return err("foveanet4sat requires no pooling and leaky_relu".to_string());
                }
            }
            other => return err(format!("unknown architecture name {other:?}")),
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return err(format!("dropout_rate must be in [0,1), got {}", self.dropout_rate));
        }
        if self.dropout_layers.iter().any(|&l| l == 0 || l > LAYERS) {
            return err(format!("dropout layers must be 1-based layer indices, got {:?}", self.dropout_layers));
        }
        Ok(())
    }

    /// Input channel count of 1-based-from-0 layer `i`.
    pub fn layer_in_channels(&self, i: usize) -> usize {
        if i == 0 {
            self.channels_in
        } else {
            self.filters[i - 1]
        }
    }

    /// Total learnable parameters: sum over layers of
    /// k*k*in_ch*out_ch + out_ch.
    pub fn param_count(&self) -> usize {
        (0..LAYERS)
            .map(|i| {
                let k = self.kernels[i];
                k * k * self.layer_in_channels(i) * self.filters[i] + self.filters[i]
            })
            .sum()
    }

    /// Downsampling exponent of the output heatmap (1 with pooling, else 0).
    pub fn output_scale_exp(&self) -> u8 {
        u8::from(self.pool_after_layer1)
    }
}
