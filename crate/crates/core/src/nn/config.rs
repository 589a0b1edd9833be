use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of the inference head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadConfig {
    /// Number of utterance slots stacked as input channels.
    pub input_channels: usize,
    pub spatial_side: usize,
    pub conv_filters: [usize; 3],
    pub kernel: usize,
    pub conv_stride: usize,
    pub pool_window: usize,
    pub pool_stride: usize,
    pub fc_sizes: [usize; 4],
    pub num_classes: usize,
}

impl Default for HeadConfig {
    fn default() -> Self {
        Self {
            input_channels: 48,
            spatial_side: 32,
            conv_filters: [32, 64, 128],
            kernel: 3,
            conv_stride: 1,
            pool_window: 2,
            pool_stride: 2,
            fc_sizes: [128, 64, 32, 16],
            num_classes: 2,
        }
    }
}

impl HeadConfig {
    pub fn with_channels(input_channels: usize) -> Self {
        Self {
            input_channels,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.input_channels == 0 || self.spatial_side == 0 {
            return bad("input_channels and spatial_side must be positive".into());
        }
        if self.conv_filters.iter().chain(&self.fc_sizes).any(|&n| n == 0) {
            return bad("layer widths must be positive".into());
        }
        if self.kernel.is_multiple_of(2) {
            return bad(format!("kernel {} must be odd for same padding", self.kernel));
        }
        if self.conv_stride != 1 {
            return bad(format!("conv_stride {} unsupported, must be 1", self.conv_stride));
        }
        if self.pool_window < 1 || self.pool_window != self.pool_stride {
            return bad("pool window must equal pool stride".into());
        }
        let reduction = self.pool_window.pow(3);
        if !self.spatial_side.is_multiple_of(reduction) {
            return bad(format!(
                "spatial_side {} not divisible by {reduction}",
                self.spatial_side
            ));
        }
        if self.num_classes < 2 {
            return bad("num_classes must be at least 2".into());
        }
        Ok(())
    }

    /// Spatial side after each layer: input, then (conv, pool) three times.
    pub fn spatial_chain(&self) -> [usize; 7] {
        let p = self.pool_window;
        let s = self.spatial_side;
        [s, s, s / p, s / p, s / p / p, s / p / p, s / p / p / p]
    }

    pub fn flatten_size(&self) -> usize {
        let side = self.spatial_chain()[6];
        self.conv_filters[2] * side * side
    }

    pub fn input_shape(&self) -> [usize; 3] {
        [self.input_channels, self.spatial_side, self.spatial_side]
    }

    /// (in, out) widths of the five dense layers, the last feeding softmax.
    pub fn dense_dims(&self) -> [(usize, usize); 5] {
        let f = self.fc_sizes;
        [
            (self.flatten_size(), f[0]),
            (f[0], f[1]),
            (f[1], f[2]),
            (f[2], f[3]),
            (f[3], self.num_classes),
        ]
    }

    /// (in, out) channel counts of the three conv layers.
    pub fn conv_dims(&self) -> [(usize, usize); 3] {
        let c = self.conv_filters;
        [(self.input_channels, c[0]), (c[0], c[1]), (c[1], c[2])]
    }

    /// Tensor shapes in declaration order: conv weights/biases then dense.
    pub fn param_shapes(&self) -> Vec<Vec<usize>> {
        let k = self.kernel;
        let mut shapes = Vec::with_capacity(16);
        for (cin, cout) in self.conv_dims() {
            shapes.push(vec![cout, cin, k, k]);
            shapes.push(vec![cout]);
        }
        for (din, dout) in self.dense_dims() {
            shapes.push(vec![dout, din]);
            shapes.push(vec![dout]);
        }
        shapes
    }

    pub fn param_count(&self) -> usize {
        self.param_shapes().iter().map(|s| s.iter().product::<usize>()).sum()
    }
}
