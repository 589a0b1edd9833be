//! `SLPN` model files: magic, `u16` version, the head geometry as `u32`
//! fields, then every tensor as little-endian `f32` in declaration order.

use std::fs;
use std::path::Path;

use super::{HeadConfig, ModelParams};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

const MAGIC: &[u8; 4] = b"SLPN";
const VERSION: u16 = 1;
const HEADER_FIELDS: usize = 14;

fn config_fields(c: &HeadConfig) -> [usize; HEADER_FIELDS] {
    [
        c.input_channels,
        c.spatial_side,
        c.conv_filters[0],
        c.conv_filters[1],
        c.conv_filters[2],
        c.kernel,
        c.conv_stride,
        c.pool_window,
        c.pool_stride,
        c.fc_sizes[0],
        c.fc_sizes[1],
        c.fc_sizes[2],
        c.fc_sizes[3],
        c.num_classes,
    ]
}

impl ModelParams<f32> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(6 + 4 * HEADER_FIELDS + 4 * self.param_count());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        for field in config_fields(self.config()) {
            out.extend_from_slice(&(field as u32).to_le_bytes());
        }
        for t in self.tensors() {
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let err = |m: &str| Error::ModelFormat(m.to_string());
        if bytes.len() < 6 || &bytes[..4] != MAGIC {
            return Err(err("bad magic, expected SLPN"));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {version}")));
        }
        let header_end = 6 + 4 * HEADER_FIELDS;
        if bytes.len() < header_end {
            return Err(err("truncated header"));
        }
        let f: Vec<usize> = bytes[6..header_end]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as usize)
            .collect();
        let config = HeadConfig {
            input_channels: f[0],
            spatial_side: f[1],
            conv_filters: [f[2], f[3], f[4]],
            kernel: f[5],
            conv_stride: f[6],
            pool_window: f[7],
            pool_stride: f[8],
            fc_sizes: [f[9], f[10], f[11], f[12]],
            num_classes: f[13],
        };
        config.validate()?;
        let expected = header_end + 4 * config.param_count();
        if bytes.len() != expected {
            return Err(Error::ModelFormat(format!(
                "expected {expected} bytes, found {}",
                bytes.len()
            )));
        }
        let mut values = bytes[header_end..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]));
        let tensors = config
            .param_shapes()
            .into_iter()
            .map(|shape| {
                let len = shape.iter().product();
                Tensor::new(shape, values.by_ref().take(len).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        ModelParams::from_tensors(config, tensors)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
