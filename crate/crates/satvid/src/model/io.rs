//! Weights file format.
//!
//! Layout: 8-byte magic `FVNETW01`, a little-endian u32 byte length followed
//! by a UTF-8 key=value manifest describing the architecture, then the f32
//! arrays little-endian in layer order, each layer's kernel before its bias.
//! Round-trips are bit-exact.

use super::{ArchDescriptor, Activation, ModelWeights, LAYERS};
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use tensorkit::Tensor4;

const MAGIC: &[u8; 8] = b"FVNETW01";

impl ModelWeights {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        let manifest = manifest_text(&self.descriptor);
        buf.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
        buf.extend_from_slice(manifest.as_bytes());
        for i in 0..LAYERS {
            for &v in self.kernels[i].data() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            for &v in &self.biases[i] {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&buf).map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ModelWeights> {
        let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut magic = [0u8; 8];
        read_exact(&mut file, &mut magic, "magic header")?;
        if &magic != MAGIC {
            return Err(Error::data("load weights", format!("wrong magic {magic:?}, not a weights file")));
        }
        let mut len_bytes = [0u8; 4];
        read_exact(&mut file, &mut len_bytes, "manifest length")?;
        let manifest_len = u32::from_le_bytes(len_bytes) as usize;
        let mut manifest = vec![0u8; manifest_len];
        read_exact(&mut file, &mut manifest, "manifest")?;
        let manifest =
            String::from_utf8(manifest).map_err(|_| Error::data("load weights", "manifest is not UTF-8".to_string()))?;
        let descriptor = parse_manifest(&manifest)?;
        descriptor.validate()?;

        let mut kernels = Vec::with_capacity(LAYERS);
        let mut biases = Vec::with_capacity(LAYERS);
        for i in 0..LAYERS {
            let k = descriptor.kernels[i];
            let in_ch = descriptor.layer_in_channels(i);
            let out_ch = descriptor.filters[i];
            let kernel = read_f32s(&mut file, out_ch * in_ch * k * k, &format!("layer {} kernel", i + 1))?;
            kernels.push(Tensor4::from_vec([out_ch, in_ch, k, k], kernel)?);
            biases.push(read_f32s(&mut file, out_ch, &format!("layer {} bias", i + 1))?);
        }
        let mut rest = [0u8; 1];
        if file.read(&mut rest).map_err(|e| Error::io(path, e))? != 0 {
            return Err(Error::data("load weights", "trailing bytes after final layer".to_string()));
        }
        Ok(ModelWeights { descriptor, kernels, biases })
    }

    /// Loads weights and rejects them unless the architecture matches
    /// `expected` exactly; errors name the first differing field.
    pub fn load_expecting(path: &Path, expected: &ArchDescriptor) -> Result<ModelWeights> {
        let w = ModelWeights::load(path)?;
        let got = &w.descriptor;
        if got.name != expected.name {
            return Err(Error::data("load weights", format!("model is {:?}, expected {:?}", got.name, expected.name)));
        }
        if got.channels_in != expected.channels_in {
            return Err(Error::data(
                "load weights",
                format!("model has {} input channels, expected {}", got.channels_in, expected.channels_in),
            ));
        }
        if got != expected {
            return Err(Error::data("load weights", "architecture fields differ from the requested descriptor".to_string()));
        }
        Ok(w)
    }
}

fn read_exact(file: &mut std::fs::File, buf: &mut [u8], what: &str) -> Result<()> {
    file.read_exact(buf)
        .map_err(|_| Error::data("load weights", format!("{what}: unexpected end of file")))
}

fn read_f32s(file: &mut std::fs::File, count: usize, what: &str) -> Result<Vec<f32>> {
    let mut bytes = vec![0u8; count * 4];
    read_exact(file, &mut bytes, what)?;
    Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
}

fn manifest_text(d: &ArchDescriptor) -> String {
    let activation = match d.activation {
        Activation::Relu => "relu".to_string(),
        Activation::LeakyRelu(s) => format!("leaky_relu:{s}"),
    };
    format!(
        "name={}\nchannels_in={}\nfilters={}\nkernels={}\npool_after_layer1={}\nactivation={}\ndropout_layers={}\ndropout_rate={}\n",
        d.name,
        d.channels_in,
        join(&d.filters),
        join(&d.kernels),
        d.pool_after_layer1,
        activation,
        join(&d.dropout_layers),
        d.dropout_rate,
    )
}

fn join(values: &[usize]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_manifest(text: &str) -> Result<ArchDescriptor> {
    let mut fields: HashMap<&str, &str> = HashMap::new();
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            fields.insert(k, v);
        }
    }
    let get = |key: &str| {
        fields
            .get(key)
            .copied()
            .ok_or_else(|| Error::data("load weights", format!("manifest missing key {key:?}")))
    };
    let parse_list = |key: &str| -> Result<Vec<usize>> {
        get(key)?
            .split(',')
            .map(|s| s.parse::<usize>().map_err(|_| Error::data("load weights", format!("bad {key} entry {s:?}"))))
            .collect()
    };

    let filters_v = parse_list("filters")?;
    let kernels_v = parse_list("kernels")?;
    let to_array = |v: Vec<usize>, key: &str| -> Result<[usize; LAYERS]> {
        v.try_into().map_err(|_| Error::data("load weights", format!("{key} must list {LAYERS} layers")))
    };
    let activation_field = get("activation")?;
    let activation = if activation_field == "relu" {
        Activation::Relu
    } else if let Some(slope) = activation_field.strip_prefix("leaky_relu:") {
        Activation::LeakyRelu(
            slope.parse().map_err(|_| Error::data("load weights", format!("bad leaky_relu slope {slope:?}")))?,
        )
    } else {
        return Err(Error::data("load weights", format!("unknown activation {activation_field:?}")));
    };

    Ok(ArchDescriptor {
        name: get("name")?.to_string(),
        channels_in: get("channels_in")?
            .parse()
            .map_err(|_| Error::data("load weights", "bad channels_in".to_string()))?,
        filters: to_array(filters_v, "filters")?,
        kernels: to_array(kernels_v, "kernels")?,
        pool_after_layer1: get("pool_after_layer1")?
            .parse()
            .map_err(|_| Error::data("load weights", "bad pool_after_layer1".to_string()))?,
        activation,
        dropout_layers: parse_list("dropout_layers")?,
        dropout_rate: get("dropout_rate")?
            .parse()
            .map_err(|_| Error::data("load weights", "bad dropout_rate".to_string()))?,
    })
}
