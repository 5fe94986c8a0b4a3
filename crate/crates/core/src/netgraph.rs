//! Architecture description, frozen-weight storage and the SMRG binary
//! model format.
//!
//! A [`ModelDef`] is an ordered list of layers plus a partition of those
//! layers into contiguous module groups. The architecture fingerprint
//! hashes kinds and dims only, so two models with the same topology but
//! different weights share a fingerprint. Forward passes never mutate
//! weights; the weight checksum is the witness for that contract.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tape::{Tape, Var};
use crate::tensor::Tensor;

const MAGIC: &[u8; 4] = b"SMRG";
const VERSION: u32 = 1;

const TAG_DENSE: u8 = 0;
const TAG_RELU: u8 = 1;
const TAG_FLATTEN: u8 = 2;

/// One layer of the network.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerKind<T: Scalar> {
    /// Affine map `x W + b` with `W: [in x out]` row-major and `b: [out]`.
    Dense { weight: Tensor<T>, bias: Tensor<T> },
    Relu,
    Flatten,
}

/// A layer at its position in the stack; the position is the layer index.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec<T: Scalar> {
    pub kind: LayerKind<T>,
}

impl<T: Scalar> LayerSpec<T> {
    pub fn dense(weight: Tensor<T>, bias: Tensor<T>) -> Result<Self> {
        if weight.shape().len() != 2 || bias.shape().len() != 1 {
            return Err(Error::ShapeMismatch {
                op: "dense",
                lhs: weight.shape().to_vec(),
                rhs: bias.shape().to_vec(),
            });
        }
        if weight.shape()[1] != bias.shape()[0] {
            return Err(Error::ShapeMismatch {
                op: "dense",
                lhs: weight.shape().to_vec(),
                rhs: bias.shape().to_vec(),
            });
        }
        Ok(Self {
            kind: LayerKind::Dense { weight, bias },
        })
    }

    pub fn relu() -> Self {
        Self {
            kind: LayerKind::Relu,
        }
    }

    pub fn flatten() -> Self {
        Self {
            kind: LayerKind::Flatten,
        }
    }
}

/// Contiguous half-open layer range `[start, end)` forming one module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModuleGroup {
    pub start: usize,
    pub end: usize,
}

/// One architecture with frozen weights and its module grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDef<T: Scalar> {
    layers: Vec<LayerSpec<T>>,
    groups: Vec<ModuleGroup>,
}

impl<T: Scalar> ModelDef<T> {
    /// Validates that groups partition the layer list in order and that
    /// consecutive dense layers are shape-compatible.
    pub fn new(layers: Vec<LayerSpec<T>>, groups: Vec<ModuleGroup>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("model needs at least one layer".into()));
        }
        let mut cursor = 0;
        for (i, g) in groups.iter().enumerate() {
            if g.start != cursor || g.end <= g.start {
                return Err(Error::InvalidConfig(format!(
                    "module group {i} [{}, {}) does not continue the partition at {cursor}",
                    g.start, g.end
                )));
            }
            cursor = g.end;
        }
        if cursor != layers.len() {
            return Err(Error::InvalidConfig(format!(
                "module groups cover {cursor} of {} layers",
                layers.len()
            )));
        }
        let def = Self { layers, groups };
        def.check_layer_chain()?;
        Ok(def)
    }

    /// Dense stack `in -> hidden... -> classes` with ReLU between dense
    /// layers, zero-initialized weights and a single module group.
    pub fn mlp(input: usize, hidden: &[usize], classes: usize) -> Result<Self> {
        let mut layers = Vec::new();
        let mut prev = input;
        for &h in hidden {
            layers.push(LayerSpec::dense(
                Tensor::zeros(&[prev, h]),
                Tensor::zeros(&[h]),
            )?);
            layers.push(LayerSpec::relu());
            prev = h;
        }
        layers.push(LayerSpec::dense(
            Tensor::zeros(&[prev, classes]),
            Tensor::zeros(&[classes]),
        )?);
        let groups = vec![ModuleGroup {
            start: 0,
            end: layers.len(),
        }];
        Self::new(layers, groups)
    }

    fn check_layer_chain(&self) -> Result<()> {
        let mut dim: Option<usize> = None;
        for (i, layer) in self.layers.iter().enumerate() {
            if let LayerKind::Dense { weight, .. } = &layer.kind {
                let (w_in, w_out) = (weight.shape()[0], weight.shape()[1]);
                if let Some(d) = dim {
                    if d != w_in {
                        return Err(Error::ArchMismatch(format!(
                            "layer {i} expects input dim {w_in} but receives {d}"
                        )));
                    }
                }
                dim = Some(w_out);
            }
        }
        Ok(())
    }

    pub fn layers(&self) -> &[LayerSpec<T>] {
        &self.layers
    }

    /// Mutable weight access for initialization and corruption; merging
    /// itself never calls this.
    pub fn layers_mut(&mut self) -> &mut [LayerSpec<T>] {
        &mut self.layers
    }

    pub fn groups(&self) -> &[ModuleGroup] {
        &self.groups
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn num_modules(&self) -> usize {
        self.groups.len()
    }

    /// Repartitions the layers into `m` contiguous modules of near-equal
    /// size (earlier modules take the remainder).
    pub fn split_into_modules(&mut self, m: usize) -> Result<()> {
        let l = self.layers.len();
        if m == 0 || m > l {
            return Err(Error::InvalidConfig(format!(
                "cannot split {l} layers into {m} modules"
            )));
        }
        let base = l / m;
        let extra = l % m;
        let mut groups = Vec::with_capacity(m);
        let mut start = 0;
        for i in 0..m {
            let len = base + usize::from(i < extra);
            groups.push(ModuleGroup {
                start,
                end: start + len,
            });
            start += len;
        }
        self.groups = groups;
        Ok(())
    }

    /// FNV-1a hash of layer kinds and dims; weights do not contribute.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new();
        h.write_u32(self.layers.len() as u32);
        for layer in &self.layers {
            match &layer.kind {
                LayerKind::Dense { weight, .. } => {
                    h.write_u8(TAG_DENSE);
                    h.write_u32(weight.shape()[0] as u32);
                    h.write_u32(weight.shape()[1] as u32);
                }
                LayerKind::Relu => h.write_u8(TAG_RELU),
                LayerKind::Flatten => h.write_u8(TAG_FLATTEN),
            }
        }
        h.finish()
    }

    /// FNV-1a hash over all weight and bias bytes; the frozen-weight
    /// witness.
    pub fn weights_checksum(&self) -> u64 {
        let mut h = Fnv::new();
        for layer in &self.layers {
            if let LayerKind::Dense { weight, bias } = &layer.kind {
                for &v in weight.data().iter().chain(bias.data()) {
                    h.write_u64(v.to_f64().to_bits());
                }
            }
        }
        h.finish()
    }

    fn apply_layer(layer: &LayerSpec<T>, x: &Tensor<T>) -> Result<Tensor<T>> {
        match &layer.kind {
            LayerKind::Dense { weight, bias } => x.matmul(weight)?.add_bias(bias),
            LayerKind::Relu => Ok(x.relu()),
            LayerKind::Flatten => x.flatten(),
        }
    }

    /// Plain forward pass over all layers.
    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        self.forward_range(0..self.layers.len(), x)
    }

    /// Plain forward pass over a contiguous layer range.
    pub fn forward_range(&self, range: Range<usize>, x: &Tensor<T>) -> Result<Tensor<T>> {
        let mut cur = x.clone();
        for layer in &self.layers[range] {
            cur = Self::apply_layer(layer, &cur)?;
        }
        Ok(cur)
    }

    /// Recorded forward pass over a contiguous layer range. Weights enter
    /// the tape as non-gradient leaves, so adjoints flow through them to
    /// upstream activations but never into them.
    pub fn forward_range_on(&self, tape: &mut Tape<T>, range: Range<usize>, x: Var) -> Result<Var> {
        let mut cur = x;
        for layer in &self.layers[range] {
            cur = match &layer.kind {
                LayerKind::Dense { weight, bias } => {
                    let w = tape.constant(weight.clone());
                    let b = tape.constant(bias.clone());
                    let h = tape.matmul(cur, w)?;
                    tape.add_bias(h, b)?
                }
                LayerKind::Relu => tape.relu(cur),
                LayerKind::Flatten => tape.flatten(cur)?,
            };
        }
        Ok(cur)
    }

    /// Output shape of a layer range for a given input shape, without
    /// evaluating anything. Used when every branch at a merge site is
    /// gated off and a zero output of the right shape is needed.
    pub fn range_out_shape(&self, range: Range<usize>, in_shape: &[usize]) -> Result<Vec<usize>> {
        let mut shape = in_shape.to_vec();
        for (i, layer) in self.layers[range.clone()].iter().enumerate() {
            match &layer.kind {
                LayerKind::Dense { weight, .. } => {
                    if shape.len() != 2 || shape[1] != weight.shape()[0] {
                        return Err(Error::ShapeMismatch {
                            op: "range_out_shape",
                            lhs: shape,
                            rhs: weight.shape().to_vec(),
                        });
                    }
                    shape[1] = weight.shape()[1];
                }
                LayerKind::Relu => {}
                LayerKind::Flatten => {
                    if shape.is_empty() {
                        return Err(Error::ShapeMismatch {
                            op: "range_out_shape",
                            lhs: shape,
                            rhs: vec![range.start + i],
                        });
                    }
                    shape = vec![shape[0], shape[1..].iter().product()];
                }
            }
        }
        Ok(shape)
    }

    /// Writes the model in SMRG format (see the README for the layout).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.layers.len() as u32).to_le_bytes())?;
        for layer in &self.layers {
            match &layer.kind {
                LayerKind::Dense { weight, bias } => {
                    w.write_all(&[TAG_DENSE])?;
                    w.write_all(&(weight.shape()[0] as u32).to_le_bytes())?;
                    w.write_all(&(weight.shape()[1] as u32).to_le_bytes())?;
                    for &v in weight.data() {
                        w.write_all(&v.to_f64().to_le_bytes())?;
                    }
                    for &v in bias.data() {
                        w.write_all(&v.to_f64().to_le_bytes())?;
                    }
                }
                LayerKind::Relu => w.write_all(&[TAG_RELU])?,
                LayerKind::Flatten => w.write_all(&[TAG_FLATTEN])?,
            }
        }
        w.write_all(&(self.groups.len() as u32).to_le_bytes())?;
        for g in &self.groups {
            w.write_all(&(g.start as u32).to_le_bytes())?;
            w.write_all(&(g.end as u32).to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a model back; bad magic, version mismatch and truncation are
    /// reported as distinct errors.
    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic, "magic")?;
        if &magic != MAGIC {
            return Err(Error::BadMagic {
                expected: String::from_utf8_lossy(MAGIC).into_owned(),
                found: format!("{magic:?}"),
            });
        }
        let version = read_u32(&mut r, "version")?;
        if version != VERSION {
            return Err(Error::VersionMismatch {
                expected: VERSION,
                found: version,
            });
        }
        let n_layers = read_u32(&mut r, "layer count")? as usize;
        let mut layers = Vec::with_capacity(n_layers);
        for i in 0..n_layers {
            let mut tag = [0u8; 1];
            read_exact(&mut r, &mut tag, "layer tag")?;
            let layer = match tag[0] {
                TAG_DENSE => {
                    let d_in = read_u32(&mut r, "dense in-dim")? as usize;
                    let d_out = read_u32(&mut r, "dense out-dim")? as usize;
                    let weight = read_f64s(&mut r, d_in * d_out, "dense weights")?;
                    let bias = read_f64s(&mut r, d_out, "dense bias")?;
                    LayerSpec::dense(
                        Tensor::from_vec(&[d_in, d_out], weight)?,
                        Tensor::from_vec(&[d_out], bias)?,
                    )?
                }
                TAG_RELU => LayerSpec::relu(),
                TAG_FLATTEN => LayerSpec::flatten(),
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown layer tag {other} at layer {i}"
                    )))
                }
            };
            layers.push(layer);
        }
        let n_groups = read_u32(&mut r, "group count")? as usize;
        let mut groups = Vec::with_capacity(n_groups);
        for _ in 0..n_groups {
            let start = read_u32(&mut r, "group start")? as usize;
            let end = read_u32(&mut r, "group end")? as usize;
            groups.push(ModuleGroup { start, end });
        }
        Self::new(layers, groups)
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Truncated(what.to_string())
        } else {
            Error::Io(e)
        }
    })
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact(r, &mut buf, what)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64s<T: Scalar, R: Read>(r: &mut R, n: usize, what: &str) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(n);
    let mut buf = [0u8; 8];
    for _ in 0..n {
        read_exact(r, &mut buf, what)?;
        out.push(T::from_f64(f64::from_le_bytes(buf)));
    }
    Ok(out)
}

/// `J` frozen models sharing one architecture.
#[derive(Debug, Clone)]
pub struct ModelZoo<T: Scalar> {
    models: Vec<ModelDef<T>>,
}

impl<T: Scalar> ModelZoo<T> {
    pub fn new(models: Vec<ModelDef<T>>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::InvalidConfig("zoo needs at least one model".into()));
        }
        let zoo = Self { models };
        zoo.assert_same_arch()?;
        Ok(zoo)
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn model(&self, j: usize) -> &ModelDef<T> {
        &self.models[j]
    }

    pub fn models(&self) -> &[ModelDef<T>] {
        &self.models
    }

    /// Verifies all models share the architecture. On mismatch the report
    /// names the first offending model and layer.
    pub fn assert_same_arch(&self) -> Result<()> {
        let reference = &self.models[0];
        for (j, m) in self.models.iter().enumerate().skip(1) {
            if m.fingerprint() == reference.fingerprint() && m.groups() == reference.groups() {
                continue;
            }
            if m.num_layers() != reference.num_layers() {
                return Err(Error::ArchMismatch(format!(
                    "model {j} has {} layers, model 0 has {}",
                    m.num_layers(),
                    reference.num_layers()
                )));
            }
            for (l, (a, b)) in reference.layers().iter().zip(m.layers()).enumerate() {
                let same = match (&a.kind, &b.kind) {
                    (
                        LayerKind::Dense { weight: wa, .. },
                        LayerKind::Dense { weight: wb, .. },
                    ) => wa.shape() == wb.shape(),
                    (LayerKind::Relu, LayerKind::Relu) => true,
                    (LayerKind::Flatten, LayerKind::Flatten) => true,
                    _ => false,
                };
                if !same {
                    return Err(Error::ArchMismatch(format!(
                        "model {j} differs from model 0 at layer {l}"
                    )));
                }
            }
            if m.groups() != reference.groups() {
                return Err(Error::ArchMismatch(format!(
                    "model {j} uses a different module grouping than model 0"
                )));
            }
        }
        Ok(())
    }

    /// Per-model weight checksums, in model order.
    pub fn weight_checksums(&self) -> Vec<u64> {
        self.models.iter().map(ModelDef::weights_checksum).collect()
    }
}

/// Incremental FNV-1a, 64-bit.
struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf29ce484222325)
    }

    fn write_u8(&mut self, b: u8) {
        self.0 ^= b as u64;
        self.0 = self.0.wrapping_mul(0x100000001b3);
    }

    fn write_u32(&mut self, v: u32) {
        for b in v.to_le_bytes() {
            self.write_u8(b);
        }
    }

    fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.write_u8(b);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(shape: &[usize], data: &[f64]) -> Tensor<f64> {
        Tensor::from_vec(shape, data.to_vec()).unwrap()
    }

    fn identity_model() -> ModelDef<f64> {
        let w = t(&[2, 2], &[1.0, 0.0, 0.0, 1.0]);
        let b = t(&[2], &[0.0, 0.0]);
        ModelDef::new(
            vec![LayerSpec::dense(w, b).unwrap()],
            vec![ModuleGroup { start: 0, end: 1 }],
        )
        .unwrap()
    }

    fn random_model(rng: &mut ChaCha8Rng, dims: &[usize]) -> ModelDef<f64> {
        let mut layers = Vec::new();
        for win in dims.windows(2) {
            let (i, o) = (win[0], win[1]);
            let w: Vec<f64> = (0..i * o).map(|_| rng.random::<f64>() - 0.5).collect();
            let b: Vec<f64> = (0..o).map(|_| rng.random::<f64>() - 0.5).collect();
            layers.push(LayerSpec::dense(t(&[i, o], &w), t(&[o], &b)).unwrap());
            layers.push(LayerSpec::relu());
        }
        layers.pop();
        let end = layers.len();
        ModelDef::new(layers, vec![ModuleGroup { start: 0, end }]).unwrap()
    }

    #[test]
    fn identity_layer_forward_is_input() {
        let m = identity_model();
        let x = t(&[2, 2], &[1.0, -2.0, 3.5, 0.25]);
        assert_eq!(m.forward(&x).unwrap(), x);
    }

    #[test]
    fn dense_relu_forward_hand_value() {
        let w = t(&[2, 2], &[2.0, 0.0, 0.0, 2.0]);
        let b = t(&[2], &[0.0, 0.0]);
        let m = ModelDef::new(
            vec![LayerSpec::dense(w, b).unwrap(), LayerSpec::relu()],
            vec![ModuleGroup { start: 0, end: 2 }],
        )
        .unwrap();
        let y = m.forward(&t(&[1, 2], &[1.0, -1.0])).unwrap();
        assert_eq!(y.data(), &[2.0, 0.0]);
    }

    #[test]
    fn forward_matches_hand_rolled_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_model(&mut rng, &[3, 4, 2]);
        let x: Vec<f64> = (0..6).map(|_| rng.random::<f64>() - 0.5).collect();
        let x = t(&[2, 3], &x);
        let by_model = m.forward(&x).unwrap();
        // straight-line evaluation against the same weights
        let (w1, b1) = match &m.layers()[0].kind {
            LayerKind::Dense { weight, bias } => (weight, bias),
            _ => unreachable!(),
        };
        let (w2, b2) = match &m.layers()[2].kind {
            LayerKind::Dense { weight, bias } => (weight, bias),
            _ => unreachable!(),
        };
        let by_hand = x
            .matmul(w1)
            .unwrap()
            .add_bias(b1)
            .unwrap()
            .relu()
            .matmul(w2)
            .unwrap()
            .add_bias(b2)
            .unwrap();
        assert_eq!(by_model, by_hand);
    }

    #[test]
    fn forward_never_mutates_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_model(&mut rng, &[3, 5, 2]);
        let before = m.weights_checksum();
        for _ in 0..10 {
            let x: Vec<f64> = (0..9).map(|_| rng.random::<f64>()).collect();
            m.forward(&t(&[3, 3], &x)).unwrap();
        }
        assert_eq!(m.weights_checksum(), before);
    }

    #[test]
    fn fingerprint_ignores_weights_but_not_dims() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_model(&mut rng, &[3, 4, 2]);
        let b = random_model(&mut rng, &[3, 4, 2]);
        let c = random_model(&mut rng, &[3, 5, 2]);
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
        assert_ne!(a.weights_checksum(), b.weights_checksum());
    }

    #[test]
    fn save_load_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..100 {
            let dims = match seed % 3 {
                0 => vec![2, 3, 2],
                1 => vec![4, 4, 4, 3],
                _ => vec![1, 8, 2],
            };
            let m = random_model(&mut rng, &dims);
            let p1 = dir.path().join(format!("m{seed}.smrg"));
            let p2 = dir.path().join(format!("m{seed}_again.smrg"));
            m.save(&p1).unwrap();
            let loaded = ModelDef::<f64>::load(&p1).unwrap();
            loaded.save(&p2).unwrap();
            assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
            assert_eq!(loaded, m);
            assert_eq!(loaded.fingerprint(), m.fingerprint());
        }
    }

    #[test]
    fn load_reports_distinct_failures() {
        let dir = tempfile::tempdir().unwrap();
        let m = identity_model();
        let path = dir.path().join("m.smrg");
        m.save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();

        let bad_magic = dir.path().join("bad_magic.smrg");
        let mut corrupted = bytes.clone();
        corrupted[0] = b'X';
        std::fs::write(&bad_magic, &corrupted).unwrap();
        assert!(matches!(
            ModelDef::<f64>::load(&bad_magic),
            Err(Error::BadMagic { .. })
        ));

        let bad_version = dir.path().join("bad_version.smrg");
        let mut corrupted = bytes.clone();
        corrupted[4] = 9;
        std::fs::write(&bad_version, &corrupted).unwrap();
        assert!(matches!(
            ModelDef::<f64>::load(&bad_version),
            Err(Error::VersionMismatch { found: 9, .. })
        ));

        let truncated = dir.path().join("truncated.smrg");
        std::fs::write(&truncated, &bytes[..bytes.len() - 5]).unwrap();
        assert!(matches!(
            ModelDef::<f64>::load(&truncated),
            Err(Error::Truncated(_))
        ));
    }

    #[test]
    fn zoo_accepts_same_arch_and_names_mismatched_layer() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_model(&mut rng, &[3, 4, 2]);
        let b = random_model(&mut rng, &[3, 4, 2]);
        assert!(ModelZoo::new(vec![a.clone()]).is_ok()); // J = 1 is fine
        assert!(ModelZoo::new(vec![a.clone(), b]).is_ok());
        let wide = random_model(&mut rng, &[3, 6, 2]);
        let err = ModelZoo::new(vec![a, wide]).unwrap_err();
        match err {
            Error::ArchMismatch(msg) => assert!(msg.contains("layer 0"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn split_into_modules_partitions_evenly() {
        let mut m = ModelDef::<f64>::mlp(2, &[4, 4], 2).unwrap();
        assert_eq!(m.num_layers(), 5);
        m.split_into_modules(2).unwrap();
        assert_eq!(
            m.groups(),
            &[
                ModuleGroup { start: 0, end: 3 },
                ModuleGroup { start: 3, end: 5 }
            ]
        );
        assert!(m.split_into_modules(6).is_err());
    }
}
