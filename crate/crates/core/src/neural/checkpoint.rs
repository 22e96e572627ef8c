//! Checkpoint file: a text header followed by raw parameters.
//!
//! ```text
//! bamaxnet v1
//! actions 6
//! params 20
//! explored.conv.weight 32 1 1 1
//! ...
//! end
//! <little-endian f32 blocks in manifest order>
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use super::network::{Network, Parameters, ACTIONS};
use crate::error::{Error, Result};

const MAGIC: &str = "bamaxnet v1";

fn manifest(net: &Network<f32>) -> String {
    let mut s = format!("{MAGIC}\nactions {ACTIONS}\nparams {}\n", net.params().len());
    for (name, p) in Network::<f32>::param_names().iter().zip(net.params()) {
        let dims: Vec<String> = p.shape().iter().map(|d| d.to_string()).collect();
        s.push_str(&format!("{name} {}\n", dims.join(" ")));
    }
    s.push_str("end\n");
    s
}

pub fn to_bytes(net: &Network<f32>) -> Vec<u8> {
    let mut out = manifest(net).into_bytes();
    for p in net.params() {
        for v in p.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<Network<f32>> {
    let bad = |m: &str| Error::Checkpoint(m.to_string());
    let mut net = Network::<f32>::zeros();
    let expected = manifest(&net);

    let end = bytes
        .windows(4)
        .position(|w| w == b"end\n")
        .ok_or_else(|| bad("header terminator not found (truncated file?)"))?;
    let header = std::str::from_utf8(&bytes[..end + 4]).map_err(|_| bad("header is not UTF-8"))?;
    let mut lines = header.lines();
    match lines.next() {
        Some(MAGIC) => {}
        Some(other) => return Err(bad(&format!("unsupported format `{other}`, expected `{MAGIC}`"))),
        None => return Err(bad("empty file")),
    }
    if let Some(a) = lines.next().and_then(|l| l.strip_prefix("actions ")) {
        if a != ACTIONS.to_string() {
            return Err(bad(&format!("checkpoint has {a} actions, this network has {ACTIONS}")));
        }
    } else {
        return Err(bad("missing action count"));
    }
    if header != expected {
        return Err(bad("layer manifest does not match this architecture"));
    }

    let body = &bytes[end + 4..];
    let total: usize = net.param_count();
    if body.len() != total * 4 {
        return Err(bad(&format!(
            "expected {} parameter bytes, found {}",
            total * 4,
            body.len()
        )));
    }
    let mut chunks = body.chunks_exact(4);
    for p in net.params_mut() {
        for v in p.data_mut() {
            let c = chunks.next().expect("length checked");
            *v = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
        }
    }
    Ok(net)
}

pub fn save_checkpoint(net: &Network<f32>, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&to_bytes(net))?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Network<f32>> {
    if !path.exists() {
        return Err(Error::MissingCheckpoint(path.to_path_buf()));
    }
    from_bytes(&fs::read(path)?)
}
