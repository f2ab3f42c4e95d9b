//! Plain-text serialization of trained circuit parameters, so pipeline
//! stages can be rerun from file artifacts.
//!
//! Format: a header line `n_qubits layers`, then one line per layer with the
//! theta triples of every qubit followed by the phi triples of every
//! adjacent pair, space-separated at full precision.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::qnn::QnnParams;
use crate::simulator::Su2Angles;

pub fn write_params<W: Write>(params: &QnnParams, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {}", params.n_qubits(), params.layers())?;
    for l in 0..params.layers() {
        let mut fields = Vec::new();
        for q in 0..params.n_qubits() {
            let t = params.theta(l, q);
            fields.push(format!("{:.16e} {:.16e} {:.16e}", t.a, t.b, t.c));
        }
        for s in 0..params.n_qubits() - 1 {
            let p = params.phi(l, s);
            fields.push(format!("{:.16e} {:.16e} {:.16e}", p.a, p.b, p.c));
        }
        writeln!(w, "{}", fields.join(" "))?;
    }
    Ok(())
}

pub fn read_params<R: BufRead>(r: R, origin: &str) -> Result<QnnParams> {
    let mut lines = r.lines();
    let head = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(origin, e))?
        .ok_or_else(|| Error::parse(origin, "empty file"))?;
    let fields: Vec<&str> = head.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(Error::parse(origin, "expected header 'n_qubits layers'"));
    }
    let n_qubits: usize = fields[0]
        .parse()
        .map_err(|e| Error::parse(origin, format!("bad n_qubits: {e}")))?;
    let layers: usize = fields[1]
        .parse()
        .map_err(|e| Error::parse(origin, format!("bad layers: {e}")))?;
    if n_qubits == 0 || layers == 0 {
        return Err(Error::parse(origin, "n_qubits and layers must be >= 1"));
    }

    let per_layer = 3 * (2 * n_qubits - 1);
    let mut theta = Vec::with_capacity(layers);
    let mut phi = Vec::with_capacity(layers);
    for l in 0..layers {
        let line = lines
            .next()
            .transpose()
            .map_err(|e| Error::io(origin, e))?
            .ok_or_else(|| Error::parse(origin, format!("missing layer {l}")))?;
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| Error::parse(origin, format!("layer {l}: {e}")))
            })
            .collect::<Result<_>>()?;
        if values.len() != per_layer {
            return Err(Error::parse(
                origin,
                format!(
                    "layer {l} has {} values, expected {per_layer}",
                    values.len()
                ),
            ));
        }
        let triple = |base: usize| Su2Angles::new(values[base], values[base + 1], values[base + 2]);
        theta.push((0..n_qubits).map(|q| triple(3 * q)).collect::<Vec<_>>());
        phi.push(
            (0..n_qubits - 1)
                .map(|s| triple(3 * n_qubits + 3 * s))
                .collect::<Vec<_>>(),
        );
    }
    QnnParams::new(theta, phi)
}

pub fn save_params(params: &QnnParams, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    write_params(params, std::io::BufWriter::new(file))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_params(path: &Path) -> Result<QnnParams> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_params(std::io::BufReader::new(file), &path.display().to_string())
}
