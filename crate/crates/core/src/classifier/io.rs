//! Model files: a `key=value` preamble followed by the decision field.
//!
//! ```text
//! levelset-fbeta model
//! version=1
//! measure=f-beta:1
//! p_count=1000
//! ...
//! config.tol=0.00001
//! field
//! dim 1; axis 0: -2.5 7.5 1025;
//! ...
//! end
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::TrainedClassifier;
use crate::energy::MeasureEnergy;
use crate::error::{Error, Result};
use crate::field::{read_field, write_field};
use crate::solver::{ResolvedParams, TrainConfig};

pub const MODEL_VERSION: u32 = 1;
const MAGIC: &str = "levelset-fbeta model";

pub fn write_model<W: Write>(mut w: W, m: &TrainedClassifier) -> std::io::Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "version={MODEL_VERSION}")?;
    writeln!(w, "measure={}", m.measure())?;
    writeln!(w, "p_count={}", m.energy.p_count())?;
    writeln!(w, "n_count={}", m.energy.n_count())?;
    writeln!(w, "densities_hash={}", m.densities_hash)?;
    writeln!(w, "resolved.dt={}", m.params.dt)?;
    writeln!(w, "resolved.eps_h={}", m.params.eps_h)?;
    writeln!(w, "resolved.lambda={}", m.params.lambda)?;
    for (k, v) in m.config.to_pairs() {
        writeln!(w, "config.{k}={v}")?;
    }
    writeln!(w, "field")?;
    write_field(&mut w, &m.u)?;
    writeln!(w, "end")?;
    Ok(())
}

pub fn save_model(path: &Path, m: &TrainedClassifier) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_model(&mut w, m).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedClassifier> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(&mut BufReader::new(file))
}

fn format(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn number<T: std::str::FromStr>(key: &str, v: Option<String>) -> Result<T> {
    let v = v.ok_or_else(|| format(format!("missing '{key}'")))?;
    v.parse()
        .map_err(|_| format(format!("bad value '{v}' for '{key}'")))
}

pub fn read_model<R: BufRead>(r: &mut R) -> Result<TrainedClassifier> {
    let mut line = String::new();
    let next = |line: &mut String, r: &mut R| -> Result<bool> {
        line.clear();
        let n = r
            .read_line(line)
            .map_err(|e| format(format!("read failed: {e}")))?;
        Ok(n > 0)
    };

    if !next(&mut line, r)? || line.trim() != MAGIC {
        return Err(format("not a model file"));
    }
    if !next(&mut line, r)? {
        return Err(format("missing version line"));
    }
    let version: u32 = line
        .trim()
        .strip_prefix("version=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| format("bad version line"))?;
    if version != MODEL_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            supported: MODEL_VERSION,
        });
    }

    let mut measure = None;
    let mut p_count = None;
    let mut n_count = None;
    let mut hash = None;
    let (mut dt, mut eps_h, mut lambda) = (None, None, None);
    let mut config = TrainConfig::default();
    loop {
        if !next(&mut line, r)? {
            return Err(format("model truncated before the field"));
        }
        let l = line.trim();
        if l == "field" {
            break;
        }
        let (k, v) = l
            .split_once('=')
            .ok_or_else(|| format(format!("expected key=value, got '{l}'")))?;
        let v = v.to_string();
        match k {
            "measure" => measure = Some(v),
            "p_count" => p_count = Some(v),
            "n_count" => n_count = Some(v),
            "densities_hash" => hash = Some(v),
            "resolved.dt" => dt = Some(v),
            "resolved.eps_h" => eps_h = Some(v),
            "resolved.lambda" => lambda = Some(v),
            _ => {
                let key = k
                    .strip_prefix("config.")
                    .ok_or_else(|| format(format!("unknown key '{k}'")))?;
                if !config.set(key, &v).map_err(|e| format(e.to_string()))? {
                    return Err(format(format!("unknown config key '{key}'")));
                }
            }
        }
    }
    let measure = measure.ok_or_else(|| format("missing 'measure'"))?;
    let measure = measure.parse().map_err(|e: Error| format(e.to_string()))?;
    let energy = MeasureEnergy::from_counts(
        measure,
        number("p_count", p_count)?,
        number("n_count", n_count)?,
    )
    .map_err(|e| format(e.to_string()))?;
    let params = ResolvedParams {
        dt: number("resolved.dt", dt)?,
        eps_h: number("resolved.eps_h", eps_h)?,
        lambda: number("resolved.lambda", lambda)?,
    };
    let hash = hash.ok_or_else(|| format("missing 'densities_hash'"))?;
    let u = read_field(r)?;
    if !next(&mut line, r)? || line.trim() != "end" {
        return Err(format("model truncated: missing 'end' after the field"));
    }
    while next(&mut line, r)? {
        if !line.trim().is_empty() {
            return Err(format("trailing data after the model"));
        }
    }
    Ok(TrainedClassifier::from_parts(
        u, energy, config, params, hash,
    ))
}
