//! CSV (`x0,..,x{n-1},measure,value`) and a little-endian columnar cache.

use std::io::{Read, Write};
use std::sync::Arc;

use super::{MetricCloud, SampledField};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"HSFIELD1";

pub fn write_csv<W: Write>(f: &SampledField, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = f.cloud().dim();
    let mut header: Vec<String> = (0..n).map(|k| format!("x{k}")).collect();
    header.push("measure".into());
    header.push("value".into());
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for ((p, m), v) in f.cloud().points().iter().zip(f.cloud().measures()).zip(f.values()) {
        let row: Vec<String> =
            p.iter().chain([m, v]).map(|x| format!("{x:e}")).collect();
        w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back a CSV field; the cloud comes back as irregular.
pub fn read_csv<R: Read>(input: R) -> Result<SampledField> {
    let mut r = csv::Reader::from_reader(input);
    let width = r.headers().map_err(|e| Error::Format(e.to_string()))?.len();
    if width < 3 {
        return Err(Error::Format("need at least one coordinate, measure and value".into()));
    }
    let (mut pts, mut ms, mut vs) = (Vec::new(), Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let row: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("{s:?}: {e}"))))
            .collect::<Result<_>>()?;
        if row.len() != width {
            return Err(Error::Format("ragged row".into()));
        }
        pts.push(row[..width - 2].to_vec());
        ms.push(row[width - 2]);
        vs.push(row[width - 1]);
    }
    SampledField::new(Arc::new(MetricCloud::irregular(pts, ms)?), vs)
}

pub fn write_binary<W: Write>(f: &SampledField, mut out: W) -> Result<()> {
    let n = f.cloud().dim();
    out.write_all(MAGIC)?;
    out.write_all(&(n as u32).to_le_bytes())?;
    out.write_all(&(f.len() as u64).to_le_bytes())?;
    let mut put = |v: f64| out.write_all(&v.to_le_bytes());
    for k in 0..n {
        for p in f.cloud().points() {
            put(p[k])?;
        }
    }
    for m in f.cloud().measures() {
        put(*m)?;
    }
    for v in f.values() {
        put(*v)?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<SampledField> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a field cache".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    input.read_exact(&mut b8)?;
    let len = u64::from_le_bytes(b8) as usize;
    let mut column = |input: &mut R| -> Result<Vec<f64>> {
        (0..len)
            .map(|_| {
                input.read_exact(&mut b8)?;
                Ok(f64::from_le_bytes(b8))
            })
            .collect()
    };
    let cols: Vec<Vec<f64>> = (0..n).map(|_| column(&mut input)).collect::<Result<_>>()?;
    let ms = column(&mut input)?;
    let vs = column(&mut input)?;
    let pts = (0..len).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    SampledField::new(Arc::new(MetricCloud::irregular(pts, ms)?), vs)
}
