//! JSONL dumps of clouds and snapshots: a header line, then one vertex per
//! line. Floats round-trip exactly.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dynamics::Snapshot;
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::pointprocess::{PointCloud, Vertex};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub domain: Domain,
    pub intensity: f64,
    pub seed: u64,
    pub palm: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
}

impl Header {
    fn of(cloud: &PointCloud, time: Option<f64>) -> Self {
        Header {
            domain: cloud.domain,
            intensity: cloud.intensity,
            seed: cloud.seed,
            palm: cloud.palm,
            time,
        }
    }
}

fn write_line<W: Write, T: Serialize>(w: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, value).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_cloud<W: Write>(cloud: &PointCloud, mut w: W) -> Result<()> {
    write_line(&mut w, &Header::of(cloud, None))?;
    for v in &cloud.vertices {
        write_line(&mut w, v)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the vertices at their snapshot positions, with the snapshot time
/// in the header.
pub fn write_snapshot<W: Write>(snap: &Snapshot, mut w: W) -> Result<()> {
    write_line(&mut w, &Header::of(&snap.cloud, Some(snap.time)))?;
    for (i, v) in snap.cloud.vertices.iter().enumerate() {
        let at = Vertex {
            id: v.id,
            pos: snap.pos(i).to_vec().into(),
            mark: v.mark,
        };
        write_line(&mut w, &at)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dump written by [`write_cloud`] or [`write_snapshot`].
pub fn read_records<R: BufRead>(r: R) -> Result<(Header, Vec<Vertex>)> {
    let mut lines = r.lines().enumerate().filter(|(_, l)| match l {
        Ok(s) => !s.trim().is_empty(),
        Err(_) => true,
    });
    let header: Header = match lines.next() {
        Some((_, line)) => serde_json::from_str(&line?).map_err(|e| Error::Format(format!("header: {e}")))?,
        None => return Err(Error::Format("empty dump".into())),
    };
    let mut vertices = Vec::new();
    for (no, line) in lines {
        let v: Vertex = serde_json::from_str(&line?).map_err(|e| Error::Format(format!("line {}: {e}", no + 1)))?;
        if v.pos.len() != header.domain.dim {
            return Err(Error::Format(format!("line {}: position has the wrong dimension", no + 1)));
        }
        vertices.push(v);
    }
    Ok((header, vertices))
}

pub fn read_cloud<R: BufRead>(r: R) -> Result<PointCloud> {
    let (h, vertices) = read_records(r)?;
    if h.time.is_some() {
        return Err(Error::Format("dump is a snapshot, not a cloud".into()));
    }
    let mut cloud = PointCloud::from_vertices(h.domain, h.intensity, h.palm, vertices)?;
    cloud.seed = h.seed;
    Ok(cloud)
}
