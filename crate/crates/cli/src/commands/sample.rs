//! One JSONL dump per replica.

use std::fs::File;
use std::io::BufWriter;

use mobgraph::io::write_cloud;
use serde::Serialize;

use super::{stream, Ctx};
use crate::error::Result;

#[derive(Serialize)]
struct Row {
    replica: usize,
    seed: u64,
    vertices: usize,
    file: String,
}

pub fn run(ctx: &Ctx) -> Result<()> {
    let dom = ctx.cfg.domain()?;
    ctx.check_size(ctx.cfg.lambda, &dom)?;
    std::fs::create_dir_all(ctx.out.path("samples"))?;
    let rows = ctx.replicate(ctx.cfg.replicas, |r| {
        let seed = ctx.seed(stream::SAMPLE, 0, r);
        let cloud = ctx.cloud(&dom, ctx.cfg.palm, seed)?;
        let file = format!("samples/replica_{r:05}.jsonl");
        write_cloud(&cloud, BufWriter::new(File::create(ctx.out.path(&file))?))?;
        Ok(Row {
            replica: r,
            seed,
            vertices: cloud.len(),
            file,
        })
    })?;
    ctx.out.write_rows("samples.csv", &rows)
}
