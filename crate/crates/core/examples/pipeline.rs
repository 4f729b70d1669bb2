//! Builds a small dataset directory and runs the batch commands on it:
//! precompute, couple, match-eval, segment and the trace dump. The same
//! steps are available from the `coupled-embed` binary.

use std::fs;

use coupled_embed::io::{save_shape, ShapeFormat};
use coupled_embed::pipeline::{self, PipelineConfig, SegmentTarget};
use coupled_embed::synth::{elongated_blob, standard_poses};

fn main() -> coupled_embed::Result<()> {
    let root = std::env::temp_dir().join(format!("coupled-embed-demo-{}", std::process::id()));
    fs::create_dir_all(root.join("shapes")).expect("create dataset dir");
    fs::create_dir_all(root.join("corres")).expect("create dataset dir");

    // Every pose shares vertex order with the base, so one template file
    // per shape (vertex i -> template i) provides ground truth.
    let base = elongated_blob(24, 27);
    let mut shapes = vec![base.clone()];
    shapes.extend(standard_poses(&base, 1.0));
    let vts: String = (0..base.n_vertices()).map(|i| format!("{i}\n")).collect();
    for s in &shapes {
        save_shape(s, root.join("shapes").join(format!("{}.off", s.name)), ShapeFormat::Off)?;
        fs::write(root.join("corres").join(format!("{}.vts", s.name)), &vts).expect("write vts");
    }

    let mut cfg = PipelineConfig::default();
    cfg.set("dataset_root", root.to_str().unwrap())?;
    cfg.set("cache_dir", root.join("cache").to_str().unwrap())?;
    cfg.set("output_dir", root.join("out").to_str().unwrap())?;
    cfg.set("k", "10")?;
    cfg.set("pairs", "blob:blob_bend,blob:blob_twist")?;
    cfg.validate()?;

    let pre = pipeline::precompute(&cfg, &[])?;
    println!("precompute: {} shapes", pre.succeeded.len());
    pipeline::couple(&cfg)?;
    let methods: Vec<String> = pipeline::METHODS.iter().map(|m| m.to_string()).collect();
    let (_, rows) = pipeline::match_eval(&cfg, &methods)?;
    print!("{}", pipeline::format_eval_csv(&rows));
    let files = pipeline::segment(&cfg, &SegmentTarget::Pair("blob".into(), "blob_bend".into()))?;
    println!("segments: {}", files.len());
    let trace = pipeline::plot_trace(&cfg, "blob", "blob_bend")?;
    println!("trace: {} rows, last {}", trace.lines().count() - 1, trace.lines().last().unwrap_or(""));
    println!("outputs under {}", root.display());
    Ok(())
}
