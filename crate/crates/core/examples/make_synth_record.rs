//! Regenerates the bundled two-lead test record under `data/`.
//!
//!     cargo run -p lathide --example make_synth_record

use std::path::Path;

use lathide::signal::synthetic_record;

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir)?;
    let (header, dat) = synthetic_record("synth_ecg", 10_800, 360.0);
    std::fs::write(dir.join("synth_ecg.hea"), header.to_text())?;
    std::fs::write(dir.join("synth_ecg.dat"), dat)?;
    println!(
        "wrote {} samples x 2 leads to {}",
        header.n_samples,
        dir.display()
    );
    Ok(())
}
