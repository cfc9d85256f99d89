//! Wall-clock ratio t(nonparametric) / t(parametric with condensation).
//!
//! Build with `--release`; debug timings are meaningless.

use dssy::bench::study::MeshFamily;
use dssy::bench::timing::{timing_ratio, to_markdown, TimingConfig};

fn main() -> dssy::Result<()> {
    for family in [MeshFamily::Theta { theta: 0.7 }, MeshFamily::Random { alpha: 0.25, seed: 1 }] {
        let rows = timing_ratio(&TimingConfig::new(family, &[8, 16, 32, 64]))?;
        println!("{}\n{}", family.label(), to_markdown(&rows));
    }
    Ok(())
}
