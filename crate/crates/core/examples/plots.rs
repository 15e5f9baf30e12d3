//! Writes the global map, a ranked-rule plot and two region heatmaps.

use ensured::report::{cmd_global_map, cmd_rank_plot, cmd_region_heatmap, RunConfig};
use ensured::triage::RankingWeight;

fn main() -> ensured::Result<()> {
    let out = std::env::temp_dir().join("ensured-plots");
    let mut config = RunConfig::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/winequality-red.csv"), &out);
    config.positive_from = Some(6.0);
    config.test_size = 50;

    let map = cmd_global_map(&config)?;
    let id = map.points[0].id;
    let mut files = cmd_rank_plot(&config, id)?;
    for w in [0.0, 1.0] {
        files.push(cmd_region_heatmap(RankingWeight::new(w)?, &out)?);
    }
    println!("wrote {}", out.join("global_map.svg").display());
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
