//! Write the bundled scenario presets as TOML config files, ready for the
//! `demux-sim simulate --config ...` command line.

use demux_sim::scenario;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "scenarios".to_string());
    std::fs::create_dir_all(&dir).expect("create scenario directory");
    let presets = [
        (
            "four_channel_reference.toml",
            scenario::four_channel_reference(100_000_000, 7600),
        ),
        ("hbt_calibration.toml", scenario::hbt_calibration(10_000_000, 2022)),
        (
            "switching_benchmark.toml",
            scenario::switching_benchmark(10_000_000, 314),
        ),
        ("hom_interference.toml", scenario::hom_interference(4_000_000, 99)),
        (
            "micro_fixed_seed.toml",
            scenario::four_channel_reference(10_000, 12345),
        ),
    ];
    for (name, config) in presets {
        let path = std::path::Path::new(&dir).join(name);
        std::fs::write(&path, config.to_toml()).expect("write scenario");
        println!("wrote {}", path.display());
    }
}
