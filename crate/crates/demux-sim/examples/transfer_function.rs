//! Dump the switching transfer function of each stage over one cycle as CSV
//! (t_ps, switch probability per stage), plus the flattened-extremum
//! robustness numbers.

use demux_sim::network::eom_switch_probability;
use demux_sim::scenario;
use std::io::Write;

fn main() {
    let config = scenario::four_channel_reference(16, 1);
    let clock = config.clock.pulse_clock();
    let cycle = 4 * clock.pulse_period_ps;

    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "transfer_function.csv".to_string());
    let mut file = std::io::BufWriter::new(std::fs::File::create(&path).expect("create csv"));
    write!(file, "t_ps").unwrap();
    for i in 0..config.network.stages.len() {
        write!(file, ",stage{i}").unwrap();
    }
    writeln!(file).unwrap();
    let mut t = 0i64;
    while t <= cycle {
        write!(file, "{t}").unwrap();
        for stage in &config.network.stages {
            write!(file, ",{:.6}", eom_switch_probability(t, &stage.drive)).unwrap();
        }
        writeln!(file).unwrap();
        t += 50;
    }
    println!("transfer functions over one {cycle} ps cycle written to {path}");

    // flattened extrema: phase and amplitude errors cost only quartically /
    // quadratically
    let drive = &config.network.stages[0].drive;
    println!("\nswitch probability at the first pulse extremum:");
    for err in [0.0, 0.05, 0.1, 0.2] {
        let mut shifted = *drive;
        shifted.phase_rad += err;
        println!(
            "  phase error {err:>4} rad -> {:.9}",
            eom_switch_probability(0, &shifted)
        );
    }
    for eps in [0.0, 0.02, 0.05, 0.1] {
        let mut scaled = *drive;
        scaled.amplitude_rel = 1.0 + eps;
        println!(
            "  amplitude error {eps:>4} -> {:.9}",
            eom_switch_probability(0, &scaled)
        );
    }
}
