//! Evaluate the closed-form n-fold coincidence-rate table for the
//! characterized four-channel demultiplexer, the passive-splitter limit and
//! a bright-source what-if.

use demux_sim::analytics::{analytic_coincidence_rate, analytic_coincidence_rate_with_sigma};
use demux_sim::scenario;

fn main() {
    let model = scenario::published_rate_model();
    let sigma = scenario::published_rate_sigma();
    println!("active demultiplexer, characterized parameters:");
    for n in 1..=model.m {
        let r = analytic_coincidence_rate_with_sigma(n, &model, &sigma).unwrap();
        println!("  R({n}) = {:>12.4e} Hz  (+- {:.1e})", r.value, r.sigma);
    }

    println!("\npassive splitter (switching probability 1/m, rates scale as m/m^n):");
    let passive = demux_sim::RateModel {
        eta_sw: 0.25,
        ..model
    };
    for n in 1..=passive.m {
        let r = analytic_coincidence_rate(n, &passive).unwrap();
        println!("  R({n}) = {:>12.4e} Hz", r);
    }

    println!("\nwhat-if: non-blinking source with 26.1% fiber-coupled efficiency:");
    let bright = scenario::micropillar_what_if();
    for n in 1..=bright.m {
        let r = analytic_coincidence_rate(n, &bright).unwrap();
        println!("  R({n}) = {:>12.4e} Hz", r);
    }
}
