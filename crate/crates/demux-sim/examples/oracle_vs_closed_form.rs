//! Validate the closed-form coincidence-rate model against the brute-force
//! cycle enumeration, in both blinking regimes.

use demux_sim::analytics::{analytic_coincidence_rate, RateModel};
use demux_sim::oracle::{enumerate_cycle, BlinkingMode};
use demux_sim::scenario;

fn main() {
    let model = scenario::published_rate_model();
    let enumeration = enumerate_cycle(4, &model, BlinkingMode::Slow).unwrap();
    println!(
        "enumerated {} outcomes, total probability {:.12}",
        enumeration.outcomes.len(),
        enumeration.total_probability()
    );
    println!("\nslow blinking (on/off per cycle):");
    println!("  n     enumeration          closed form          rel. diff");
    for n in 1..=4 {
        let oracle = enumeration.nfold_rate_hz(n).unwrap();
        let closed = analytic_coincidence_rate(n, &model).unwrap();
        println!(
            "  {n}  {oracle:>16.9e}  {closed:>16.9e}  {:>10.2e}",
            (oracle - closed).abs() / closed
        );
    }

    println!("\nfast blinking (on/off per pulse, on-fraction moves inside the power):");
    let fast = enumerate_cycle(4, &model, BlinkingMode::Fast).unwrap();
    println!("  n     enumeration          closed form          rel. diff");
    for n in 1..=4 {
        let oracle = fast.nfold_rate_hz(n).unwrap();
        let closed = fast_closed_form(n, &model);
        println!(
            "  {n}  {oracle:>16.9e}  {closed:>16.9e}  {:>10.2e}",
            (oracle - closed).abs() / closed
        );
    }
}

/// Per-pulse-independent blinking: the on-fraction multiplies every photon
/// independently, so it moves inside the n-th power.
fn fast_closed_form(n: u32, model: &RateModel) -> f64 {
    let uncorrelated = RateModel {
        eta_blinking: 1.0,
        eta_qd: model.eta_qd,
        ..*model
    };
    analytic_coincidence_rate(n, &uncorrelated).unwrap()
}
