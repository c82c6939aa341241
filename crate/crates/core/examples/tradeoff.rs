//! Information gain versus disturbance for weak measurements.

use weakmeas::analysis::{fidelity_tradeoff, gaussian_tradeoff_leading_order};
use weakmeas::measurement::{gaussian_model, WeakModel};

fn main() -> weakmeas::Result<()> {
    println!("{:>10} {:>8} {:>10} {:>10} {:>10} {:>12}", "model", "f", "fx", "fz", "sum_sq", "approx sum");
    for f in [0.1, 0.5, 0.9] {
        let r = fidelity_tradeoff(&WeakModel::uniform(f)?);
        println!("{:>10} {f:>8} {:>10.6} {:>10.6} {:>10.6} {:>12}", "uniform", r.fx, r.fz, r.sum_sq, "-");
    }
    for f in [0.01, 0.05, 0.1, 0.2] {
        let r = fidelity_tradeoff(&gaussian_model(f, 1000.0)?);
        let a = gaussian_tradeoff_leading_order(f);
        println!(
            "{:>10} {f:>8} {:>10.6} {:>10.6} {:>10.6} {:>12.6}",
            "gaussian", r.fx, r.fz, r.sum_sq, a.sum_sq
        );
    }
    Ok(())
}
