//! A detector whose axis is tilted by almost 90° still reads 1 with
//! certainty on its own axis state, even though calibration on |↑⟩ and |↓⟩
//! suggests it barely responds.

use weakmeas::analysis::naive_spin_inference;
use weakmeas::measurement::rotated_detector;
use weakmeas::qubit::PureState;
use weakmeas::simulator::{calibrate_detector, chunk_rng};

fn main() -> weakmeas::Result<()> {
    let det = rotated_detector(89.7135_f64.to_radians())?;
    let n = 1_000_000;
    let up = calibrate_detector(&det, &PureState::up(), n, &mut chunk_rng(7, 0))?;
    let down = calibrate_detector(&det, &PureState::down(), n, &mut chunk_rng(7, 1))?;
    let aligned = calibrate_detector(&det, &det.axis_state(), n, &mut chunk_rng(7, 2))?;

    println!("P(1 | up)      = {:.6} ± {:.6}", up.prob_one, up.stderr);
    println!("P(1 | down)    = {:.6} ± {:.6}", down.prob_one, down.stderr);
    println!("P(1 | aligned) = {:.6}", aligned.prob_one);
    println!(
        "naive spin inferred from the aligned run: {} (calibrated range is ±100)",
        naive_spin_inference(aligned.prob_one)
    );
    Ok(())
}
