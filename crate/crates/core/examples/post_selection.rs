//! Monte Carlo of the weak-then-strong experiment: post-selecting the rare
//! `l = 2` outcome on a nearly-up state drags the mean pointer reading far
//! beyond anything a single spin can produce.

use weakmeas::analysis::{exact_joint_distribution, mean_k_for_state, post_selected_mean_exact, PostSelection};
use weakmeas::measurement::StrongOutcome;
use weakmeas::qubit::{make_tilted_state, PureState};
use weakmeas::simulator::{run_experiment, SimConfig};

fn main() -> weakmeas::Result<()> {
    let cfg = SimConfig { f_avg: 0.05, k_rms: 200.0, alpha: 0.1, runs: 1_000_000, seed: 42 };
    let model = cfg.validate()?;
    let table = exact_joint_distribution(&make_tilted_state(cfg.alpha), &model);

    let mut stats = PostSelection::default();
    for r in run_experiment(&cfg)? {
        stats.push(&r);
    }
    for l in StrongOutcome::BOTH {
        let exact = post_selected_mean_exact(&table, l)?;
        match stats.stats(l) {
            Ok(mc) => println!(
                "l={l}: {} runs, <k> = {:.3} ± {:.3}  (exact {:.4})",
                stats.count(l),
                mc.mean_k,
                mc.stderr_k,
                exact.mean_k
            ),
            Err(e) => println!("l={l}: {e}"),
        }
    }
    println!("reference <k> for |+>: {:.4}", mean_k_for_state(&PureState::plus(), &model));
    Ok(())
}
