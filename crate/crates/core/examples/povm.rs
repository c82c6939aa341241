//! Builds combined weak-then-strong POVM elements and checks they are rank
//! one and sum to the identity.

use weakmeas::measurement::{
    completeness_defect, gaussian_model, povm_closed_form, povm_element, StrongOutcome,
};

fn main() -> weakmeas::Result<()> {
    let model = gaussian_model(0.05, 200.0)?;
    println!(
        "gaussian model: {} outcomes, k in [-{k}, {k}], completeness defect {:.2e}",
        model.len(),
        completeness_defect(&model),
        k = model.k_max()
    );
    for k in [0, 50, 200, 600] {
        let o = *model.outcome(k)?;
        for l in StrongOutcome::BOTH {
            let e = povm_element(&model, k, l)?;
            let diff = e.m.max_abs_diff(&povm_closed_form(&o, l));
            println!(
                "k={k:4} l={l}: P={:.3e} F={:+.5} m1={:.3e} m2={:.1e} θ={:+.5} |closed−numeric|={diff:.1e}",
                o.p, o.f, e.m1, e.m2, e.theta
            );
        }
    }
    Ok(())
}
