//! Finite-difference check of every trainable tensor on the small reference
//! network (max_len 12, width 15, window 3, four filters, two channels).
//!
//! cargo run --example gradient_check

use mcdepcnn::model::gradcheck::{gradient_check, reference_setup, DEFAULT_STEP, TOLERANCE};
use mcdepcnn::model::Dropout;

fn main() -> Result<(), mcdepcnn::Error> {
    let (config, params, batch) = reference_setup(42)?;
    let refs: Vec<_> = batch.iter().collect();
    let checks = gradient_check(&refs, &params, &config, Dropout::Seeded(7), DEFAULT_STEP)?;
    println!(
        "{:<12} {:>7} {:>12} {:>12}",
        "tensor", "entries", "max_abs", "max_rel"
    );
    for c in &checks {
        println!(
            "{:<12} {:>7} {:>12.3e} {:>12.3e}",
            c.name, c.entries, c.max_abs_error, c.max_rel_error
        );
    }
    let ok = checks.iter().all(|c| c.passed());
    println!(
        "{} (tolerance {:e})",
        if ok { "all tensors agree" } else { "MISMATCH" },
        TOLERANCE
    );
    Ok(())
}
